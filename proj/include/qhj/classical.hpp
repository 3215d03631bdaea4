#pragma once

#include <complex>
#include <span>
#include <vector>

#include "qhj/potentials.hpp"

namespace qhj {

// Classical momentum with the positive branch: real and >= 0 where E >= V,
// purely imaginary with positive imaginary part where V > E.
std::complex<double> classical_momentum(const Potential& potential, const UnitsConfig& units,
                                        double energy, double x);

// Real classical momentum on the allowed region and the classical
// characteristic function W0(x) = int_{x_left}^{x} p_C, W0(x_left) = 0.
struct ClassicalField {
    std::vector<double> grid;
    std::vector<double> p_c;
    std::vector<double> w0;
};

ClassicalField classical_action(const Potential& potential, const UnitsConfig& units, double energy,
                                std::span<const double> grid);

}  // namespace qhj
