#pragma once

// Test-side helpers: reference derivatives, error norms and an eigenvalue
// search on the Numerov oracle.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "qhj/numerics.hpp"
#include "qhj/oracle.hpp"
#include "qhj/potentials.hpp"

namespace qhj::test {

inline const UnitsConfig unit{};

inline double analytic_slope(const Potential& v, const UnitsConfig& u, int n, double x, double h = 1e-4) {
    auto f = [&](double t) { return analytic_eigenfunction(v, u, n, t); };
    return (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) / (12 * h);
}

inline std::vector<double> analytic_samples(const Potential& v, const UnitsConfig& u, int n,
                                            std::span<const double> xs) {
    std::vector<double> out(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) out[i] = analytic_eigenfunction(v, u, n, xs[i]);
    return out;
}

inline std::vector<double> analytic_slopes(const Potential& v, const UnitsConfig& u, int n,
                                           std::span<const double> xs) {
    std::vector<double> out(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) out[i] = analytic_slope(v, u, n, xs[i]);
    return out;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline double max_abs(std::span<const double> a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

// Energy in [lo, hi] where the Numerov log-derivative jump changes sign.
inline double numerov_eigenvalue(const Potential& v, const UnitsConfig& u, std::span<const double> grid,
                                 double lo, double hi) {
    auto jump = [&](double e) { return numerov_solve(v, u, e, grid).jump; };
    return bracketed_root(jump, lo, hi, 1e-13);
}

}  // namespace qhj::test
