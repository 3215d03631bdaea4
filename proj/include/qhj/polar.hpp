#pragma once

// The quantum momentum function p_L = (hbar/i) psi'/psi: sampled from a
// wave function, or integrated directly from its Riccati equation
//     p^2/2m + (hbar/2mi) p' = E - V
// with a fractional-linear stepper that passes through the first-order
// poles at the nodes of psi. Includes pole/residue location and the
// reconstruction of psi = exp((i/hbar) int p) across the poles.

#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "qhj/potentials.hpp"

namespace qhj {

struct PoleEstimate {
    double x0 = 0.0;
    std::complex<double> residue;
    bool refined = false;
};

struct QmfTrace {
    double hbar = 1.0;
    std::vector<double> grid;
    std::vector<std::complex<double>> p_l;
    std::vector<std::complex<double>> w_l;  // accumulated action, zero at the first sample
    std::vector<bool> regular;              // false at pole-adjacent samples
    std::vector<PoleEstimate> poles;
    // p_l at any abscissa inside the grid other than a pole.
    std::function<std::complex<double>(double)> evaluate;
};

struct SampledQmfOptions {
    double node_threshold = 1e-10;  // |psi| below this fraction of max|psi| is pole-adjacent
    std::size_t stencil = 8;        // local interpolation width for off-grid values
};

QmfTrace qmf_from_wavefunction(std::span<const double> psi, std::span<const double> dpsi,
                               const UnitsConfig& units, std::span<const double> grid,
                               const SampledQmfOptions& options = {});

struct MoebiusOptions {
    std::optional<std::complex<double>> p_start;  // default: classical_momentum(x_start)
};

// Single trajectory started at x_start (in a forbidden region) and carried to
// both ends of the grid.
QmfTrace moebius_integrate_qmf(const Potential& potential, const UnitsConfig& units, double energy,
                               double x_start, std::span<const double> grid, const MoebiusOptions& options = {});

// Two trajectories started at the grid ends on the branch that decays
// outward, joined near the middle of the allowed region. Free of the
// exponential contamination a single trajectory suffers in the far tail.
QmfTrace moebius_integrate_qmf_two_sided(const Potential& potential, const UnitsConfig& units, double energy,
                                         std::span<const double> grid);

// p^2/2m + (hbar/2mi) p' - (E - V) at grid node i, p' from a five-point
// stencil of spacing h/128 through trace.evaluate.
std::complex<double> riccati_residual(const QmfTrace& trace, const Potential& potential, const UnitsConfig& units,
                                      double energy, std::size_t i);

struct AntitheticOptions {
    std::size_t window_cells = 10;    // half-width of the mirror window around a node
    double disk_cells = 1.0;          // radius of the disk bridged by the local pole model
    double estimate_cells = 3.0;      // allowed distance of an estimate from a detected pole
    std::size_t quadrature_points = 20;
};

struct ReconstructedWave {
    std::vector<double> grid;
    std::vector<double> psi;    // normalized, positive in the right tail
    std::vector<double> nodes;  // refined node abscissae used
    double norm = 0.0;
};

// psi = exp((i/hbar) int p_l) for a trace of a real wave function. Each node
// estimate is snapped to the nearest detected pole; inside its window the
// integrand is sampled in mirror pairs about the node so that the 1/(x - x0)
// parts cancel.
ReconstructedWave reconstruct_psi_antithetic(const QmfTrace& trace, std::span<const double> node_estimates,
                                             const AntitheticOptions& options = {});

}  // namespace qhj
