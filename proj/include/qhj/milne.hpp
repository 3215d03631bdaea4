#pragma once

// Bound states from the Milne amplitude equation
//     w'' + (p_C/hbar)^2 w = 1/w^3,   X' = hbar/w^2,   Y = -hbar ln(w/w_l)
// on the classically allowed interval, joined to Riccati solutions
// psi = B exp(-Y/hbar) on both forbidden sides.

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "qhj/numerics.hpp"
#include "qhj/potentials.hpp"

namespace qhj {

enum class Side { left, right };

struct ForbiddenOptions {
    double depth_action = 25.0;   // start where int |p_C| dx / hbar reaches this
    double step = 2e-3;           // node spacing of self-built branch grids
    std::optional<double> box;    // outer limit of self-built branch grids
    double rk_tolerance = 1e-8;
    int max_doublings = 3;
    double blowup = 1e8;          // |psi'/psi| beyond this is a stiffness failure
};

// Forbidden-side solution psi = B exp(-Y/hbar). The grid starts at the
// turning point and runs outward; Y vanishes at the turning point.
struct ForbiddenBranch {
    Side side = Side::left;
    double energy = 0.0;
    std::vector<double> grid;
    std::vector<double> y;
    std::vector<double> s;          // psi'/psi
    std::size_t start_index = 0;    // node where the inward Riccati sweep began
};

// Outward grid from the turning point with spacing options.step, long enough
// to reach the depth criterion (clipped to options.box and the potential's
// domain).
std::vector<double> forbidden_grid(const Potential& potential, const UnitsConfig& units, double energy,
                                   Side side, const ForbiddenOptions& options = {});

ForbiddenBranch solve_forbidden(const Potential& potential, const UnitsConfig& units, double energy,
                                Side side, std::span<const double> outward_grid,
                                const ForbiddenOptions& options = {});

ForbiddenBranch solve_forbidden(const Potential& potential, const UnitsConfig& units, double energy,
                                Side side, const ForbiddenOptions& options = {});

// Members of the Milne family. Every member yields the same psi; they differ
// in w and hence in X and Y.
//
// BalancedMember: left-matched and carrying the pi/4 phase at both turning
// points, so that X(x_right) = (n+1/2) pi hbar exactly at an eigenvalue.
// LeftAmplitude: left-matched with w(x_left) = w0.
// SmoothMember: WKB-initialized at the potential minimum; the least
// oscillating member, whose X' tends to p_C as hbar -> 0.
struct BalancedMember {};
struct LeftAmplitude {
    double w0 = 1.0;
};
struct SmoothMember {};
using FamilyMember = std::variant<BalancedMember, LeftAmplitude, SmoothMember>;

struct AllowedOptions {
    FamilyMember member = BalancedMember{};
    double rk_tolerance = 1e-8;
    int max_doublings = 3;
};

struct ActionField {
    double hbar = 1.0;
    double energy = 0.0;
    std::vector<double> grid;
    std::vector<double> real_action;        // X, with sin(X/hbar + pi/4) matching psi
    std::vector<double> real_momentum;      // X' = hbar/w^2
    std::vector<double> imag_action;        // Y, zero at x_left
    std::vector<double> imag_momentum;      // Y' = -hbar w'/w
    std::vector<double> amplitude;          // w
    std::vector<double> amplitude_slope;    // w'
    std::vector<std::complex<double>> qmf;  // p_m = X' + i Y'
    double w0 = 0.0;                        // w(x_left)
    int substeps = 1;
    double richardson_gap = 0.0;
};

ActionField solve_allowed(const Potential& potential, const UnitsConfig& units, double energy,
                          std::span<const double> grid, const ForbiddenBranch& left,
                          const ForbiddenBranch& right, const AllowedOptions& options = {});

struct WaveFunction {
    std::vector<double> grid;
    std::vector<double> psi;
    double amplitude = 0.0;  // A in psi = A sin(X/hbar + pi/4) / sqrt(X')
    double norm = 0.0;       // int psi^2 after normalization
    double b_left = 0.0;
    double b_right = 0.0;
    double left_mismatch = 0.0;   // relative psi' jump at the turning points
    double right_mismatch = 0.0;
    std::size_t left_index = 0;   // turning points inside `grid`
    std::size_t right_index = 0;
};

// Joins the three pieces, normalizes with Simpson's rule and fixes the sign so
// that psi > 0 in the right tail. Throws NotEigenvalueError when psi' jumps by
// more than `mismatch_tolerance` (relative) at a turning point.
WaveFunction assemble_wavefunction(const ActionField& field, const ForbiddenBranch& left,
                                   const ForbiddenBranch& right, double mismatch_tolerance = 1e-4);

struct FamilyOptions {
    ForbiddenOptions forbidden;
    AllowedOptions allowed;
    double mismatch_tolerance = 1e-4;
};

struct FamilySolution {
    double energy = 0.0;
    TurningPoints turning;
    SnappedGrid grid;
    ForbiddenBranch left;
    ForbiddenBranch right;
    ActionField action;
    WaveFunction wave;
};

// Whole pipeline on a uniform grid whose nearest nodes are snapped onto the
// turning points.
FamilySolution solve_family(const Potential& potential, const UnitsConfig& units, double energy,
                            const GridSpec& grid, const FamilyOptions& options = {});

// X(x_right) - (n + 1/2) pi hbar for the balanced member at the analytic
// eigenvalue E_n, or at an arbitrary energy.
double quantization_defect(const Potential& potential, const UnitsConfig& units, int n,
                           const GridSpec& grid, const FamilyOptions& options = {});
double quantization_defect_at(const Potential& potential, const UnitsConfig& units, int n, double energy,
                              const GridSpec& grid, const FamilyOptions& options = {});

struct SweepRow {
    double hbar = 0.0;
    int n = 0;
    double energy = 0.0;
    double sup_momentum_gap = 0.0;   // sup |X' - p_C|
    double sup_imag_momentum = 0.0;  // sup |Y'|
    double identity_residual = 0.0;  // sup |Y'_fd - (hbar/2) X''/X'|
};

// Fixed classical energy E* = E_n at hbar_list[0]. For every hbar the level
// nearest E* is solved with the smooth member (ties go to the lower n) and the
// suprema are taken over the middle `interior` fraction of [x_left, x_right].
// Rows run concurrently.
std::vector<SweepRow> classical_limit_sweep(const Potential& potential, const UnitsConfig& units, int n,
                                            std::span<const double> hbar_list, std::size_t count = 2001,
                                            double interior = 0.8);

// Level index whose energy at `units.hbar` lies nearest `target`.
int nearest_level(const Potential& potential, const UnitsConfig& units, double target);

}  // namespace qhj
