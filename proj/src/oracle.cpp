#include "qhj/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "qhj/errors.hpp"
#include "qhj/numerics.hpp"

namespace qhj {

namespace {

constexpr double overflow = 1e150;

// Numerov recursion y'' = f y from nodes (a, a+d) onward to `stop`, d = +-1.
void sweep(std::vector<double>& y, const std::vector<double>& f, double h2, std::ptrdiff_t a, std::ptrdiff_t d,
           std::ptrdiff_t stop) {
    auto c = [&](std::ptrdiff_t i) { return 1.0 - h2 * f[static_cast<std::size_t>(i)] / 12.0; };
    auto at = [&](std::ptrdiff_t i) -> double& { return y[static_cast<std::size_t>(i)]; };
    for (std::ptrdiff_t i = a + d; i != stop; i += d) {
        const double next = (2.0 * (1.0 + 5.0 * h2 * f[static_cast<std::size_t>(i)] / 12.0) * at(i) - c(i - d) * at(i - d)) /
                            c(i + d);
        at(i + d) = next;
        if (std::abs(next) > overflow) {
            for (std::ptrdiff_t j = a; j != i + 2 * d; j += d) at(j) /= overflow;
        }
    }
}

}  // namespace

OracleSolution numerov_solve(const Potential& potential, const UnitsConfig& units, double energy,
                             std::span<const double> grid) {
    units.validate();
    const std::size_t n = grid.size();
    if (n < 7) throw ArgumentError("numerov_solve: grid needs at least 7 nodes");
    const double h = (grid.back() - grid.front()) / static_cast<double>(n - 1);
    if (!(h > 0.0)) throw ArgumentError("numerov_solve: grid must be increasing");
    for (std::size_t i = 1; i < n; ++i)
        if (std::abs(grid[i] - grid[i - 1] - h) > 1e-8 * h) throw ArgumentError("numerov_solve: grid must be uniform");

    const auto tp = turning_points(potential, energy);
    if (!(grid.front() < tp.left && tp.right < grid.back()))
        throw DomainError("numerov_solve: grid must enclose both turning points");

    const double h2 = h * h;
    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i)
        f[i] = 2.0 * units.mass * (potential.value(grid[i]) - energy) / (units.hbar * units.hbar);

    // WKB tails: psi ~ f^{-1/4} exp(-int sqrt f) outward
    auto kappa = [&](std::size_t i) { return std::sqrt(std::max(f[i], 0.0)); };
    auto tail_ratio = [&](std::size_t inner, std::size_t outer) {
        const double ki = kappa(inner);
        const double ko = kappa(outer);
        if (ki <= 0.0 || ko <= 0.0) return 1.0;
        return std::sqrt(std::sqrt(ko / ki)) * std::exp(0.5 * (ki + ko) * h);
    };

    // match node: largest |psi| of the left sweep within the middle third of the allowed region
    const double third = (tp.right - tp.left) / 3.0;
    std::size_t lo = static_cast<std::size_t>(std::lower_bound(grid.begin(), grid.end(), tp.left + third) - grid.begin());
    std::size_t hi = static_cast<std::size_t>(std::lower_bound(grid.begin(), grid.end(), tp.right - third) - grid.begin());
    lo = std::clamp<std::size_t>(lo, 2, n - 3);
    hi = std::clamp<std::size_t>(hi, lo, n - 3);

    std::vector<double> yl(n, 0.0);
    yl[0] = 1.0;
    yl[1] = tail_ratio(1, 0);
    sweep(yl, f, h2, 0, 1, static_cast<std::ptrdiff_t>(n - 1));
    std::size_t m = lo;
    double best = 0.0;
    for (std::size_t i = lo; i <= hi; ++i)
        if (std::abs(yl[i]) > best) {
            best = std::abs(yl[i]);
            m = i;
        }

    std::vector<double> yr(n, 0.0);
    yr[n - 1] = 1.0;
    yr[n - 2] = tail_ratio(n - 2, n - 1);
    sweep(yr, f, h2, static_cast<std::ptrdiff_t>(n - 1), -1, 0);

    auto slope = [&](const std::vector<double>& y) {
        return ((1.0 - h2 * f[m + 1] / 6.0) * y[m + 1] - (1.0 - h2 * f[m - 1] / 6.0) * y[m - 1]) / (2.0 * h);
    };
    OracleSolution out;
    out.energy = energy;
    out.match_index = m;
    out.jump = slope(yl) / yl[m] - slope(yr) / yr[m];
    out.tail_mismatch = std::abs(out.jump);

    const double c = yl[m] / yr[m];
    out.grid.assign(grid.begin(), grid.end());
    out.psi.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.psi[i] = i <= m ? yl[i] : c * yr[i];
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) sq[i] = out.psi[i] * out.psi[i];
    const double norm = std::sqrt(simpson(out.grid, sq));
    const double sign = c < 0.0 ? -1.0 : 1.0;
    for (auto& v : out.psi) v *= sign / norm;
    return out;
}

}  // namespace qhj
