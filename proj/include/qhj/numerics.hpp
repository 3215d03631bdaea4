#pragma once

// Small numerical toolkit shared by the solvers: grids, quadrature,
// finite-difference stencils, local interpolation and a fixed-step RK4
// driver with step-doubling control.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "qhj/errors.hpp"

namespace qhj {

// Switches GSL's abort-on-error handler off (once per process); the library
// checks return values itself.
void quiet_gsl();

struct GridSpec {
    double x_min = -6.0;
    double x_max = 6.0;
    std::size_t count = 2001;

    std::vector<double> nodes() const;
    double spacing() const { return (x_max - x_min) / static_cast<double>(count - 1); }
};

std::vector<double> linspace(double a, double b, std::size_t n);

// A uniform grid whose two nodes nearest to `left` and `right` have been moved
// onto those abscissae exactly.
struct SnappedGrid {
    std::vector<double> x;
    std::size_t left = 0;
    std::size_t right = 0;
};

SnappedGrid snap_grid(std::span<const double> uniform, double left, double right);

// Composite Simpson rule on an arbitrary increasing grid. Pairs of intervals
// use the exact integral of the interpolating parabola; an odd trailing
// interval is handled with the three-point end correction.
double simpson(std::span<const double> x, std::span<const double> f);

// Running integral F(x_i) = int_{x_0}^{x_i} f, fourth order, each interval
// integrated with the cubic through the four nearest nodes.
std::vector<double> cumulative_integral(std::span<const double> x, std::span<const double> f);

// Finite-difference weights for the m-th derivative at z from the nodes xs
// (Fornberg's recursion). Returns weights for derivative order m only.
std::vector<double> fd_weights(double z, std::span<const double> xs, int m);

// Derivative of order m at node i using the `width` nodes centred on i
// (shifted inward at the ends).
double stencil_derivative(std::span<const double> x, std::span<const double> f, std::size_t i,
                          int m = 1, std::size_t width = 5);

std::vector<double> stencil_derivative(std::span<const double> x, std::span<const double> f,
                                       int m = 1, std::size_t width = 5);

// Polynomial through (xs, ys) evaluated at x (barycentric form).
double lagrange_eval(std::span<const double> xs, std::span<const double> ys, double x);

// Index window [lo, lo+width) of `x` centred as nearly as possible on t.
std::size_t window_start(std::span<const double> x, double t, std::size_t width);

// Nodes and weights of n-point Gauss-Legendre on [a, b].
void gauss_legendre(std::size_t n, double a, double b, std::vector<double>& nodes,
                    std::vector<double>& weights);

// Root of f inside [lo, hi] (f(lo) and f(hi) of opposite sign) by GSL's
// bracketing solvers; `bisection` selects plain bisection, otherwise Brent.
double bracketed_root(double (*f)(double, void*), void* params, double lo, double hi, double tol,
                      bool bisection = false);

template <class F>
double bracketed_root(F& f, double lo, double hi, double tol, bool bisection = false) {
    return bracketed_root([](double x, void* p) { return (*static_cast<F*>(p))(x); }, &f, lo, hi, tol,
                          bisection);
}

template <std::size_t N>
using State = std::array<double, N>;

template <std::size_t N, class Rhs>
State<N> rk4_step(Rhs& rhs, double x, const State<N>& y, double h) {
    auto axpy = [](const State<N>& a, double s, const State<N>& b) {
        State<N> r;
        for (std::size_t i = 0; i < N; ++i) r[i] = a[i] + s * b[i];
        return r;
    };
    const State<N> k1 = rhs(x, y);
    const State<N> k2 = rhs(x + 0.5 * h, axpy(y, 0.5 * h, k1));
    const State<N> k3 = rhs(x + 0.5 * h, axpy(y, 0.5 * h, k2));
    const State<N> k4 = rhs(x + h, axpy(y, h, k3));
    State<N> out;
    for (std::size_t i = 0; i < N; ++i)
        out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

// Classical RK4 along the grid nodes starting from node `start`, marching in
// both directions until both ends are reached. Each grid interval is split
// into `substeps` equal RK4 steps.
template <std::size_t N, class Rhs>
std::vector<State<N>> rk4_on_grid(std::span<const double> grid, std::size_t start,
                                  const State<N>& y0, Rhs& rhs, int substeps) {
    std::vector<State<N>> out(grid.size());
    out[start] = y0;
    for (std::size_t i = start; i + 1 < grid.size(); ++i) {
        State<N> y = out[i];
        const double h = (grid[i + 1] - grid[i]) / substeps;
        for (int k = 0; k < substeps; ++k) y = rk4_step<N>(rhs, grid[i] + k * h, y, h);
        out[i + 1] = y;
    }
    for (std::size_t i = start; i > 0; --i) {
        State<N> y = out[i];
        const double h = (grid[i - 1] - grid[i]) / substeps;
        for (int k = 0; k < substeps; ++k) y = rk4_step<N>(rhs, grid[i] + k * h, y, h);
        out[i - 1] = y;
    }
    return out;
}

template <std::size_t N>
struct Rk4Result {
    std::vector<State<N>> values;
    int substeps = 1;
    double richardson_gap = 0.0;  // scaled max difference to the half-step run
};

// Runs rk4_on_grid with 1, 2, 4, ... substeps until two successive runs agree
// to `tol` (component-wise, scaled by max(1, max|y_c|)), at most
// `max_doublings` times. Returns the Richardson extrapolation of the last pair.
template <std::size_t N, class Rhs>
Rk4Result<N> rk4_controlled(std::span<const double> grid, std::size_t start, const State<N>& y0,
                            Rhs& rhs, double tol = 1e-8, int max_doublings = 3) {
    auto gap = [](const std::vector<State<N>>& a, const std::vector<State<N>>& b) {
        double worst = 0.0;
        for (std::size_t c = 0; c < N; ++c) {
            double scale = 1.0;
            for (const auto& s : b) scale = std::max(scale, std::abs(s[c]));
            for (std::size_t i = 0; i < a.size(); ++i)
                worst = std::max(worst, std::abs(a[i][c] - b[i][c]) / scale);
        }
        return worst;
    };
    Rk4Result<N> result;
    auto coarse = rk4_on_grid<N>(grid, start, y0, rhs, 1);
    if (max_doublings <= 0) {
        result.values = std::move(coarse);
        return result;
    }
    int substeps = 1;
    for (int d = 0; d < max_doublings; ++d) {
        auto fine = rk4_on_grid<N>(grid, start, y0, rhs, 2 * substeps);
        result.richardson_gap = gap(coarse, fine);
        result.substeps = 2 * substeps;
        if (result.richardson_gap <= tol || d + 1 == max_doublings) {
            // one Richardson step on the last pair
            for (std::size_t i = 0; i < fine.size(); ++i)
                for (std::size_t c = 0; c < N; ++c) fine[i][c] += (fine[i][c] - coarse[i][c]) / 15.0;
            result.values = std::move(fine);
            break;
        }
        coarse = std::move(fine);
        substeps *= 2;
    }
    return result;
}

}  // namespace qhj
