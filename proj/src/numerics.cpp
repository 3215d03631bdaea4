#include "qhj/numerics.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>
#include <gsl/gsl_roots.h>

#include <memory>
#include <mutex>
#include <string>

namespace qhj {

void quiet_gsl() {
    static std::once_flag flag;
    std::call_once(flag, [] { gsl_set_error_handler_off(); });
}

std::vector<double> linspace(double a, double b, std::size_t n) {
    if (n < 2) throw ArgumentError("linspace needs at least two points");
    std::vector<double> x(n);
    const double h = (b - a) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) x[i] = a + h * static_cast<double>(i);
    x.back() = b;
    return x;
}

std::vector<double> GridSpec::nodes() const { return linspace(x_min, x_max, count); }

SnappedGrid snap_grid(std::span<const double> uniform, double left, double right) {
    if (uniform.size() < 5) throw ArgumentError("grid too small to snap");
    if (!(uniform.front() < left && left < right && right < uniform.back()))
        throw DomainError("turning points must lie strictly inside the grid box");
    auto nearest = [&](double t) {
        auto it = std::lower_bound(uniform.begin(), uniform.end(), t);
        std::size_t i = static_cast<std::size_t>(it - uniform.begin());
        if (i > 0 && (i == uniform.size() || t - uniform[i - 1] < uniform[i] - t)) --i;
        return i;
    };
    SnappedGrid g;
    g.x.assign(uniform.begin(), uniform.end());
    g.left = nearest(left);
    g.right = nearest(right);
    if (g.left == 0) g.left = 1;
    if (g.right == g.x.size() - 1) g.right = g.x.size() - 2;
    if (g.right < g.left + 2) throw DomainError("grid too coarse to resolve the allowed region");
    g.x[g.left] = left;
    g.x[g.right] = right;
    return g;
}

double simpson(std::span<const double> x, std::span<const double> f) {
    const std::size_t n = x.size();
    if (n != f.size()) throw ArgumentError("simpson: size mismatch");
    if (n < 2) return 0.0;
    if (n == 2) return 0.5 * (x[1] - x[0]) * (f[0] + f[1]);
    double sum = 0.0;
    std::size_t i = 0;
    for (; i + 2 < n; i += 2) {
        const double h0 = x[i + 1] - x[i];
        const double h1 = x[i + 2] - x[i + 1];
        const double hs = h0 + h1;
        sum += hs / 6.0 *
               ((2.0 - h1 / h0) * f[i] + hs * hs / (h0 * h1) * f[i + 1] + (2.0 - h0 / h1) * f[i + 2]);
    }
    if (i + 1 < n) {
        // odd number of intervals: last one from the parabola through the final three nodes
        const double h0 = x[n - 2] - x[n - 3];
        const double h1 = x[n - 1] - x[n - 2];
        const double alpha = (2.0 * h1 * h1 + 3.0 * h0 * h1) / (6.0 * (h0 + h1));
        const double beta = (h1 * h1 + 3.0 * h0 * h1) / (6.0 * h0);
        const double eta = h1 * h1 * h1 / (6.0 * h0 * (h0 + h1));
        sum += alpha * f[n - 1] + beta * f[n - 2] - eta * f[n - 3];
    }
    return sum;
}

std::size_t window_start(std::span<const double> x, double t, std::size_t width) {
    if (x.size() <= width) return 0;
    auto it = std::lower_bound(x.begin(), x.end(), t);
    const auto i = static_cast<std::ptrdiff_t>(it - x.begin());
    std::ptrdiff_t lo = i - static_cast<std::ptrdiff_t>(width / 2);
    lo = std::clamp<std::ptrdiff_t>(lo, 0, static_cast<std::ptrdiff_t>(x.size() - width));
    return static_cast<std::size_t>(lo);
}

double lagrange_eval(std::span<const double> xs, std::span<const double> ys, double x) {
    const std::size_t n = xs.size();
    double num = 0.0;
    double den = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (x == xs[j]) return ys[j];
        double w = 1.0;
        for (std::size_t k = 0; k < n; ++k)
            if (k != j) w /= (xs[j] - xs[k]);
        const double t = w / (x - xs[j]);
        num += t * ys[j];
        den += t;
    }
    return num / den;
}

std::vector<double> cumulative_integral(std::span<const double> x, std::span<const double> f) {
    const std::size_t n = x.size();
    if (n != f.size()) throw ArgumentError("cumulative_integral: size mismatch");
    std::vector<double> out(n, 0.0);
    if (n < 2) return out;
    const std::size_t width = std::min<std::size_t>(4, n);
    const double g = 0.5 / std::sqrt(3.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        std::size_t lo = i == 0 ? 0 : i - 1;
        lo = std::min(lo, n - width);
        const auto xs = x.subspan(lo, width);
        const auto fs = f.subspan(lo, width);
        const double mid = 0.5 * (x[i] + x[i + 1]);
        const double h = x[i + 1] - x[i];
        // two-point Gauss is exact for the cubic
        const double q = 0.5 * h * (lagrange_eval(xs, fs, mid - g * h) + lagrange_eval(xs, fs, mid + g * h));
        out[i + 1] = out[i] + q;
    }
    return out;
}

std::vector<double> fd_weights(double z, std::span<const double> xs, int m) {
    const std::size_t n = xs.size();
    if (static_cast<std::size_t>(m) >= n) throw ArgumentError("fd_weights: stencil too small");
    const std::size_t cols = static_cast<std::size_t>(m) + 1;
    std::vector<double> c(n * cols, 0.0);
    auto at = [&](std::size_t i, std::size_t k) -> double& { return c[i * cols + k]; };
    double c1 = 1.0;
    double c4 = xs[0] - z;
    at(0, 0) = 1.0;
    for (std::size_t i = 1; i < n; ++i) {
        const std::size_t mn = std::min<std::size_t>(i, static_cast<std::size_t>(m));
        double c2 = 1.0;
        const double c5 = c4;
        c4 = xs[i] - z;
        for (std::size_t j = 0; j < i; ++j) {
            const double c3 = xs[i] - xs[j];
            c2 *= c3;
            if (j == i - 1) {
                for (std::size_t k = mn; k >= 1; --k)
                    at(i, k) = c1 * (static_cast<double>(k) * at(i - 1, k - 1) - c5 * at(i - 1, k)) / c2;
                at(i, 0) = -c1 * c5 * at(i - 1, 0) / c2;
            }
            for (std::size_t k = mn; k >= 1; --k)
                at(j, k) = (c4 * at(j, k) - static_cast<double>(k) * at(j, k - 1)) / c3;
            at(j, 0) = c4 * at(j, 0) / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = at(i, static_cast<std::size_t>(m));
    return w;
}

double stencil_derivative(std::span<const double> x, std::span<const double> f, std::size_t i, int m,
                          std::size_t width) {
    const std::size_t n = x.size();
    if (n != f.size()) throw ArgumentError("stencil_derivative: size mismatch");
    if (n < width) throw ArgumentError("stencil_derivative: grid smaller than stencil");
    std::size_t lo = i >= width / 2 ? i - width / 2 : 0;
    lo = std::min(lo, n - width);
    const auto w = fd_weights(x[i], x.subspan(lo, width), m);
    double d = 0.0;
    for (std::size_t k = 0; k < width; ++k) d += w[k] * f[lo + k];
    return d;
}

std::vector<double> stencil_derivative(std::span<const double> x, std::span<const double> f, int m,
                                       std::size_t width) {
    std::vector<double> d(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) d[i] = stencil_derivative(x, f, i, m, width);
    return d;
}

void gauss_legendre(std::size_t n, double a, double b, std::vector<double>& nodes,
                    std::vector<double>& weights) {
    quiet_gsl();
    std::unique_ptr<gsl_integration_glfixed_table, decltype(&gsl_integration_glfixed_table_free)> table(
        gsl_integration_glfixed_table_alloc(n), &gsl_integration_glfixed_table_free);
    if (!table) throw ArgumentError("gauss_legendre: cannot build table of size " + std::to_string(n));
    nodes.resize(n);
    weights.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        gsl_integration_glfixed_point(a, b, i, &nodes[i], &weights[i], table.get());
}

double bracketed_root(double (*f)(double, void*), void* params, double lo, double hi, double tol,
                      bool bisection) {
    quiet_gsl();
    gsl_function fn;
    fn.function = f;
    fn.params = params;
    const double flo = f(lo, params);
    const double fhi = f(hi, params);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0)) throw ArgumentError("bracketed_root: interval does not bracket a root");
    std::unique_ptr<gsl_root_fsolver, decltype(&gsl_root_fsolver_free)> solver(
        gsl_root_fsolver_alloc(bisection ? gsl_root_fsolver_bisection : gsl_root_fsolver_brent),
        &gsl_root_fsolver_free);
    gsl_root_fsolver_set(solver.get(), &fn, lo, hi);
    for (int it = 0; it < 300; ++it) {
        gsl_root_fsolver_iterate(solver.get());
        const double a = gsl_root_fsolver_x_lower(solver.get());
        const double b = gsl_root_fsolver_x_upper(solver.get());
        if (gsl_root_test_interval(a, b, tol, 0.0) == GSL_SUCCESS) break;
    }
    return gsl_root_fsolver_root(solver.get());
}

}  // namespace qhj
