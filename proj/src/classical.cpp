#include "qhj/classical.hpp"

#include <gsl/gsl_integration.h>

#include <cmath>
#include <memory>

#include "qhj/errors.hpp"
#include "qhj/numerics.hpp"

namespace qhj {

std::complex<double> classical_momentum(const Potential& potential, const UnitsConfig& units,
                                        double energy, double x) {
    const double k = 2.0 * units.mass * (energy - potential.value(x));
    if (k >= 0.0) return {std::sqrt(k), 0.0};
    return {0.0, std::sqrt(-k)};
}

namespace {

class Integrator {
public:
    Integrator() : ws_(gsl_integration_workspace_alloc(limit), &gsl_integration_workspace_free) {}

    template <class F>
    double operator()(F& f, double a, double b) {
        if (a == b) return 0.0;
        gsl_function g;
        g.function = [](double x, void* p) { return (*static_cast<F*>(p))(x); };
        g.params = &f;
        double result = 0.0;
        double error = 0.0;
        gsl_integration_qag(&g, a, b, 1e-14, 1e-12, limit, GSL_INTEG_GAUSS21, ws_.get(), &result, &error);
        return result;
    }

private:
    static constexpr std::size_t limit = 200;
    std::unique_ptr<gsl_integration_workspace, decltype(&gsl_integration_workspace_free)> ws_;
};

}  // namespace

ClassicalField classical_action(const Potential& potential, const UnitsConfig& units, double energy,
                                std::span<const double> grid) {
    units.validate();
    quiet_gsl();
    if (grid.size() < 2) throw ArgumentError("classical_action: grid needs at least two nodes");
    const auto tp = turning_points(potential, energy);
    const double tol = 1e-9 * std::max(1.0, tp.right - tp.left);
    if (grid.front() < tp.left - tol || grid.back() > tp.right + tol)
        throw DomainError("classical_action: grid leaves the classically allowed region");

    auto p = [&](double x) {
        const double k = 2.0 * units.mass * (energy - potential.value(x));
        return k > 0.0 ? std::sqrt(k) : 0.0;
    };
    // x = x_l + u^2 near the left turning point, x = x_r - u^2 near the right
    // one; both turn the square-root zero of p into a smooth integrand.
    auto from_left = [&](double u) { return 2.0 * u * p(tp.left + u * u); };
    auto from_right = [&](double u) { return 2.0 * u * p(tp.right - u * u); };
    const double mid = 0.5 * (tp.left + tp.right);

    Integrator integrate;
    auto piece = [&](double a, double b) {
        double sum = 0.0;
        if (a < mid) {
            const double hi = std::min(b, mid);
            sum += integrate(from_left, std::sqrt(std::max(0.0, a - tp.left)),
                             std::sqrt(std::max(0.0, hi - tp.left)));
        }
        if (b > mid) {
            const double lo = std::max(a, mid);
            sum += integrate(from_right, std::sqrt(std::max(0.0, tp.right - b)),
                             std::sqrt(std::max(0.0, tp.right - lo)));
        }
        return sum;
    };

    ClassicalField field;
    field.grid.assign(grid.begin(), grid.end());
    field.p_c.resize(grid.size());
    field.w0.resize(grid.size());
    field.w0[0] = piece(tp.left, grid[0]);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        field.p_c[i] = p(grid[i]);
        if (i > 0) field.w0[i] = field.w0[i - 1] + piece(grid[i - 1], grid[i]);
    }
    return field;
}

}  // namespace qhj
