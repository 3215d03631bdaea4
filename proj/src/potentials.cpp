#include "qhj/potentials.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_gamma.h>
#include <gsl/gsl_sf_hermite.h>
#include <gsl/gsl_sf_laguerre.h>
#include <gsl/gsl_spline.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>
#include <string>

#include "qhj/errors.hpp"
#include "qhj/numerics.hpp"

namespace qhj {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

double bisect(auto f, double lo, double hi, double tol) { return bracketed_root(f, lo, hi, tol, true); }

}  // namespace

void UnitsConfig::validate() const {
    if (!(hbar > 0.0) || !std::isfinite(hbar)) throw ArgumentError("hbar must be positive");
    if (!(mass > 0.0) || !std::isfinite(mass)) throw ArgumentError("mass must be positive");
}

// --- Tabulated ---------------------------------------------------------------

struct Tabulated::Spline {
    std::unique_ptr<gsl_spline, decltype(&gsl_spline_free)> handle{nullptr, &gsl_spline_free};
};

Tabulated::Tabulated(std::vector<double> x, std::vector<double> v) : x_(std::move(x)), v_(std::move(v)) {
    quiet_gsl();
    if (x_.size() != v_.size()) throw ArgumentError("tabulated potential: x and V differ in length");
    if (x_.size() < 3) throw ArgumentError("tabulated potential needs at least 3 samples");
    for (std::size_t i = 1; i < x_.size(); ++i)
        if (!(x_[i] > x_[i - 1])) throw ArgumentError("tabulated potential: x must be strictly increasing");
    auto s = std::make_shared<Spline>();
    s->handle.reset(gsl_spline_alloc(gsl_interp_cspline, x_.size()));
    if (gsl_spline_init(s->handle.get(), x_.data(), v_.data(), x_.size()) != GSL_SUCCESS)
        throw ArgumentError("tabulated potential: spline construction failed");
    spline_ = std::move(s);
}

double Tabulated::value(double x) const {
    if (x < x_.front() || x > x_.back())
        throw RangeError("x = " + std::to_string(x) + " outside tabulated range");
    return gsl_spline_eval(spline_->handle.get(), x, nullptr);
}

double Tabulated::derivative(double x) const {
    if (x < x_.front() || x > x_.back())
        throw RangeError("x = " + std::to_string(x) + " outside tabulated range");
    return gsl_spline_eval_deriv(spline_->handle.get(), x, nullptr);
}

// --- Potential ---------------------------------------------------------------

Potential::Potential(Model model) : model_(std::move(model)) {
    std::visit(overloaded{
                   [](const Harmonic& h) {
                       if (!(h.omega > 0.0) || !(h.mass > 0.0))
                           throw ArgumentError("harmonic: omega and mass must be positive");
                   },
                   [](const Morse& m) {
                       if (!(m.depth > 0.0) || !(m.range > 0.0))
                           throw ArgumentError("morse: D and a must be positive");
                   },
                   [](const Tabulated&) {},
               },
               model_);
}

Potential Potential::harmonic(double omega, double mass) { return Potential(Harmonic{omega, mass}); }
Potential Potential::morse(double depth, double range) { return Potential(Morse{depth, range}); }
Potential Potential::tabulated(std::vector<double> x, std::vector<double> v) {
    return Potential(Tabulated(std::move(x), std::move(v)));
}

double Potential::value(double x) const {
    return std::visit(overloaded{
                          [x](const Harmonic& h) { return 0.5 * h.mass * h.omega * h.omega * x * x; },
                          [x](const Morse& m) {
                              const double e = 1.0 - std::exp(-m.range * x);
                              return m.depth * e * e;
                          },
                          [x](const Tabulated& t) { return t.value(x); },
                      },
                      model_);
}

double Potential::derivative(double x) const {
    return std::visit(overloaded{
                          [x](const Harmonic& h) { return h.mass * h.omega * h.omega * x; },
                          [x](const Morse& m) {
                              const double q = std::exp(-m.range * x);
                              return 2.0 * m.depth * m.range * (1.0 - q) * q;
                          },
                          [x](const Tabulated& t) { return t.derivative(x); },
                      },
                      model_);
}

PotentialKind Potential::kind() const {
    return static_cast<PotentialKind>(model_.index());
}

std::pair<double, double> Potential::domain() const {
    if (const auto* t = std::get_if<Tabulated>(&model_)) return {t->x().front(), t->x().back()};
    const double inf = std::numeric_limits<double>::infinity();
    return {-inf, inf};
}

double Potential::minimum_location() const {
    const auto* t = std::get_if<Tabulated>(&model_);
    if (!t) return 0.0;
    const auto& v = t->v();
    const std::size_t i = static_cast<std::size_t>(std::min_element(v.begin(), v.end()) - v.begin());
    if (i == 0 || i + 1 == v.size()) return t->x()[i];
    // refine on the spline: the minimum lies in (x[i-1], x[i+1])
    double lo = t->x()[i - 1];
    double hi = t->x()[i + 1];
    if (t->derivative(lo) < 0.0 && t->derivative(hi) > 0.0)
        return bisect([t](double z) { return t->derivative(z); }, lo, hi, 1e-13);
    return t->x()[i];
}

double Potential::minimum_value() const { return value(minimum_location()); }

// --- file format -------------------------------------------------------------

Potential read_tabulated(std::istream& in) {
    std::vector<double> x;
    std::vector<double> v;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream fields(line);
        double a = 0.0;
        double b = 0.0;
        if (!(fields >> a)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            throw ArgumentError("tabulated potential: unreadable line " + std::to_string(lineno));
        }
        if (!(fields >> b))
            throw ArgumentError("tabulated potential: missing V on line " + std::to_string(lineno));
        x.push_back(a);
        v.push_back(b);
    }
    return Potential::tabulated(std::move(x), std::move(v));
}

Potential load_tabulated(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ArgumentError("cannot open potential table " + path.string());
    return read_tabulated(in);
}

// --- spectra -----------------------------------------------------------------

int morse_bound_state_count(const Morse& morse, const UnitsConfig& units) {
    units.validate();
    const double lambda = std::sqrt(2.0 * units.mass * morse.depth) / (morse.range * units.hbar);
    // bound iff n < lambda - 1/2
    const double top = lambda - 0.5;
    if (top <= 0.0) return 0;
    return static_cast<int>(std::ceil(top));
}

EnergyLevel eigenenergy(const Potential& potential, const UnitsConfig& units, int n) {
    units.validate();
    if (n < 0) throw ArgumentError("quantum number must be non-negative");
    return std::visit(
        overloaded{
            [&](const Harmonic& h) { return EnergyLevel{n, units.hbar * h.omega * (n + 0.5)}; },
            [&](const Morse& m) {
                const int count = morse_bound_state_count(m, units);
                if (n >= count)
                    throw UnboundStateError("Morse well holds " + std::to_string(count) +
                                            " bound states; n = " + std::to_string(n) + " is unbound");
                const double k = n + 0.5;
                const double e = units.hbar * m.range * std::sqrt(2.0 * m.depth / units.mass) * k -
                                 units.hbar * units.hbar * m.range * m.range * k * k / (2.0 * units.mass);
                return EnergyLevel{n, e};
            },
            [&](const Tabulated&) -> EnergyLevel {
                throw UnsupportedError("no analytic spectrum for a tabulated potential; supply the energy");
            },
        },
        potential.model());
}

TurningPoints turning_points(const Potential& potential, double energy) {
    return std::visit(
        overloaded{
            [&](const Harmonic& h) {
                if (!(energy > 0.0)) throw DomainError("energy at or below the harmonic minimum");
                const double xt = std::sqrt(2.0 * energy / (h.mass * h.omega * h.omega));
                return TurningPoints{-xt, xt};
            },
            [&](const Morse& m) {
                if (!(energy > 0.0) || !(energy < m.depth))
                    throw DomainError("Morse energy must lie in (0, D) for a bound region");
                const double r = std::sqrt(energy / m.depth);
                return TurningPoints{-std::log1p(r) / m.range, -std::log1p(-r) / m.range};
            },
            [&](const Tabulated& t) {
                const double x0 = potential.minimum_location();
                if (!(potential.value(x0) < energy)) throw DomainError("energy below the tabulated minimum");
                const auto& xs = t.x();
                auto f = [&](double z) { return t.value(z) - energy; };
                double left = std::numeric_limits<double>::quiet_NaN();
                double inner = x0;
                for (std::size_t i = xs.size(); i-- > 0;) {
                    if (xs[i] >= x0) continue;
                    if (f(xs[i]) >= 0.0) {
                        left = bisect(f, xs[i], inner, 1e-12);
                        break;
                    }
                    inner = xs[i];
                }
                double right = std::numeric_limits<double>::quiet_NaN();
                inner = x0;
                for (std::size_t i = 0; i < xs.size(); ++i) {
                    if (xs[i] <= x0) continue;
                    if (f(xs[i]) >= 0.0) {
                        right = bisect(f, inner, xs[i], 1e-12);
                        break;
                    }
                    inner = xs[i];
                }
                if (std::isnan(left) || std::isnan(right))
                    throw DomainError("no classically allowed interval enclosed by the table");
                return TurningPoints{left, right};
            },
        },
        potential.model());
}

double analytic_eigenfunction(const Potential& potential, const UnitsConfig& units, int n, double x) {
    units.validate();
    quiet_gsl();
    if (n < 0) throw ArgumentError("quantum number must be non-negative");
    return std::visit(
        overloaded{
            [&](const Harmonic& h) {
                const double scale = std::sqrt(h.mass * h.omega / units.hbar);
                return std::sqrt(scale) * gsl_sf_hermite_func(n, scale * x);
            },
            [&](const Morse& m) {
                const int count = morse_bound_state_count(m, units);
                if (n >= count) throw UnboundStateError("Morse state n = " + std::to_string(n) + " is unbound");
                const double lambda = std::sqrt(2.0 * units.mass * m.depth) / (m.range * units.hbar);
                const double alpha = 2.0 * lambda - 2.0 * n - 1.0;
                const double z = 2.0 * lambda * std::exp(-m.range * x);
                const double log_norm = 0.5 * (std::log(m.range * alpha) + gsl_sf_lngamma(n + 1.0) -
                                               gsl_sf_lngamma(2.0 * lambda - n));
                const double log_env = (lambda - n - 0.5) * std::log(z) - 0.5 * z;
                return std::exp(log_norm + log_env) * gsl_sf_laguerre_n(n, alpha, z);
            },
            [&](const Tabulated&) -> double {
                throw UnsupportedError("no analytic eigenfunction for a tabulated potential");
            },
        },
        potential.model());
}

}  // namespace qhj
