#include "qhj/polar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <string>

#include "qhj/classical.hpp"
#include "qhj/errors.hpp"
#include "qhj/numerics.hpp"

namespace qhj {

namespace {

using cd = std::complex<double>;
constexpr cd I{0.0, 1.0};
constexpr double pi = std::numbers::pi;

std::size_t nearest_node(std::span<const double> grid, double x) {
    auto it = std::lower_bound(grid.begin(), grid.end(), x);
    std::size_t i = static_cast<std::size_t>(it - grid.begin());
    if (i == grid.size()) return i - 1;
    if (i > 0 && x - grid[i - 1] < grid[i] - x) --i;
    return i;
}

void check_grid(std::span<const double> grid) {
    if (grid.size() < 8) throw ArgumentError("QMF grid needs at least 8 nodes");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw ArgumentError("QMF grid must be strictly increasing");
}

// r(d) = d (p(x0+d) - p(x0-d)) / 2 tends to the residue as d -> 0; one
// Richardson step removes the d^2 term.
cd residue_at(const std::function<cd(double)>& p, double x0, double d) {
    auto r = [&](double e) { return 0.5 * e * (p(x0 + e) - p(x0 - e)); };
    return (4.0 * r(d) - r(2.0 * d)) / 3.0;
}

// --- transfer-matrix stepper ---------------------------------------------------

struct Step {
    double m00, m01, m10, m11;
    double phase;  // rotation angle in the oscillatory case, 0 otherwise
};

// Fourth-order Magnus approximation of the transfer matrix of
// (psi, psi')' = [[0, 1], [q, 0]] (psi, psi') over [x, x+h], q = 2m(V-E)/hbar^2,
// from the two Gauss points.
class Stepper {
public:
    Stepper(Potential potential, UnitsConfig units, double energy)
        : potential_(std::move(potential)), units_(units), energy_(energy) {}

    double q(double x) const {
        return 2.0 * units_.mass * (potential_.value(x) - energy_) / (units_.hbar * units_.hbar);
    }

    Step transfer(double x, double h) const {
        const double g = std::sqrt(3.0) / 6.0;
        const double q1 = q(x + (0.5 - g) * h);
        const double q2 = q(x + (0.5 + g) * h);
        const double c = std::sqrt(3.0) / 12.0 * h * h * (q1 - q2);
        const double b = 0.5 * h * (q1 + q2);
        const double delta = c * c + h * b;
        double ch = 0.0;
        double sh = 0.0;
        double phase = 0.0;
        if (std::abs(delta) < 1e-8) {
            ch = 1.0 + delta / 2.0 + delta * delta / 24.0;
            sh = 1.0 + delta / 6.0 + delta * delta / 120.0;
        } else if (delta > 0.0) {
            const double r = std::sqrt(delta);
            ch = std::cosh(r);
            sh = std::sinh(r) / r;
        } else {
            const double r = std::sqrt(-delta);
            ch = std::cos(r);
            sh = std::sin(r) / r;
            phase = r;
        }
        return {ch + sh * c, sh * h, sh * b, ch - sh * c, phase};
    }

    std::pair<cd, cd> apply(double x, double h, cd u, cd v) const {
        const auto m = transfer(x, h);
        return {m.m00 * u + m.m01 * v, m.m10 * u + m.m11 * v};
    }

    const UnitsConfig& units() const { return units_; }
    const Potential& potential() const { return potential_; }
    double energy() const { return energy_; }

private:
    Potential potential_;
    UnitsConfig units_;
    double energy_;
};

// Node states (u, v) of psi-like solutions, v/u = psi'/psi; shared by the
// trace evaluator.
struct MoebiusStates {
    std::shared_ptr<const Stepper> stepper;
    std::vector<double> grid;
    std::vector<cd> u;
    std::vector<cd> v;

    cd p_at(double x) const {
        const std::size_t k = nearest_node(grid, x);
        auto [uu, vv] = stepper->apply(grid[k], x - grid[k], u[k], v[k]);
        return -I * stepper->units().hbar * vv / uu;
    }
};

// Carries (u, v) from node `from` to node `to` (inclusive) one grid step at a
// time, renormalizing every step and recording pole passages.
void march(const Stepper& st, std::span<const double> grid, std::vector<cd>& u, std::vector<cd>& v,
           std::vector<cd>& w, std::vector<PoleEstimate>& poles, std::size_t from, std::size_t to) {
    const double hbar = st.units().hbar;
    const std::ptrdiff_t d = to >= from ? 1 : -1;
    for (std::size_t k = from; k != to; k = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(k) + d)) {
        const std::size_t j = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(k) + d);
        const double h = grid[j] - grid[k];
        const auto m = st.transfer(grid[k], h);
        if (m.phase >= pi)
            throw RefinementError("step at x = " + std::to_string(grid[k]) +
                                  " too large to isolate poles; refine the grid");
        const cd un = m.m00 * u[k] + m.m01 * v[k];
        const cd vn = m.m10 * u[k] + m.m11 * v[k];
        const cd ratio = un / u[k];
        w[j] = w[k] - I * hbar * std::log(ratio);
        if (ratio.real() < 0.0 && std::abs(ratio.imag()) <= 1e-8 * std::abs(ratio)) {
            // sign change of u inside the step: refine the node on the sub-step map
            const cd uk = u[k];
            const cd vk = v[k];
            const double x0 = grid[k];
            const double sgn = h > 0.0 ? 1.0 : -1.0;
            auto g = [&](double tau) {
                const auto [ut, vt] = st.apply(x0, sgn * tau, uk, vk);
                (void)vt;
                return (ut * std::conj(uk)).real() / std::norm(uk);
            };
            const double tau = bracketed_root(g, 0.0, std::abs(h), 1e-15 * std::max(1.0, std::abs(x0)));
            poles.push_back({x0 + sgn * tau, {}, true});
        }
        const double s = std::max(std::abs(un), std::abs(vn));
        u[j] = un / s;
        v[j] = vn / s;
    }
}

QmfTrace finish_trace(std::shared_ptr<MoebiusStates> states, std::vector<cd> w, std::vector<PoleEstimate> poles) {
    QmfTrace t;
    t.hbar = states->stepper->units().hbar;
    t.grid = states->grid;
    const std::size_t n = t.grid.size();
    t.p_l.resize(n);
    t.regular.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double mag = std::max(std::abs(states->u[i]), std::abs(states->v[i]));
        t.regular[i] = std::abs(states->u[i]) > 1e-10 * mag;
        t.p_l[i] = t.regular[i] ? -I * t.hbar * states->v[i] / states->u[i]
                                : cd{std::numeric_limits<double>::quiet_NaN(), 0.0};
    }
    t.w_l = std::move(w);
    t.evaluate = [states](double x) { return states->p_at(x); };
    std::sort(poles.begin(), poles.end(), [](const auto& a, const auto& b) { return a.x0 < b.x0; });
    for (auto& p : poles) {
        const std::size_t k = std::min(nearest_node(t.grid, p.x0), n - 2);
        const double d = t.grid[k + 1] - t.grid[k];
        p.residue = residue_at(t.evaluate, p.x0, d);
    }
    t.poles = std::move(poles);
    return t;
}

double wkb_slope(const Stepper& st, double x, double lead_sign) {
    const double q = st.q(x);
    if (!(q > 0.0)) throw DomainError("trajectory must start in a classically forbidden region");
    const double k = std::sqrt(q);
    const auto& u = st.units();
    const double dk = u.mass * st.potential().derivative(x) / (u.hbar * u.hbar * k);
    return lead_sign * k - dk / (2.0 * k);
}

}  // namespace

// --- sampled QMF -----------------------------------------------------------------

QmfTrace qmf_from_wavefunction(std::span<const double> psi, std::span<const double> dpsi,
                               const UnitsConfig& units, std::span<const double> grid,
                               const SampledQmfOptions& options) {
    units.validate();
    const std::size_t n = grid.size();
    if (psi.size() != n || dpsi.size() != n) throw ArgumentError("psi, psi' and grid differ in length");
    check_grid(grid);
    const std::size_t width = std::clamp<std::size_t>(options.stencil, 2, n);
    const double hbar = units.hbar;

    struct Samples {
        std::vector<double> x, f, df;
        std::size_t width;
        double value(double t, const std::vector<double>& y) const {
            const std::size_t lo = window_start(x, t, width);
            return lagrange_eval(std::span(x).subspan(lo, width), std::span(y).subspan(lo, width), t);
        }
    };
    auto s = std::make_shared<Samples>(Samples{{grid.begin(), grid.end()}, {psi.begin(), psi.end()},
                                               {dpsi.begin(), dpsi.end()}, width});

    QmfTrace t;
    t.hbar = hbar;
    t.grid = s->x;
    t.p_l.resize(n);
    t.w_l.resize(n);
    t.regular.resize(n);
    double peak = 0.0;
    for (double v : psi) peak = std::max(peak, std::abs(v));
    const double nan = std::numeric_limits<double>::quiet_NaN();
    int flips = 0;
    std::size_t first = n;
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0 && psi[i] * psi[i - 1] < 0.0) ++flips;
        t.regular[i] = std::abs(psi[i]) > options.node_threshold * peak;
        if (!t.regular[i]) {
            t.p_l[i] = {nan, nan};
            t.w_l[i] = {nan, nan};
            continue;
        }
        if (first == n) first = i;
        t.p_l[i] = -I * hbar * dpsi[i] / psi[i];
        t.w_l[i] = -I * hbar * cd{std::log(std::abs(psi[i] / psi[first])), pi * flips};
    }
    t.evaluate = [s, hbar](double x) { return -I * hbar * s->value(x, s->df) / s->value(x, s->f); };

    for (std::size_t i = 0; i + 1 < n; ++i) {
        const bool at_node = psi[i] == 0.0;
        if (!(psi[i] * psi[i + 1] < 0.0) && !at_node) continue;
        PoleEstimate pe;
        if (at_node) {
            pe.x0 = grid[i];
        } else {
            auto f = [&](double x) { return s->value(x, s->f); };
            pe.x0 = bracketed_root(f, grid[i], grid[i + 1], 1e-15 * std::max(1.0, std::abs(grid[i])));
        }
        pe.refined = true;
        const double d = grid[i + 1] - grid[i];
        pe.residue = residue_at(t.evaluate, pe.x0, d);
        t.poles.push_back(pe);
    }
    return t;
}

// --- transfer-matrix integration -------------------------------------------------

QmfTrace moebius_integrate_qmf(const Potential& potential, const UnitsConfig& units, double energy,
                               double x_start, std::span<const double> grid, const MoebiusOptions& options) {
    units.validate();
    check_grid(grid);
    if (!(x_start >= grid.front() && x_start <= grid.back()))
        throw ArgumentError("x_start must lie inside the grid");
    if (!(potential.value(x_start) > energy)) throw DomainError("x_start must lie in a classically forbidden region");
    const cd p0 = options.p_start.value_or(classical_momentum(potential, units, energy, x_start));

    auto st = std::make_shared<Stepper>(potential, units, energy);
    auto states = std::make_shared<MoebiusStates>();
    states->stepper = st;
    states->grid.assign(grid.begin(), grid.end());
    const std::size_t n = grid.size();
    states->u.assign(n, 0.0);
    states->v.assign(n, 0.0);
    std::vector<cd> w(n, 0.0);
    std::vector<PoleEstimate> poles;

    const std::size_t k0 = nearest_node(grid, x_start);
    {
        const cd v0 = I * p0 / units.hbar;
        auto [uu, vv] = st->apply(x_start, grid[k0] - x_start, cd{1.0, 0.0}, v0);
        w[k0] = -I * units.hbar * std::log(uu);
        const double s = std::max(std::abs(uu), std::abs(vv));
        states->u[k0] = uu / s;
        states->v[k0] = vv / s;
    }
    march(*st, grid, states->u, states->v, w, poles, k0, n - 1);
    march(*st, grid, states->u, states->v, w, poles, k0, 0);
    return finish_trace(std::move(states), std::move(w), std::move(poles));
}

QmfTrace moebius_integrate_qmf_two_sided(const Potential& potential, const UnitsConfig& units, double energy,
                                         std::span<const double> grid) {
    units.validate();
    check_grid(grid);
    const std::size_t n = grid.size();
    const auto tp = turning_points(potential, energy);
    if (!(grid.front() < tp.left && tp.right < grid.back()))
        throw DomainError("grid must enclose both turning points");

    auto st = std::make_shared<Stepper>(potential, units, energy);
    auto states = std::make_shared<MoebiusStates>();
    states->stepper = st;
    states->grid.assign(grid.begin(), grid.end());
    std::vector<cd> ul(n, 0.0), vl(n, 0.0), wl(n, 0.0);
    std::vector<cd> ur(n, 0.0), vr(n, 0.0), wr(n, 0.0);
    std::vector<PoleEstimate> left_poles, right_poles;

    const std::size_t ir = std::min(n - 1, nearest_node(grid, tp.right) + 1);
    ul[0] = 1.0;
    vl[0] = wkb_slope(*st, grid.front(), 1.0);
    march(*st, grid, ul, vl, wl, left_poles, 0, ir);

    // join where the left trajectory is farthest from a node: smallest |psi'/psi|
    const double third = (tp.right - tp.left) / 3.0;
    std::size_t m = nearest_node(grid, 0.5 * (tp.left + tp.right));
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i <= ir; ++i) {
        if (grid[i] < tp.left + third || grid[i] > tp.right - third) continue;
        const double r = std::abs(vl[i] / ul[i]);
        if (r < best) {
            best = r;
            m = i;
        }
    }

    ur[n - 1] = 1.0;
    vr[n - 1] = wkb_slope(*st, grid.back(), -1.0);
    march(*st, grid, ur, vr, wr, right_poles, n - 1, m);

    states->u.resize(n);
    states->v.resize(n);
    std::vector<cd> w(n);
    const cd shift = wl[m] - wr[m];
    for (std::size_t i = 0; i < n; ++i) {
        const bool left = i <= m;
        states->u[i] = left ? ul[i] : ur[i];
        states->v[i] = left ? vl[i] : vr[i];
        w[i] = left ? wl[i] : wr[i] + shift;
    }
    std::vector<PoleEstimate> poles;
    for (const auto& p : left_poles)
        if (p.x0 < grid[m]) poles.push_back(p);
    for (const auto& p : right_poles)
        if (p.x0 > grid[m]) poles.push_back(p);
    return finish_trace(std::move(states), std::move(w), std::move(poles));
}

std::complex<double> riccati_residual(const QmfTrace& trace, const Potential& potential, const UnitsConfig& units,
                                      double energy, std::size_t i) {
    const std::size_t n = trace.grid.size();
    if (i == 0 || i + 1 >= n) throw ArgumentError("riccati_residual needs an interior node");
    const double x = trace.grid[i];
    const double h = std::min(trace.grid[i + 1] - x, x - trace.grid[i - 1]) / 128.0;
    auto p = trace.evaluate;
    const cd pm = p(x);
    const cd dp = (p(x - 2.0 * h) - 8.0 * p(x - h) + 8.0 * p(x + h) - p(x + 2.0 * h)) / (12.0 * h);
    return pm * pm / (2.0 * units.mass) - I * units.hbar / (2.0 * units.mass) * dp - (energy - potential.value(x));
}

// --- antithetic reconstruction ---------------------------------------------------

ReconstructedWave reconstruct_psi_antithetic(const QmfTrace& trace, std::span<const double> node_estimates,
                                             const AntitheticOptions& options) {
    const auto& x = trace.grid;
    const std::size_t n = x.size();
    if (n < 8 || !trace.evaluate) throw ArgumentError("reconstruction needs a complete QMF trace");
    if (options.window_cells < 2 || !(options.disk_cells > 0.0) ||
        !(options.disk_cells < static_cast<double>(options.window_cells)))
        throw ArgumentError("window must be wider than the exclusion disk");
    const double hbar = trace.hbar;
    auto s = [&](double t) { return (I * trace.evaluate(t) / hbar).real(); };
    auto cell = [&](double t) {
        const std::size_t k = std::min(nearest_node(x, t), n - 2);
        return x[k + 1] - x[k];
    };

    // snap estimates onto detected poles
    std::vector<double> nodes;
    for (double e : node_estimates) {
        if (!(e >= x.front() && e <= x.back())) throw ArgumentError("node estimate outside the grid");
        const PoleEstimate* hit = nullptr;
        for (const auto& p : trace.poles)
            if (!hit || std::abs(p.x0 - e) < std::abs(hit->x0 - e)) hit = &p;
        if (!hit || std::abs(hit->x0 - e) > options.estimate_cells * cell(e))
            throw BadEstimateError("node estimate " + std::to_string(e) + " is not near a detected pole");
        nodes.push_back(hit->x0);
    }
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    for (const auto& p : trace.poles)
        if (std::none_of(nodes.begin(), nodes.end(), [&](double z) { return z == p.x0; }))
            throw BadEstimateError("pole at x = " + std::to_string(p.x0) + " has no node estimate");

    struct Window {
        double x0, d, disk;
    };
    std::vector<Window> windows;
    for (double z : nodes) {
        const double h = cell(z);
        Window w{z, h * static_cast<double>(options.window_cells), h * options.disk_cells};
        if (w.x0 - w.d < x.front() || w.x0 + w.d > x.back())
            throw ArgumentError("mirror window around x = " + std::to_string(z) + " leaves the grid");
        if (!windows.empty() && windows.back().x0 + windows.back().d > w.x0 - w.d)
            throw ArgumentError("mirror windows overlap; use a finer grid or a narrower window");
        windows.push_back(w);
    }

    std::vector<double> gx, gw;
    auto gauss = [&](auto&& f, double a, double b, std::size_t pts) {
        if (a == b) return 0.0;
        gauss_legendre(pts, a, b, gx, gw);
        double sum = 0.0;
        for (std::size_t k = 0; k < pts; ++k) sum += gw[k] * f(gx[k]);
        return sum;
    };
    const std::size_t qp = options.quadrature_points;
    auto plain = [&](double a, double b) { return gauss(s, a, b, 4); };

    std::vector<double> log_psi(n, 0.0);
    std::vector<double> sign(n, 1.0);
    std::vector<bool> zero(n, false);
    double current_sign = 1.0;
    std::size_t j = 0;
    for (const auto& w : windows) {
        const double wl = w.x0 - w.d;
        const double wr = w.x0 + w.d;
        while (x[j + 1] <= wl) {
            log_psi[j + 1] = log_psi[j] + plain(x[j], x[j + 1]);
            sign[j + 1] = current_sign;
            ++j;
        }
        const double l_left = log_psi[j] + plain(x[j], wl);
        auto g = [&](double t) { return s(w.x0 + t) + s(w.x0 - t); };
        auto rho = [&](double t) { return 0.5 * (s(w.x0 + t) - s(w.x0 - t)) - 1.0 / t; };
        // the disk |t| < disk contributes nothing under the local model -i hbar/(x - x0)
        const double l_right = l_left + gauss(g, w.disk, w.d, qp);
        const double mid = 0.5 * (l_left + l_right);
        const double before = current_sign;
        current_sign = -current_sign;
        std::size_t k = j + 1;
        for (; k < n && x[k] < wr; ++k) {
            const double t = std::abs(x[k] - w.x0);
            if (t == 0.0) {
                zero[k] = true;
                continue;
            }
            const double diff = t > w.disk ? gauss(g, w.disk, t, qp) : 0.0;
            const double m = mid - std::log(w.d / t) - gauss(rho, std::max(t, w.disk), w.d, qp);
            log_psi[k] = x[k] > w.x0 ? m + 0.5 * diff : m - 0.5 * diff;
            sign[k] = x[k] > w.x0 ? current_sign : before;
        }
        if (k == n) throw ArgumentError("mirror window reaches the end of the grid");
        log_psi[k] = l_right + plain(wr, x[k]);
        sign[k] = current_sign;
        j = k;
    }
    for (; j + 1 < n; ++j) {
        log_psi[j + 1] = log_psi[j] + plain(x[j], x[j + 1]);
        sign[j + 1] = current_sign;
    }

    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i)
        if (!zero[i]) top = std::max(top, log_psi[i]);
    ReconstructedWave out;
    out.grid = x;
    out.nodes = nodes;
    out.psi.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.psi[i] = zero[i] ? 0.0 : sign[i] * std::exp(log_psi[i] - top);
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) sq[i] = out.psi[i] * out.psi[i];
    double scale = 1.0 / std::sqrt(simpson(x, sq));
    double peak = 0.0;
    for (double v : out.psi) peak = std::max(peak, std::abs(v));
    for (std::size_t i = n; i-- > 0;)
        if (std::abs(out.psi[i]) > 1e-3 * peak) {
            if (out.psi[i] < 0.0) scale = -scale;
            break;
        }
    for (auto& v : out.psi) v *= scale;
    for (std::size_t i = 0; i < n; ++i) sq[i] = out.psi[i] * out.psi[i];
    out.norm = simpson(x, sq);
    return out;
}

}  // namespace qhj
