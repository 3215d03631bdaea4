#include "qhj/milne.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>
#include <string>

#include "qhj/classical.hpp"
#include "qhj/errors.hpp"

namespace qhj {

namespace {

constexpr double pi = std::numbers::pi;

double kappa_sq(const Potential& potential, const UnitsConfig& units, double energy, double x) {
    return 2.0 * units.mass * (potential.value(x) - energy) / (units.hbar * units.hbar);
}

// psi'/psi of the decaying WKB solution, including the amplitude correction.
double wkb_log_derivative(const Potential& potential, const UnitsConfig& units, double energy, double x,
                          Side side) {
    const double k2 = kappa_sq(potential, units, energy, x);
    const double k = std::sqrt(std::max(k2, 0.0));
    if (k == 0.0) return 0.0;
    const double dk = units.mass * potential.derivative(x) / (units.hbar * units.hbar * k);
    const double lead = side == Side::left ? k : -k;
    return lead - dk / (2.0 * k);
}

double outer_limit(const Potential& potential, Side side, const std::optional<double>& box) {
    const auto [lo, hi] = potential.domain();
    if (side == Side::left) return std::max(lo, box.value_or(-std::numeric_limits<double>::infinity()));
    return std::min(hi, box.value_or(std::numeric_limits<double>::infinity()));
}

}  // namespace

// --- forbidden branches ------------------------------------------------------

std::vector<double> forbidden_grid(const Potential& potential, const UnitsConfig& units, double energy,
                                   Side side, const ForbiddenOptions& options) {
    units.validate();
    if (!(options.step > 0.0)) throw ArgumentError("forbidden grid step must be positive");
    const auto tp = turning_points(potential, energy);
    const double x_t = side == Side::left ? tp.left : tp.right;
    const double dir = side == Side::left ? -1.0 : 1.0;
    const double limit = outer_limit(potential, side, options.box);
    if (dir * (limit - x_t) <= 0.0) throw DomainError("turning point lies outside the grid box");

    std::vector<double> grid{x_t};
    double action = 0.0;
    double prev = 0.0;
    while (action < options.depth_action) {
        double x = grid.back() + dir * options.step;
        if (dir * (x - limit) >= 0.0) x = limit;
        const double k = std::sqrt(std::max(kappa_sq(potential, units, energy, x), 0.0));
        action += 0.5 * (prev + k) * std::abs(x - grid.back());
        prev = k;
        grid.push_back(x);
        if (x == limit) break;
        if (grid.size() > 50'000'000) throw DomainError("forbidden region never reaches the depth criterion");
    }
    return grid;
}

ForbiddenBranch solve_forbidden(const Potential& potential, const UnitsConfig& units, double energy,
                                Side side, std::span<const double> outward_grid,
                                const ForbiddenOptions& options) {
    units.validate();
    const std::size_t n = outward_grid.size();
    if (n < 2) throw DomainError("forbidden branch needs at least one node beyond the turning point");
    const double dir = side == Side::left ? -1.0 : 1.0;
    const double scale = std::max(1.0, std::abs(energy));
    for (std::size_t i = 1; i < n; ++i) {
        if (!(dir * (outward_grid[i] - outward_grid[i - 1]) > 0.0))
            throw ArgumentError("forbidden branch grid must run outward from the turning point");
        if (potential.value(outward_grid[i]) < energy - 1e-9 * scale)
            throw DomainError("forbidden branch grid enters a classically allowed region at x = " +
                              std::to_string(outward_grid[i]));
    }

    // distance from the turning point, and the WKB action along it
    std::vector<double> t(n);
    std::vector<double> k(n);
    for (std::size_t i = 0; i < n; ++i) {
        t[i] = std::abs(outward_grid[i] - outward_grid[0]);
        k[i] = std::sqrt(std::max(kappa_sq(potential, units, energy, outward_grid[i]), 0.0));
    }
    const auto action = cumulative_integral(t, k);
    std::size_t start = n - 1;
    for (std::size_t i = 1; i < n; ++i)
        if (action[i] >= options.depth_action) {
            start = i;
            break;
        }

    ForbiddenBranch branch;
    branch.side = side;
    branch.energy = energy;
    branch.grid.assign(outward_grid.begin(), outward_grid.end());
    branch.start_index = start;
    branch.s.resize(n);
    branch.y.resize(n);

    // inward Riccati sweep s' = -s^2 + kappa^2 on nodes 0..start; state (s, int s)
    auto rhs = [&](double x, const State<2>& y) {
        if (!std::isfinite(y[0]) || std::abs(y[0]) > options.blowup)
            throw StiffnessError("Riccati solution blew up in the forbidden region", x);
        return State<2>{-y[0] * y[0] + kappa_sq(potential, units, energy, x), y[0]};
    };
    const std::span<const double> inner(branch.grid.data(), start + 1);
    const State<2> y0{wkb_log_derivative(potential, units, energy, inner[start], side), 0.0};
    const auto run = rk4_controlled<2>(inner, start, y0, rhs, options.rk_tolerance, options.max_doublings);
    std::vector<double> z(n);
    for (std::size_t i = 0; i <= start; ++i) {
        branch.s[i] = run.values[i][0];
        z[i] = run.values[i][1];
    }
    // beyond the start node: WKB asymptote
    if (start + 1 < n) {
        std::vector<double> xs(branch.grid.begin() + static_cast<std::ptrdiff_t>(start), branch.grid.end());
        std::vector<double> ss(xs.size());
        for (std::size_t j = 0; j < xs.size(); ++j)
            ss[j] = wkb_log_derivative(potential, units, energy, xs[j], side);
        ss[0] = branch.s[start];
        // cumulative_integral wants increasing abscissae; integrate in t
        std::vector<double> ts(xs.size());
        for (std::size_t j = 0; j < xs.size(); ++j) ts[j] = std::abs(xs[j] - xs[0]);
        const auto tail = cumulative_integral(ts, ss);
        for (std::size_t j = 1; j < xs.size(); ++j) {
            branch.s[start + j] = ss[j];
            z[start + j] = z[start] + dir * tail[j];
        }
    }
    for (std::size_t i = 0; i < n; ++i) branch.y[i] = -units.hbar * (z[i] - z[0]);
    return branch;
}

ForbiddenBranch solve_forbidden(const Potential& potential, const UnitsConfig& units, double energy,
                                Side side, const ForbiddenOptions& options) {
    const auto grid = forbidden_grid(potential, units, energy, side, options);
    return solve_forbidden(potential, units, energy, side, grid, options);
}

// --- allowed region ----------------------------------------------------------

namespace {

struct MilneRun {
    std::vector<State<3>> values;  // (w, w', theta)
    int substeps = 1;
    double gap = 0.0;
};

MilneRun run_milne(const Potential& potential, const UnitsConfig& units, double energy,
                   std::span<const double> grid, std::size_t start, const State<3>& y0,
                   const AllowedOptions& options) {
    auto rhs = [&](double x, const State<3>& y) {
        const double w = y[0];
        if (!(w > 0.0) || !std::isfinite(w) || !std::isfinite(y[1]))
            throw FamilyDegeneracyError("Milne amplitude reached zero at x = " + std::to_string(x));
        const double k2 = -kappa_sq(potential, units, energy, x);
        const double inv2 = 1.0 / (w * w);
        return State<3>{y[1], -k2 * w + inv2 / w, inv2};
    };
    auto r = rk4_controlled<3>(grid, start, y0, rhs, options.rk_tolerance, options.max_doublings);
    return {std::move(r.values), r.substeps, r.richardson_gap};
}

// w(x_left)^2 of the member with the pi/4 phase at both turning points. The
// left-matched members are w^2 = a u^2 + 2 b u v + c v^2 with b = a sL - 1,
// ac - b^2 = 1, for the fundamental pair (u, v) at x_left; imposing
// w w' - 1 = sR w^2 at x_right leaves a quadratic in a.
double balanced_amplitude_sq(const MilneRun& trial, double sigma_l, double sigma_r) {
    const auto& l = trial.values.front();
    const auto& r = trial.values.back();
    auto frame = [](const State<3>& y) {
        const double w = y[0];
        const double sn = std::sin(y[2]);
        const double cs = std::cos(y[2]);
        // (f, g) = w (sin, cos) theta and their derivatives
        return std::array<double, 4>{w * sn, w * cs, y[1] * sn + cs / w, y[1] * cs - sn / w};
    };
    const auto fl = frame(l);
    const auto fr = frame(r);
    // F = [[f, g], [f', g']], det F = -1; T = F(x_r) F(x_l)^-1
    const double det = fl[0] * fl[3] - fl[1] * fl[2];
    const double i00 = fl[3] / det, i01 = -fl[1] / det, i10 = -fl[2] / det, i11 = fl[0] / det;
    const double p = fr[0] * i00 + fr[1] * i10;
    const double q = fr[0] * i01 + fr[1] * i11;
    const double pp = fr[2] * i00 + fr[3] * i10;
    const double qp = fr[2] * i01 + fr[3] * i11;

    const double alpha = p * (pp - sigma_r * p);
    const double gamma = q * (qp - sigma_r * q);
    const double beta = p * qp + pp * q - 2.0 * sigma_r * p * q;
    const double a2 = alpha + sigma_l * beta + sigma_l * sigma_l * gamma;
    const double b1 = -beta - 2.0 * sigma_l * gamma - 1.0;
    const double c0 = 2.0 * gamma;
    if (b1 == 0.0 && a2 == 0.0) throw FamilyDegeneracyError("balanced member undefined at this energy");
    // a2 vanishes at an exact eigenvalue; keep the root continuous with the linear one
    const double linear = b1 != 0.0 ? -c0 / b1 : std::numeric_limits<double>::quiet_NaN();
    std::vector<double> roots;
    if (std::abs(a2) <= 1e-14 * (std::abs(b1) + std::abs(c0))) {
        roots.push_back(linear);
    } else {
        const double disc = b1 * b1 - 4.0 * a2 * c0;
        if (disc < 0.0) throw FamilyDegeneracyError("no balanced member at this energy");
        const double sq = std::sqrt(disc);
        const double qq = -0.5 * (b1 + std::copysign(sq, b1));
        if (qq != 0.0) {
            roots.push_back(qq / a2);
            roots.push_back(c0 / qq);
        }
    }
    double best = std::numeric_limits<double>::quiet_NaN();
    for (double r0 : roots) {
        if (!(r0 > 0.0) || !std::isfinite(r0)) continue;
        if (std::isnan(best) || (std::isfinite(linear) && std::abs(r0 - linear) < std::abs(best - linear)))
            best = r0;
    }
    if (std::isnan(best)) throw FamilyDegeneracyError("no positive balanced amplitude at this energy");
    return best;
}

void check_branch_ends(std::span<const double> grid, const ForbiddenBranch& left, const ForbiddenBranch& right) {
    const double tol = 1e-9 * std::max(1.0, grid.back() - grid.front());
    if (left.side != Side::left || right.side != Side::right)
        throw ArgumentError("solve_allowed: branches passed in the wrong order");
    if (std::abs(left.grid.front() - grid.front()) > tol || std::abs(right.grid.front() - grid.back()) > tol)
        throw ArgumentError("solve_allowed: grid ends do not coincide with the turning points of the branches");
}

}  // namespace

ActionField solve_allowed(const Potential& potential, const UnitsConfig& units, double energy,
                          std::span<const double> grid, const ForbiddenBranch& left,
                          const ForbiddenBranch& right, const AllowedOptions& options) {
    units.validate();
    if (grid.size() < 3) throw ArgumentError("solve_allowed: grid needs at least three nodes");
    check_branch_ends(grid, left, right);
    const double hbar = units.hbar;
    const double sigma_l = left.s.front();
    const double sigma_r = right.s.front();
    const std::size_t n = grid.size();

    auto left_matched = [&](double w0) {
        if (!(w0 > 0.0)) throw ArgumentError("family member amplitude w0 must be positive");
        return run_milne(potential, units, energy, grid, 0, State<3>{w0, w0 * sigma_l - 1.0 / w0, 0.0},
                         options);
    };

    MilneRun run;
    if (const auto* fixed = std::get_if<LeftAmplitude>(&options.member)) {
        run = left_matched(fixed->w0);
    } else if (std::holds_alternative<BalancedMember>(options.member)) {
        double p_max = 0.0;
        for (double x : grid) p_max = std::max(p_max, -kappa_sq(potential, units, energy, x));
        const double trial = std::pow(std::max(p_max, 1e-300), -0.25);  // w^2 ~ 1/k
        const double a = balanced_amplitude_sq(left_matched(trial), sigma_l, sigma_r);
        run = left_matched(std::sqrt(a));
    } else {
        std::size_t i0 = 1;
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double k2 = -kappa_sq(potential, units, energy, grid[i]);
            if (k2 > best) {
                best = k2;
                i0 = i;
            }
        }
        const double k = std::sqrt(best);
        const double w = 1.0 / std::sqrt(k);
        const double dk = -units.mass * potential.derivative(grid[i0]) / (hbar * hbar * k);
        run = run_milne(potential, units, energy, grid, i0, State<3>{w, -0.5 * w * dk / k, 0.0}, options);
        const auto& l = run.values.front();
        const double phi = std::atan2(1.0, l[0] * l[0] * sigma_l - l[0] * l[1]);
        const double shift = phi - pi / 4.0 - l[2];
        for (auto& y : run.values) y[2] += shift;
    }

    ActionField f;
    f.hbar = hbar;
    f.energy = energy;
    f.grid.assign(grid.begin(), grid.end());
    f.real_action.resize(n);
    f.real_momentum.resize(n);
    f.imag_action.resize(n);
    f.imag_momentum.resize(n);
    f.amplitude.resize(n);
    f.amplitude_slope.resize(n);
    f.qmf.resize(n);
    const double wl = run.values.front()[0];
    for (std::size_t i = 0; i < n; ++i) {
        const auto& y = run.values[i];
        f.amplitude[i] = y[0];
        f.amplitude_slope[i] = y[1];
        f.real_action[i] = hbar * y[2];
        f.real_momentum[i] = hbar / (y[0] * y[0]);
        f.imag_action[i] = -hbar * std::log(y[0] / wl);
        f.imag_momentum[i] = -hbar * y[1] / y[0];
        f.qmf[i] = {f.real_momentum[i], f.imag_momentum[i]};
    }
    f.w0 = wl;
    f.substeps = run.substeps;
    f.richardson_gap = run.gap;
    return f;
}

// --- assembly ----------------------------------------------------------------

WaveFunction assemble_wavefunction(const ActionField& field, const ForbiddenBranch& left,
                                   const ForbiddenBranch& right, double mismatch_tolerance) {
    check_branch_ends(field.grid, left, right);
    const double hbar = field.hbar;
    auto allowed_psi = [&](std::size_t i) {
        const double phase = field.real_action[i] / hbar + pi / 4.0;
        const double w = field.amplitude[i];
        const double psi = w * std::sin(phase);
        const double dpsi = field.amplitude_slope[i] * std::sin(phase) + std::cos(phase) / w;
        return std::array<double, 3>{psi, dpsi, std::abs(psi) / (w * w) + std::abs(dpsi)};
    };
    const std::size_t m = field.grid.size();
    const auto l = allowed_psi(0);
    const auto r = allowed_psi(m - 1);
    const double b_l = l[0];
    const double b_r = r[0];
    const double mis_l = std::abs(l[1] - b_l * left.s.front()) / l[2];
    const double mis_r = std::abs(r[1] - b_r * right.s.front()) / r[2];
    const double worst = std::max(mis_l, mis_r);
    if (!(worst <= mismatch_tolerance))
        throw NotEigenvalueError("psi' jumps at a turning point (relative " + std::to_string(worst) +
                                     "); the energy is not an eigenvalue",
                                 worst);

    WaveFunction wf;
    const std::size_t nl = left.grid.size() - 1;
    const std::size_t nr = right.grid.size() - 1;
    wf.grid.reserve(nl + m + nr);
    wf.psi.reserve(nl + m + nr);
    for (std::size_t j = nl; j >= 1; --j) {
        wf.grid.push_back(left.grid[j]);
        wf.psi.push_back(b_l * std::exp(-left.y[j] / hbar));
    }
    for (std::size_t i = 0; i < m; ++i) {
        wf.grid.push_back(field.grid[i]);
        wf.psi.push_back(allowed_psi(i)[0]);
    }
    for (std::size_t j = 1; j <= nr; ++j) {
        wf.grid.push_back(right.grid[j]);
        wf.psi.push_back(b_r * std::exp(-right.y[j] / hbar));
    }
    std::vector<double> sq(wf.psi.size());
    for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = wf.psi[i] * wf.psi[i];
    const double raw = simpson(wf.grid, sq);
    const double c = (b_r < 0.0 ? -1.0 : 1.0) / std::sqrt(raw);
    for (auto& v : wf.psi) v *= c;
    for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = wf.psi[i] * wf.psi[i];
    wf.norm = simpson(wf.grid, sq);
    wf.amplitude = c * std::sqrt(hbar);
    wf.b_left = c * b_l;
    wf.b_right = c * b_r;
    wf.left_mismatch = mis_l;
    wf.right_mismatch = mis_r;
    wf.left_index = nl;
    wf.right_index = nl + m - 1;
    return wf;
}

// --- pipeline ----------------------------------------------------------------

namespace {

struct Pieces {
    TurningPoints turning;
    SnappedGrid grid;
    ForbiddenBranch left;
    ForbiddenBranch right;
    ActionField action;
};

Pieces solve_pieces(const Potential& potential, const UnitsConfig& units, double energy, const GridSpec& spec,
                    const FamilyOptions& options) {
    units.validate();
    if (spec.count < 5 || !(spec.x_max > spec.x_min)) throw ArgumentError("grid must be a:b:N with a < b, N >= 5");
    Pieces p;
    p.turning = turning_points(potential, energy);
    const auto uniform = spec.nodes();
    p.grid = snap_grid(uniform, p.turning.left, p.turning.right);
    const auto& x = p.grid.x;
    std::vector<double> lg(x.rbegin() + static_cast<std::ptrdiff_t>(x.size() - 1 - p.grid.left), x.rend());
    std::vector<double> rg(x.begin() + static_cast<std::ptrdiff_t>(p.grid.right), x.end());
    p.left = solve_forbidden(potential, units, energy, Side::left, lg, options.forbidden);
    p.right = solve_forbidden(potential, units, energy, Side::right, rg, options.forbidden);
    const std::span<const double> allowed(x.data() + p.grid.left, p.grid.right - p.grid.left + 1);
    p.action = solve_allowed(potential, units, energy, allowed, p.left, p.right, options.allowed);
    return p;
}

}  // namespace

FamilySolution solve_family(const Potential& potential, const UnitsConfig& units, double energy,
                            const GridSpec& grid, const FamilyOptions& options) {
    auto p = solve_pieces(potential, units, energy, grid, options);
    FamilySolution s;
    s.energy = energy;
    s.wave = assemble_wavefunction(p.action, p.left, p.right, options.mismatch_tolerance);
    s.turning = p.turning;
    s.grid = std::move(p.grid);
    s.left = std::move(p.left);
    s.right = std::move(p.right);
    s.action = std::move(p.action);
    return s;
}

double quantization_defect_at(const Potential& potential, const UnitsConfig& units, int n, double energy,
                              const GridSpec& grid, const FamilyOptions& options) {
    auto balanced = options;
    balanced.allowed.member = BalancedMember{};
    const auto p = solve_pieces(potential, units, energy, grid, balanced);
    return p.action.real_action.back() - (n + 0.5) * pi * units.hbar;
}

double quantization_defect(const Potential& potential, const UnitsConfig& units, int n, const GridSpec& grid,
                           const FamilyOptions& options) {
    const double e = eigenenergy(potential, units, n).energy;
    return quantization_defect_at(potential, units, n, e, grid, options);
}

// --- classical limit ---------------------------------------------------------

int nearest_level(const Potential& potential, const UnitsConfig& units, double target) {
    int best = 0;
    double best_gap = std::abs(eigenenergy(potential, units, 0).energy - target);
    for (int n = 1;; ++n) {
        double e = 0.0;
        try {
            e = eigenenergy(potential, units, n).energy;
        } catch (const UnboundStateError&) {
            break;
        }
        const double gap = std::abs(e - target);
        // exact ties go to the lower level
        if (gap < best_gap - 1e-12 * std::max(1.0, std::abs(target))) {
            best = n;
            best_gap = gap;
        }
        if (e > target) break;
    }
    return best;
}

std::vector<SweepRow> classical_limit_sweep(const Potential& potential, const UnitsConfig& units, int n,
                                            std::span<const double> hbar_list, std::size_t count,
                                            double interior) {
    units.validate();
    if (hbar_list.empty()) throw ArgumentError("sweep needs at least one hbar value");
    if (!(interior > 0.0 && interior <= 1.0)) throw ArgumentError("interior fraction must lie in (0, 1]");
    if (count < 5) throw ArgumentError("sweep grid needs at least 5 nodes");
    for (double h : hbar_list)
        if (!(h > 0.0)) throw ArgumentError("hbar values must be positive");
    const double target = eigenenergy(potential, UnitsConfig{hbar_list[0], units.mass}, n).energy;

    auto row = [&, target](double hbar) {
        const UnitsConfig u{hbar, units.mass};
        SweepRow out;
        out.hbar = hbar;
        out.n = nearest_level(potential, u, target);
        out.energy = eigenenergy(potential, u, out.n).energy;
        const auto tp = turning_points(potential, out.energy);
        const auto grid = linspace(tp.left, tp.right, count);
        ForbiddenOptions fo;
        fo.step = grid[1] - grid[0];
        const auto left = solve_forbidden(potential, u, out.energy, Side::left, fo);
        const auto right = solve_forbidden(potential, u, out.energy, Side::right, fo);
        AllowedOptions ao;
        ao.member = SmoothMember{};
        const auto f = solve_allowed(potential, u, out.energy, grid, left, right, ao);
        const auto pc = classical_action(potential, u, out.energy, grid).p_c;
        const double margin = 0.5 * (1.0 - interior) * (tp.right - tp.left);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (grid[i] < tp.left + margin || grid[i] > tp.right - margin) continue;
            out.sup_momentum_gap = std::max(out.sup_momentum_gap, std::abs(f.real_momentum[i] - pc[i]));
            out.sup_imag_momentum = std::max(out.sup_imag_momentum, std::abs(f.imag_momentum[i]));
            // X'' from the amplitude state: d(hbar/w^2)/dx = -2 hbar w'/w^3
            const double w = f.amplitude[i];
            const double xpp = -2.0 * hbar * f.amplitude_slope[i] / (w * w * w);
            out.identity_residual =
                std::max(out.identity_residual, std::abs(f.imag_momentum[i] - 0.5 * hbar * xpp / f.real_momentum[i]));
        }
        return out;
    };

    std::vector<std::future<SweepRow>> jobs;
    jobs.reserve(hbar_list.size());
    for (double h : hbar_list) jobs.push_back(std::async(std::launch::async, row, h));
    std::vector<SweepRow> rows;
    rows.reserve(jobs.size());
    for (auto& j : jobs) rows.push_back(j.get());
    return rows;
}

}  // namespace qhj
