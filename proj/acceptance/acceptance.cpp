// One line per acceptance criterion; exit status 1 if any fails.

#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <span>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qhj/cli.hpp"
#include "qhj/milne.hpp"
#include "qhj/oracle.hpp"
#include "qhj/polar.hpp"
#include "../tests/support.hpp"

using namespace qhj;
using qhj::test::unit;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

const auto harmonic = Potential::harmonic();
const auto morse = Potential::morse();
const GridSpec harmonic_grid{-6, 6, 2001};
const GridSpec morse_grid{-2, 8, 2001};

Verdict oracle_equivalence() {
    double worst_h = 0.0;
    double worst_m = 0.0;
    for (int n = 0; n <= 3; ++n) {
        const auto s = solve_family(harmonic, unit, eigenenergy(harmonic, unit, n).energy, harmonic_grid);
        worst_h = std::max(worst_h, test::max_abs_diff(s.wave.psi, test::analytic_samples(harmonic, unit, n, s.wave.grid)));
    }
    for (int n = 0; n <= 2; ++n) {
        const auto s = solve_family(morse, unit, eigenenergy(morse, unit, n).energy, morse_grid);
        worst_m = std::max(worst_m, test::max_abs_diff(s.wave.psi, test::analytic_samples(morse, unit, n, s.wave.grid)));
    }
    return {worst_h <= 1e-6 && worst_m <= 1e-5, fmt("harmonic %.2e, Morse %.2e", worst_h, worst_m)};
}

Verdict turning_point_exactness() {
    double worst = 0.0;
    const std::pair<const Potential*, GridSpec> cases[] = {{&harmonic, harmonic_grid}, {&morse, morse_grid}};
    for (const auto& [v, g] : cases) {
        const auto uniform = g.nodes();
        for (int n = 0; n <= 2; ++n) {
            const double e = eigenenergy(*v, unit, n).energy;
            const auto s = solve_family(*v, unit, e, g);
            const auto o = numerov_solve(*v, unit, e, uniform);
            for (std::size_t i : {s.wave.left_index, s.wave.right_index}) {
                const double x = s.wave.grid[i];
                const std::size_t lo = window_start(uniform, x, 8);
                const double ref =
                    lagrange_eval(std::span(uniform).subspan(lo, 8), std::span(o.psi).subspan(lo, 8), x);
                worst = std::max(worst, std::abs(s.wave.psi[i] - ref));
            }
        }
    }
    return {worst <= 1e-6, fmt("max |psi - psi_oracle| at x_left, x_right %.2e", worst)};
}

Verdict quantization_identity() {
    double worst_h = 0.0;
    double worst_m = 0.0;
    for (int n = 0; n <= 5; ++n)
        worst_h = std::max(worst_h, std::abs(quantization_defect(harmonic, unit, n, {-8, 8, 2001})));
    for (int n = 0; n <= 2; ++n) worst_m = std::max(worst_m, std::abs(quantization_defect(morse, unit, n, morse_grid)));
    return {worst_h <= 1e-6 && worst_m <= 1e-5, fmt("harmonic %.2e, Morse %.2e", worst_h, worst_m)};
}

Verdict family_invariance() {
    std::vector<std::vector<double>> psi;
    for (double w0 : {0.5, 1.0, 2.0}) {
        FamilyOptions o;
        o.allowed.member = LeftAmplitude{w0};
        psi.push_back(solve_family(harmonic, unit, 2.5, harmonic_grid, o).wave.psi);
    }
    const double d = std::max({test::max_abs_diff(psi[0], psi[1]), test::max_abs_diff(psi[0], psi[2]),
                               test::max_abs_diff(psi[1], psi[2])});
    return {d <= 1e-9, fmt("max pointwise spread %.2e", d)};
}

Verdict classical_limit() {
    const std::vector<double> hbars{1.0, 0.5, 0.25, 0.1};
    const auto rows = classical_limit_sweep(harmonic, unit, 2, hbars);
    bool ok = rows.size() == 4;
    double identity = 0.0;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        if (k > 0) ok = ok && rows[k].sup_momentum_gap < rows[k - 1].sup_momentum_gap;
        identity = std::max(identity, rows[k].identity_residual / rows[k].hbar);
    }
    ok = ok && identity <= 1e-8;
    return {ok, fmt("sup|X'-pC| %.3g -> %.3g, identity/hbar %.2e", rows.front().sup_momentum_gap,
                    rows.back().sup_momentum_gap, identity)};
}

QmfTrace sampled_trace(int n, const std::vector<double>& grid) {
    return qmf_from_wavefunction(test::analytic_samples(harmonic, unit, n, grid),
                                 test::analytic_slopes(harmonic, unit, n, grid), unit, grid);
}

Verdict pole_structure() {
    const auto grid = harmonic_grid.nodes();
    const double h = harmonic_grid.spacing();
    const auto t = sampled_trace(2, grid);
    bool ok = t.poles.size() == 2;
    double res = 0.0;
    for (const auto& p : t.poles) {
        ok = ok && std::abs(std::abs(p.x0) - 0.7071068) <= h;
        res = std::max(res, std::abs(p.residue - std::complex<double>(0, -1)));
    }
    double re = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (t.regular[i]) re = std::max(re, std::abs(t.p_l[i].real()));
    ok = ok && res <= 1e-6 && re <= 1e-10;
    return {ok, fmt("%g poles, residue error %.2e, max |Re p| %.2e", double(t.poles.size()), res, re)};
}

Verdict moebius() {
    const auto grid = harmonic_grid.nodes();
    const auto t = moebius_integrate_qmf(harmonic, unit, 2.5, -6.0, grid);
    const auto ref = sampled_trace(2, grid);
    const auto psi = test::analytic_samples(harmonic, unit, 2, grid);
    const double peak = test::max_abs(psi);
    const double floor = std::sqrt(2 * 2.5);
    int inside = 0;
    for (const auto& p : t.poles)
        if (std::abs(p.x0) < std::sqrt(5.0)) ++inside;
    double rel = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (std::abs(psi[i]) > 0.1 * peak)
            rel = std::max(rel, std::abs(t.p_l[i] - ref.p_l[i]) / std::max(std::abs(ref.p_l[i]), floor));
    MoebiusOptions decaying;
    decaying.p_start = std::complex<double>(0, -(4.0 - 16.0 / 31.0));
    auto end_value = [&](std::size_t cells) {
        return moebius_integrate_qmf(harmonic, unit, 2.5, -4.0, linspace(-4.0, -1.0, cells + 1), decaying).p_l.back();
    };
    const auto exact = end_value(6400);
    std::vector<double> err;
    for (std::size_t cells : {25, 50, 100, 200}) err.push_back(std::abs(end_value(cells) - exact));
    double order = 1e9;
    for (std::size_t k = 1; k < err.size(); ++k) order = std::min(order, std::log2(err[k - 1] / err[k]));
    return {inside == 2 && rel <= 1e-6 && order >= 2.7,
            fmt("poles passed %g, relative gap %.2e, order %.2f", double(inside), rel, order)};
}

Verdict antithetic() {
    const auto grid = harmonic_grid.nodes();
    double err[2];
    int k = 0;
    for (int n : {0, 2}) {
        const auto t = moebius_integrate_qmf_two_sided(harmonic, unit, n + 0.5, grid);
        std::vector<double> est;
        for (const auto& p : t.poles) est.push_back(p.x0);
        const auto r = reconstruct_psi_antithetic(t, est);
        err[k++] = test::max_abs_diff(r.psi, test::analytic_samples(harmonic, unit, n, grid));
    }
    return {err[0] <= 1e-6 && err[1] <= 1e-4, fmt("n=0 %.2e, n=2 %.2e", err[0], err[1])};
}

Verdict numerov_order() {
    std::vector<double> err;
    std::vector<double> hs;
    for (std::size_t count : {401, 801, 1601, 3201}) {
        const auto grid = linspace(-8, 8, count);
        const auto s = numerov_solve(harmonic, unit, 2.5, grid);
        err.push_back(test::max_abs_diff(s.psi, test::analytic_samples(harmonic, unit, 2, grid)));
        hs.push_back(grid[1] - grid[0]);
    }
    double lo = 1e9;
    double hi = -1e9;
    for (std::size_t k = 1; k < err.size(); ++k) {
        const double slope = std::log(err[k - 1] / err[k]) / std::log(hs[k - 1] / hs[k]);
        lo = std::min(lo, slope);
        hi = std::max(hi, slope);
    }
    return {lo >= 3.8 && hi <= 4.2, fmt("slopes in [%.3f, %.3f]", lo, hi)};
}

Verdict figures() {
    std::random_device rd;
    const fs::path dir = fs::temp_directory_path() / ("qhj-acceptance-" + std::to_string(rd()));
    fs::create_directories(dir);
    const std::string out = dir.string();
    const char* argv[] = {"qhj", "figures", "--out", out.c_str()};
    std::ostringstream log;
    std::ostringstream err;
    const int code = cli::run(4, argv, log, err);
    bool ok = code == 0;
    std::string detail = "exit " + std::to_string(code);
    if (ok) {
        const auto f2 = cli::read_csv(dir / "fig2.csv");
        const auto& xp = f2.column("Xp");
        const auto& pc = f2.column("pC");
        ok = ok && xp.front() > 0 && xp.back() > 0 && std::abs(pc.front()) < 1e-6 && std::abs(pc.back()) < 1e-6;
        const auto f4 = cli::read_csv(dir / "fig4.csv");
        const auto& y1 = f4.column("Y1");
        const auto& y3 = f4.column("Y3");
        const auto& x = f4.column("X");
        for (std::size_t i = 0; i < f4.rows(); ++i) {
            if (!std::isnan(y1[i])) ok = ok && y1[i] >= 0 && (i + 1 >= f4.rows() || std::isnan(y1[i + 1]) || y1[i] >= y1[i + 1]);
            if (!std::isnan(y3[i])) ok = ok && y3[i] >= 0 && (i == 0 || std::isnan(y3[i - 1]) || y3[i] >= y3[i - 1]);
            if (i > 0 && !std::isnan(x[i]) && !std::isnan(x[i - 1])) ok = ok && x[i] > x[i - 1];
        }
        detail = fmt("fig2 X'(x_t) = %.4f, %.4f with pC(x_t) = 0; fig4 shapes checked", xp.front(), xp.back());
    }
    fs::remove_all(dir);
    return {ok, detail};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"oracle equivalence", oracle_equivalence},
        {"exactness at turning points", turning_point_exactness},
        {"quantization identity", quantization_identity},
        {"family invariance", family_invariance},
        {"classical limit", classical_limit},
        {"pole structure", pole_structure},
        {"Moebius integrator", moebius},
        {"antithetic reconstruction", antithetic},
        {"Numerov self-check", numerov_order},
        {"figure reproduction", figures},
    };
    int failed = 0;
    int k = 0;
    for (const auto& [name, check] : criteria) {
        ++k;
        Verdict v;
        try {
            v = check();
        } catch (const std::exception& e) {
            v = {false, std::string("threw: ") + e.what()};
        }
        if (!v.pass) ++failed;
        std::printf("%s %2d %s: %s\n", v.pass ? "PASS" : "FAIL", k, name.c_str(), v.detail.c_str());
    }
    return failed == 0 ? 0 : 1;
}
