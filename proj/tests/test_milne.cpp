#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qhj/classical.hpp"
#include "qhj/errors.hpp"
#include "qhj/milne.hpp"
#include "support.hpp"

using namespace qhj;
using qhj::test::unit;

namespace {

const GridSpec harmonic_grid{-6, 6, 2001};
const GridSpec morse_grid{-2, 8, 2001};

double harmonic_log_slope(double x) { return -x + 4 * x / (2 * x * x - 1); }

FamilySolution harmonic_state(int n, const FamilyOptions& options = {}) {
    const auto v = Potential::harmonic();
    return solve_family(v, unit, eigenenergy(v, unit, n).energy, harmonic_grid, options);
}

}  // namespace

TEST_CASE("forbidden branch log-derivative against the analytic state") {
    const auto v = Potential::harmonic();
    const auto right = solve_forbidden(v, unit, 2.5, Side::right);
    CHECK(right.grid.front() == doctest::Approx(std::sqrt(5.0)).epsilon(1e-12));
    CHECK(right.s.front() == doctest::Approx(-1.2422600).epsilon(1e-6));
    CHECK(right.y.front() == 0.0);
    const auto it = std::min_element(right.grid.begin(), right.grid.end(),
                                     [](double a, double b) { return std::abs(a - 5) < std::abs(b - 5); });
    const auto i = static_cast<std::size_t>(it - right.grid.begin());
    CHECK(right.s[i] == doctest::Approx(harmonic_log_slope(right.grid[i])).epsilon(1e-6));
    CHECK(harmonic_log_slope(5.0) == doctest::Approx(-4.59184).epsilon(1e-6));

    const auto left = solve_forbidden(v, unit, 2.5, Side::left);
    CHECK(left.s.front() == doctest::Approx(1.2422600).epsilon(1e-6));
    for (std::size_t k = 0; k <= left.start_index; k += 25)
        if (left.grid[k] >= -5.0) CHECK(left.s[k] == doctest::Approx(harmonic_log_slope(left.grid[k])).epsilon(1e-6));
}

TEST_CASE("forbidden branches decay outward") {
    const auto v = Potential::morse();
    const double e = eigenenergy(v, unit, 2).energy;
    for (Side side : {Side::left, Side::right}) {
        const auto b = solve_forbidden(v, unit, e, side);
        for (std::size_t k = 1; k < b.grid.size(); ++k) {
            CHECK(b.y[k] >= b.y[k - 1]);
            CHECK(b.y[k] >= 0.0);
        }
        const double far = b.s[b.start_index];
        CHECK((side == Side::left ? far > 0.0 : far < 0.0));
    }
}

TEST_CASE("deep tail approaches the WKB asymptote") {
    const auto v = Potential::harmonic();
    ForbiddenOptions opts;
    opts.box = 9.0;
    opts.depth_action = 60.0;
    const auto b = solve_forbidden(v, unit, 2.5, Side::right, opts);
    double prev = 1e300;
    for (std::size_t k = 200; k <= b.start_index; k += 200) {
        const double x = b.grid[k];
        const double gap = std::abs(b.s[k] + std::sqrt(x * x - 5.0));
        CHECK(gap < prev);
        prev = gap;
    }
    CHECK(prev < 0.1);
}

TEST_CASE("forbidden branch errors") {
    const auto v = Potential::harmonic();
    const std::vector<double> inward{2.5, 2.4, 2.3};
    CHECK_THROWS_AS(solve_forbidden(v, unit, 2.5, Side::right, inward), ArgumentError);
    const std::vector<double> allowed{1.0, 1.5, 2.0};
    CHECK_THROWS_AS(solve_forbidden(v, unit, 2.5, Side::right, allowed), DomainError);
    ForbiddenOptions opts;
    opts.blowup = 1.0;
    CHECK_THROWS_AS(solve_forbidden(v, unit, 2.5, Side::right, opts), StiffnessError);
}

TEST_CASE("action field invariants") {
    for (int n = 0; n < 4; ++n) {
        const auto sol = harmonic_state(n);
        const auto& f = sol.action;
        CHECK(f.real_action.front() == 0.0);
        CHECK(f.imag_action.front() == 0.0);
        double lo = 1e300;
        double hi = -1e300;
        for (std::size_t i = 0; i < f.grid.size(); ++i) {
            CHECK(f.real_momentum[i] > 0.0);
            if (i > 0) CHECK(f.real_action[i] > f.real_action[i - 1]);
            const double c = f.imag_action[i] - 0.5 * f.hbar * std::log(f.real_momentum[i]);
            lo = std::min(lo, c);
            hi = std::max(hi, c);
        }
        CHECK(hi - lo <= 1e-8 * f.hbar);
        CHECK(sol.wave.norm == doctest::Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("quantization identity") {
    const auto h = Potential::harmonic();
    for (int n = 0; n <= 5; ++n) CHECK(std::abs(quantization_defect(h, unit, n, {-8, 8, 2001})) <= 1e-6);
    const auto m = Potential::morse();
    for (int n = 0; n <= 2; ++n) CHECK(std::abs(quantization_defect(m, unit, n, morse_grid)) <= 1e-5);
    const auto sol = harmonic_state(2);
    CHECK(sol.action.real_action.back() == doctest::Approx(2.5 * std::numbers::pi).epsilon(1e-9));
}

TEST_CASE("detuned energy leaves a quantization defect") {
    const auto h = Potential::harmonic();
    const double d = quantization_defect_at(h, unit, 2, 2.51, harmonic_grid);
    CHECK(std::abs(d) > 1e-3);
    CHECK(d == doctest::Approx(0.0531441).epsilon(1e-5));
    CHECK_THROWS_AS(solve_family(h, unit, 2.51, harmonic_grid), NotEigenvalueError);
}

TEST_CASE("not-an-eigenvalue error carries the defect") {
    const auto h = Potential::harmonic();
    try {
        solve_family(h, unit, 2.5 * 1.001, harmonic_grid);
        FAIL("expected NotEigenvalueError");
    } catch (const NotEigenvalueError& e) {
        CHECK(e.defect() > 1e-4);
    }
}

TEST_CASE("assembled psi matches the analytic eigenfunctions") {
    const Potential models[] = {Potential::harmonic(), Potential::morse()};
    const GridSpec grids[] = {harmonic_grid, morse_grid};
    const int levels[] = {4, 3};
    const double tol[] = {1e-6, 1e-5};
    for (int k = 0; k < 2; ++k) {
        for (int n = 0; n < levels[k]; ++n) {
            const auto sol = solve_family(models[k], unit, eigenenergy(models[k], unit, n).energy, grids[k]);
            const auto ref = test::analytic_samples(models[k], unit, n, sol.wave.grid);
            CHECK(test::max_abs_diff(sol.wave.psi, ref) <= tol[k]);
            CHECK(sol.wave.left_mismatch <= 1e-4);
            CHECK(sol.wave.right_mismatch <= 1e-4);
        }
    }
}

TEST_CASE("nodes of psi sit at the interference zeros of the phase") {
    const auto sol = harmonic_state(2);
    const auto& f = sol.action;
    const auto& w = sol.wave;
    const double h = harmonic_grid.spacing();
    std::vector<double> phase_zeros;
    for (std::size_t i = 1; i < f.grid.size(); ++i) {
        const double a = std::sin(f.real_action[i - 1] / f.hbar + std::numbers::pi / 4);
        const double b = std::sin(f.real_action[i] / f.hbar + std::numbers::pi / 4);
        if (a * b < 0) phase_zeros.push_back(f.grid[i - 1] + a / (a - b) * (f.grid[i] - f.grid[i - 1]));
    }
    std::vector<double> psi_zeros;
    for (std::size_t i = 1; i < w.grid.size(); ++i)
        if (w.psi[i - 1] * w.psi[i] < 0)
            psi_zeros.push_back(w.grid[i - 1] + w.psi[i - 1] / (w.psi[i - 1] - w.psi[i]) * (w.grid[i] - w.grid[i - 1]));
    REQUIRE(phase_zeros.size() == 2);
    REQUIRE(psi_zeros.size() == 2);
    for (int k = 0; k < 2; ++k) {
        CHECK(std::abs(phase_zeros[k] - psi_zeros[k]) <= h);
        CHECK(std::abs(std::abs(psi_zeros[k]) - 1 / std::sqrt(2.0)) <= h);
    }
}

TEST_CASE("family invariance") {
    std::vector<std::vector<double>> psis;
    std::vector<double> ends;
    for (double w0 : {0.5, 1.0, 2.0}) {
        FamilyOptions o;
        o.allowed.member = LeftAmplitude{w0};
        const auto sol = harmonic_state(2, o);
        CHECK(sol.action.w0 == w0);
        psis.push_back(sol.wave.psi);
        ends.push_back(sol.action.real_action.back());
    }
    CHECK(test::max_abs_diff(psis[0], psis[1]) <= 1e-9);
    CHECK(test::max_abs_diff(psis[0], psis[2]) <= 1e-9);
    CHECK(test::max_abs_diff(psis[1], psis[2]) <= 1e-9);
    CHECK(std::abs(ends[0] - ends[2]) > 1e-3);
    FamilyOptions smooth;
    smooth.allowed.member = SmoothMember{};
    CHECK(test::max_abs_diff(harmonic_state(2, smooth).wave.psi, psis[1]) <= 1e-9);
}

namespace {

double riccati_worst(const Potential& v, double e, const ActionField& f, std::size_t width) {
    std::vector<double> re(f.qmf.size());
    std::vector<double> im(f.qmf.size());
    for (std::size_t i = 0; i < f.qmf.size(); ++i) {
        re[i] = f.qmf[i].real();
        im[i] = f.qmf[i].imag();
    }
    const auto dre = stencil_derivative(f.grid, re, 1, width);
    const auto dim = stencil_derivative(f.grid, im, 1, width);
    const std::complex<double> I(0, 1);
    double worst = 0;
    for (std::size_t i = 2; i + 2 < f.grid.size(); ++i) {
        const std::complex<double> dp(dre[i], dim[i]);
        const auto r = 0.5 * f.qmf[i] * f.qmf[i] + f.hbar / (2.0 * I) * dp - (e - v.value(f.grid[i]));
        worst = std::max(worst, std::abs(r));
    }
    return worst;
}

}  // namespace

TEST_CASE("the complex momentum solves the Riccati equation") {
    const Potential models[] = {Potential::harmonic(), Potential::morse()};
    const GridSpec grids[] = {harmonic_grid, morse_grid};
    for (int k = 0; k < 2; ++k) {
        const double e = eigenenergy(models[k], unit, 2).energy;
        FamilyOptions smooth;
        smooth.allowed.member = SmoothMember{};
        const auto a = solve_family(models[k], unit, e, grids[k], smooth);
        CHECK(riccati_worst(models[k], e, a.action, 5) <= 1e-6 * e);
        // oscillating members need a wider stencil to resolve p_m'
        const auto b = solve_family(models[k], unit, e, grids[k]);
        CHECK(riccati_worst(models[k], e, b.action, 7) <= 1e-6 * e);
    }
}

TEST_CASE("log psi is concave in the harmonic tails") {
    const auto sol = harmonic_state(2);
    const auto& w = sol.wave;
    for (std::size_t i = 1; i + 1 < w.grid.size(); ++i) {
        if (std::abs(w.grid[i]) < 3.0) continue;
        const double d2 = std::log(std::abs(w.psi[i - 1])) - 2 * std::log(std::abs(w.psi[i])) +
                          std::log(std::abs(w.psi[i + 1]));
        CHECK(d2 < 0.0);
    }
}

TEST_CASE("wave function bookkeeping") {
    const auto sol = harmonic_state(1);
    const auto& w = sol.wave;
    CHECK(w.grid[w.left_index] == sol.turning.left);
    CHECK(w.grid[w.right_index] == sol.turning.right);
    CHECK(w.psi.back() > 0.0);
    CHECK(w.b_right > 0.0);
    CHECK(w.amplitude != 0.0);
    CHECK(w.grid.size() == harmonic_grid.count);
}

TEST_CASE("classical-limit sweep") {
    const auto h = Potential::harmonic();
    const std::vector<double> hbars{1.0, 0.5, 0.25, 0.1};
    const auto rows = classical_limit_sweep(h, unit, 2, hbars);
    REQUIRE(rows.size() == 4);
    const int levels[] = {2, 4, 9, 24};
    const double gaps[] = {0.161525983869, 0.075491128953, 0.0277222526453, 0.00523711102333};
    for (std::size_t k = 0; k < 4; ++k) {
        CHECK(rows[k].n == levels[k]);
        CHECK(std::abs(rows[k].energy - 2.5) <= 0.5 * rows[k].hbar);
        CHECK(rows[k].sup_momentum_gap == doctest::Approx(gaps[k]).epsilon(1e-6));
        CHECK(rows[k].sup_imag_momentum / rows[k].hbar <= 0.55);
        CHECK(rows[k].identity_residual <= 1e-8 * rows[k].hbar);
        if (k > 0) CHECK(rows[k].sup_momentum_gap < rows[k - 1].sup_momentum_gap);
    }
    CHECK_THROWS_AS(classical_limit_sweep(h, unit, 2, std::vector<double>{}), ArgumentError);
}

TEST_CASE("nearest level rounds ties down") {
    const auto h = Potential::harmonic();
    CHECK(nearest_level(h, unit, 2.5) == 2);
    CHECK(nearest_level(h, unit, 3.0) == 2);
    CHECK(nearest_level(h, unit, 3.01) == 3);
    CHECK(nearest_level(h, UnitsConfig{0.1, 1.0}, 2.5) == 24);
}
