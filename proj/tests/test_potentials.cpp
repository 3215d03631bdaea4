#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "qhj/numerics.hpp"
#include "qhj/potentials.hpp"
#include "support.hpp"

using namespace qhj;
using qhj::test::unit;

TEST_CASE("potential values") {
    const auto h = Potential::harmonic();
    const auto m = Potential::morse();
    CHECK(h.value(0) == 0.0);
    CHECK(h.value(2) == doctest::Approx(2.0));
    CHECK(m.value(0) == 0.0);
    CHECK(m.value(1) == doctest::Approx(10 * std::pow(1 - std::exp(-1.0), 2)));
    CHECK(h.minimum_location() == 0.0);
    CHECK_THROWS_AS(Potential::harmonic(-1), ArgumentError);
    CHECK_THROWS_AS(Potential::morse(10, 0), ArgumentError);
}

TEST_CASE("derivative accessor agrees with finite differences") {
    std::vector<double> xt = linspace(-3, 3, 61);
    std::vector<double> vt;
    for (double x : xt) vt.push_back(std::cos(x) + 0.1 * x * x);
    const Potential models[] = {Potential::harmonic(1.3, 0.7), Potential::morse(), Potential::tabulated(xt, vt)};
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> pick(-2.5, 2.5);
    for (const auto& v : models) {
        for (int k = 0; k < 100; ++k) {
            const double x = pick(rng);
            const double h = 1e-5;
            const double fd = (v.value(x + h) - v.value(x - h)) / (2 * h);
            CHECK(fd == doctest::Approx(v.derivative(x)).epsilon(1e-6).scale(1.0));
        }
    }
}

TEST_CASE("tabulated potentials") {
    std::istringstream in("# x V\n-1 1\n0 0 # minimum\n\n1 1\n2 4\n");
    const auto v = read_tabulated(in);
    CHECK(v.kind() == PotentialKind::tabulated);
    CHECK(v.value(0) == doctest::Approx(0.0));
    CHECK_THROWS_AS(v.value(2.5), RangeError);
    CHECK_THROWS_AS(v.derivative(-1.5), RangeError);
    CHECK_THROWS_AS(Potential::tabulated({0, 1}, {0, 1}), ArgumentError);
    CHECK_THROWS_AS(Potential::tabulated({0, 2, 1}, {0, 1, 2}), ArgumentError);
    std::istringstream bad("0 1\n1\n");
    CHECK_THROWS_AS(read_tabulated(bad), ArgumentError);
    CHECK_THROWS_AS(eigenenergy(v, unit, 0), UnsupportedError);
    CHECK_THROWS_AS(analytic_eigenfunction(v, unit, 0, 0.0), UnsupportedError);
    const auto tp = turning_points(v, 0.5);
    CHECK(v.value(tp.left) == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(v.value(tp.right) == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(tp.left < 0.0);
    CHECK(tp.right > 0.0);
}

TEST_CASE("eigenenergies") {
    const auto h = Potential::harmonic();
    const auto m = Potential::morse();
    CHECK(eigenenergy(h, unit, 2).energy == doctest::Approx(2.5));
    CHECK(eigenenergy(h, unit, 0).energy == doctest::Approx(0.5));
    const double expected[] = {2.11106797749979, 5.58320393249937, 8.05533988749895, 9.52747584249853};
    for (int n = 0; n < 4; ++n) CHECK(eigenenergy(m, unit, n).energy == doctest::Approx(expected[n]).epsilon(1e-13));
    CHECK(morse_bound_state_count(Morse{}, unit) == 4);
    CHECK_THROWS_AS(eigenenergy(m, unit, 4), UnboundStateError);
    CHECK_THROWS_AS(eigenenergy(h, unit, -1), ArgumentError);
    CHECK_THROWS_AS(eigenenergy(h, UnitsConfig{0.0, 1.0}, 1), ArgumentError);
}

TEST_CASE("Morse level agrees with an independent Numerov search") {
    const auto m = Potential::morse();
    const auto grid = linspace(-2, 8, 2001);
    const double e = test::numerov_eigenvalue(m, unit, grid, 7.9, 8.2);
    CHECK(e == doctest::Approx(8.0553399).epsilon(1e-7));
}

TEST_CASE("turning points") {
    const auto h = Potential::harmonic();
    auto tp = turning_points(h, 2.5);
    CHECK(tp.left == doctest::Approx(-2.2360680).epsilon(1e-8));
    CHECK(tp.right == doctest::Approx(2.2360680).epsilon(1e-8));
    tp = turning_points(h, 0.5);
    CHECK(tp.left == doctest::Approx(-1.0));
    const auto m = Potential::morse();
    const double e = eigenenergy(m, unit, 2).energy;
    tp = turning_points(m, e);
    CHECK(tp.left == doctest::Approx(-0.640545374238424).epsilon(1e-12));
    CHECK(tp.right == doctest::Approx(2.27804325478929).epsilon(1e-12));
    CHECK(std::abs(m.value(tp.left) - e) <= 1e-10 * e);
    CHECK(std::abs(m.value(tp.right) - e) <= 1e-10 * e);
    CHECK_THROWS_AS(turning_points(h, -1), DomainError);
    CHECK_THROWS_AS(turning_points(m, 10.5), DomainError);
}

TEST_CASE("analytic eigenfunctions") {
    const auto h = Potential::harmonic();
    CHECK(std::abs(analytic_eigenfunction(h, unit, 2, 1 / std::sqrt(2.0))) < 1e-12);
    CHECK(std::abs(analytic_eigenfunction(h, unit, 2, -1 / std::sqrt(2.0))) < 1e-12);
    CHECK(analytic_eigenfunction(h, unit, 0, 0) == doctest::Approx(0.751125544464942).epsilon(1e-13));
    CHECK(analytic_eigenfunction(h, unit, 2, 0) < 0.0);
    const auto m = Potential::morse();
    CHECK_THROWS_AS(analytic_eigenfunction(m, unit, 5, 0), UnboundStateError);
}

TEST_CASE("analytic eigenfunctions are normalized, positive on the right and solve the equation") {
    const Potential models[] = {Potential::harmonic(), Potential::morse()};
    const GridSpec grids[] = {{-8, 8, 2001}, {-2, 24, 4001}};
    for (int k = 0; k < 2; ++k) {
        const auto x = grids[k].nodes();
        for (int n = 0; n < 4; ++n) {
            const double e = eigenenergy(models[k], unit, n).energy;
            auto psi = test::analytic_samples(models[k], unit, n, x);
            std::vector<double> sq;
            for (double p : psi) sq.push_back(p * p);
            CHECK(simpson(x, sq) == doctest::Approx(1.0).epsilon(1e-9));
            CHECK(analytic_eigenfunction(models[k], unit, n, models[k].kind() == PotentialKind::morse ? 4.0 : 3.5) > 0);
            const auto d2 = stencil_derivative(x, psi, 2, std::size_t{5});
            double worst = 0;
            for (std::size_t i = 2; i + 2 < x.size(); ++i)
                worst = std::max(worst, std::abs(-0.5 * d2[i] - (e - models[k].value(x[i])) * psi[i]));
            CHECK(worst <= 1e-5 * test::max_abs(psi));
        }
    }
}

TEST_CASE("hbar and mass scaling of the harmonic spectrum") {
    const auto h = Potential::harmonic(2.0, 3.0);
    const UnitsConfig u{0.5, 3.0};
    CHECK(eigenenergy(h, u, 1).energy == doctest::Approx(1.5));
    const auto x = linspace(-5, 5, 2001);
    auto psi = test::analytic_samples(h, u, 1, x);
    std::vector<double> sq;
    for (double p : psi) sq.push_back(p * p);
    CHECK(simpson(x, sq) == doctest::Approx(1.0).epsilon(1e-9));
}
