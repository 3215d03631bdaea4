#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qhj/classical.hpp"
#include "qhj/numerics.hpp"
#include "support.hpp"

using namespace qhj;
using qhj::test::unit;

TEST_CASE("classical momentum branches") {
    const auto h = Potential::harmonic();
    CHECK(classical_momentum(h, unit, 2.5, 0).real() == doctest::Approx(2.2360680).epsilon(1e-8));
    CHECK(std::abs(classical_momentum(h, unit, 2.5, std::sqrt(5.0))) < 1e-7);
    const auto p3 = classical_momentum(h, unit, 2.5, 3);
    CHECK(p3.real() == 0.0);
    CHECK(p3.imag() == doctest::Approx(2.0));
    CHECK(classical_momentum(h, unit, 2.5, -4).imag() == doctest::Approx(std::sqrt(11.0)));
}

TEST_CASE("classical action of the oscillator") {
    const auto h = Potential::harmonic();
    const auto tp = turning_points(h, 2.5);
    const auto grid = linspace(tp.left, tp.right, 2001);
    const auto f = classical_action(h, unit, 2.5, grid);
    CHECK(f.w0.front() == 0.0);
    CHECK(f.w0.back() == doctest::Approx(2.5 * std::numbers::pi).epsilon(1e-10));
    CHECK(f.w0[1000] == doctest::Approx(1.25 * std::numbers::pi).epsilon(1e-10));
    CHECK(f.p_c.front() == doctest::Approx(0.0).scale(1.0));
    CHECK(f.p_c.back() == doctest::Approx(0.0).scale(1.0));
    for (std::size_t i = 1; i < grid.size(); ++i) CHECK(f.w0[i] >= f.w0[i - 1]);
    for (double p : f.p_c) CHECK(p >= 0.0);
}

TEST_CASE("dW0/dx equals p_C") {
    const auto m = Potential::morse();
    const double e = eigenenergy(m, unit, 2).energy;
    const auto tp = turning_points(m, e);
    const auto grid = linspace(tp.left, tp.right, 2001);
    const auto f = classical_action(m, unit, e, grid);
    for (std::size_t i = 100; i + 100 < grid.size(); i += 50)
        CHECK(stencil_derivative(grid, f.w0, i) == doctest::Approx(f.p_c[i]).epsilon(1e-6));
}

TEST_CASE("harmonic action matches (n+1/2) pi hbar at every level") {
    const auto h = Potential::harmonic();
    for (int n = 0; n < 6; ++n) {
        const double e = n + 0.5;
        const auto tp = turning_points(h, e);
        const auto f = classical_action(h, unit, e, linspace(tp.left, tp.right, 301));
        CHECK(std::abs(f.w0.back() - (n + 0.5) * std::numbers::pi) < 1e-8);
    }
}

TEST_CASE("classical action rejects grids outside the allowed region") {
    const auto h = Potential::harmonic();
    CHECK_THROWS_AS(classical_action(h, unit, 2.5, linspace(-3, 0, 11)), DomainError);
    CHECK_THROWS_AS(classical_action(h, unit, 2.5, std::vector<double>{0.0}), ArgumentError);
}
