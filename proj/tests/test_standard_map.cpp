#include <doctest.h>

#include <cmath>
#include <random>

#include "aubrykit/minimizers.hpp"
#include "aubrykit/standard_map.hpp"
#include "helpers.hpp"

using namespace aubrykit;

namespace {
const double PI = std::acos(-1.0);
}

TEST_CASE("standard map step") {
    // V == 0 is the integrable shear
    auto [x0, y0] = standard_map_step(TrigSeries::zero(), 0.3, 0.7);
    CHECK(x0 == doctest::Approx(1.0));
    CHECK(y0 == doctest::Approx(0.7));

    // critical points of V are fixed points on y = 0
    TrigSeries v = TrigSeries::standard(1.0);
    auto [xf, yf] = standard_map_step(v, 0.5, 0.0);
    CHECK(xf == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(yf == doctest::Approx(0.0).epsilon(1e-14));

    // displayed form for the standard onsite family:
    // (x + y - (k/2pi) sin 2pi x, y - (k/2pi) sin 2pi x)
    const double k = 1.7, x = 0.23, y = 0.41;
    TrigSeries vk = TrigSeries::standard(k);
    auto [X, Y] = standard_map_step(vk, x, y);
    const double kick = -(k / (2 * PI)) * std::sin(2 * PI * x);
    CHECK(X == doctest::Approx(x + y + kick).epsilon(1e-14));
    CHECK(Y == doctest::Approx(y + kick).epsilon(1e-14));
}

TEST_CASE("degree-one lift and twist positivity") {
    TrigSeries v = TrigSeries::standard(0.9);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unif(-2.0, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
        const double x = unif(rng), y = unif(rng);
        auto [X1, Y1] = standard_map_step(v, x + 1.0, y);
        auto [X0, Y0] = standard_map_step(v, x, y);
        CHECK(X1 == doctest::Approx(X0 + 1.0).epsilon(1e-12));
        CHECK(Y1 == doctest::Approx(Y0).epsilon(1e-12));

        Eigen::Matrix2d J = standard_map_fd_jacobian(v, x, y);
        CHECK(J(0, 1) == doctest::Approx(1.0).epsilon(1e-12));  // dX/dy = 1 > 0
    }
}

TEST_CASE("area preservation at finite-difference accuracy") {
    TrigSeries v = TrigSeries::standard(0.9);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int trial = 0; trial < 25; ++trial) {
        const double x = unif(rng), y = unif(rng);
        Eigen::Matrix2d J = standard_map_fd_jacobian(v, x, y);
        CHECK(std::abs(J.determinant() - 1.0) <= 1e-12);
    }
}

TEST_CASE("orbits from configurations") {
    // V == 0 linear: constant momentum, zero residual
    auto lat = PeriodLattice::make(1, {2}, {-1});
    Configuration lin = Configuration::linear(lat, 0.1);
    TwistOrbit shear = orbit_from_configuration(lin, TrigSeries::zero(), 6);
    for (double y : shear.y) CHECK(y == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(shear.max_residual < 1e-13);

    // scalar FK stationary point is a fixed point on the cylinder
    auto one = PeriodLattice::make(1, {1}, {0});
    Eigen::VectorXd half(1);
    half << 0.5;
    TwistOrbit fixed =
        orbit_from_configuration(Configuration(one, half), TrigSeries::standard(1.0), 4);
    for (double y : fixed.y) CHECK(std::abs(y) < 1e-14);
    CHECK(fixed.max_residual < 1e-14);

    // stationary configuration of a three-site chain: residual at solver level
    auto lat3 = PeriodLattice::make(1, {3}, {-1});
    TrigSeries v = TrigSeries::standard(0.9);
    auto pot = fk_potential(FKSpec{1, v});
    CriticalPoint min = minimize_action(pot, lat3, 10, 7);
    TwistOrbit orbit = orbit_from_configuration(min.config, v, 3);
    CHECK(orbit.max_residual <= 1e-9);
}

TEST_CASE("stationarity residual of sequences") {
    CHECK(stationarity_residual_1d({0.0, 0.4, 0.8, 1.2}, TrigSeries::zero()) ==
          doctest::Approx(0.0));
    TrigSeries v = TrigSeries::standard(1.0);
    CHECK(stationarity_residual_1d({0.5, 0.5, 0.5}, v) == doctest::Approx(0.0).epsilon(1e-15));
    // x == 0.25: residual 2 |V'(0.25)| = 1/(2 pi)
    CHECK(stationarity_residual_1d({0.25, 0.25, 0.25}, v) ==
          doctest::Approx(1.0 / (2 * PI)).epsilon(1e-12));
}

TEST_CASE("lattice stationarity and twist-map stationarity share the zero set") {
    auto lat3 = PeriodLattice::make(1, {3}, {-2});
    TrigSeries v = TrigSeries::standard(0.8);
    auto pot = fk_potential(FKSpec{1, v});
    CriticalPoint min = minimize_action(pot, lat3, 10, 9);
    std::vector<double> xs;
    for (int i = -1; i <= 4; ++i) xs.push_back(min.config.value_at(Index{i}));
    CHECK(stationarity_residual_1d(xs, v) <= 1e-9);

    // a non-stationary sequence has a visibly positive residual in both forms
    std::vector<double> off = xs;
    off[2] += 0.1;
    CHECK(stationarity_residual_1d(off, v) > 1e-3);
}

TEST_CASE("round trip: iterate the lift along a stationary configuration") {
    auto lat3 = PeriodLattice::make(1, {3}, {-1});
    TrigSeries v = TrigSeries::standard(0.9);
    auto pot = fk_potential(FKSpec{1, v});
    auto cps = find_critical_points(pot, lat3, {});
    REQUIRE_FALSE(cps.empty());
    // the index-1 stationary configuration carries the elliptic orbit
    const CriticalPoint* saddle = nullptr;
    for (const auto& cp : cps)
        if (cp.index == 1 && !cp.degenerate) saddle = &cp;
    REQUIRE(saddle != nullptr);

    TwistOrbit orbit = orbit_from_configuration(saddle->config, v, 3);
    REQUIRE(orbit.x.size() >= 2);
    auto lift = iterate_lift(v, orbit.x[0], orbit.y[0], 300);
    double worst = 0;
    for (int i = 1; i <= 300; ++i) {
        const double expect = saddle->config.value_at(Index{i});
        const double err = std::abs(lift[static_cast<size_t>(i)].first - expect);
        const double wrapped = std::abs(err - std::round(err));
        worst = std::max(worst, wrapped);
    }
    CHECK(worst <= 1e-7);
}

TEST_CASE("invariant curve verdict") {
    // k = 100 > 8 pi^2: oscillation exceeds 2
    auto big = invariant_curve_verdict(TrigSeries::standard(100.0));
    CHECK(big.none_exist);
    CHECK(big.osc_v == doctest::Approx(100.0 / (4 * PI * PI)).epsilon(1e-9));
    CHECK(big.k_threshold == doctest::Approx(8 * PI * PI));
    CHECK(big.percival_bound == doctest::Approx(63.0 / 64.0));

    auto silent = invariant_curve_verdict(TrigSeries::zero());
    CHECK_FALSE(silent.none_exist);

    // oscillation 2.5 fires the verdict
    TrigSeries v;
    v.terms.push_back({1, 1.25, 0.0});
    auto fired = invariant_curve_verdict(v);
    CHECK(fired.osc_v == doctest::Approx(2.5).epsilon(1e-9));
    CHECK(fired.none_exist);
}
