#include <doctest.h>

#include <cmath>
#include <random>

#include "aubrykit/flow.hpp"
#include "aubrykit/minimizers.hpp"
#include "helpers.hpp"

using namespace aubrykit;

namespace {

const double PI = std::acos(-1.0);

// Fixed-step classic RK4 for the scalar onsite flow dc/dt = -V'(c): an
// integration route independent of the adaptive library stepper.
double scalar_reference(const TrigSeries& v, double c0, double t, int steps) {
    const double h = t / steps;
    double c = c0;
    auto f = [&](double x) { return -v.d1(x); };
    for (int s = 0; s < steps; ++s) {
        const double k1 = f(c);
        const double k2 = f(c + 0.5 * h * k1);
        const double k3 = f(c + 0.5 * h * k2);
        const double k4 = f(c + h * k3);
        c += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    return c;
}

Configuration constant_config(const LatticePtr& lat, double c) {
    return Configuration::linear(lat, c);
}

}  // namespace

TEST_CASE("stationary configurations do not move") {
    auto lat = PeriodLattice::make(1, {2}, {-1});
    auto pot = fk_potential(FKSpec{1, TrigSeries::zero()});
    Configuration lin = Configuration::linear(lat, 0.3);
    for (double t : {0.5, 3.0}) {
        FlowResult r = flow(pot, lin, t);
        CHECK(r.endpoint.sup_distance(lin) < 1e-12);
    }
    CHECK_THROWS_AS(flow(pot, lin, -1.0), std::invalid_argument);
}

TEST_CASE("scalar flow matches an independent fixed-step reference") {
    auto one = PeriodLattice::make(1, {1}, {0});
    TrigSeries v = TrigSeries::standard(1.0);
    auto pot = fk_potential(FKSpec{1, v});
    Eigen::VectorXd start(1);
    start << 0.25;
    FlowResult r = flow(pot, Configuration(one, start), 5.0);
    const double ref = scalar_reference(v, 0.25, 5.0, 200000);
    CHECK(r.endpoint.values()[0] == doctest::Approx(ref).epsilon(1e-7));
    // drift is toward the onsite minimum at 1/2
    CHECK(r.endpoint.values()[0] > 0.25);
}

TEST_CASE("flow is equivariant under shifts") {
    auto lat = PeriodLattice::make(1, {3}, {-1});
    auto pot = fk_potential(FKSpec{1, TrigSeries::standard(0.8)});
    std::mt19937_64 rng(19);
    Configuration x = testutil::random_config(lat, 0.2, 0.3, rng);
    for (const auto& sc : enumerate_shift_classes(*lat)) {
        FlowResult direct = flow(pot, x.shifted(sc.k, sc.l), 1.5);
        FlowResult swapped = flow(pot, x, 1.5);
        CHECK(direct.endpoint.sup_distance(swapped.endpoint.shifted(sc.k, sc.l)) < 1e-8);
    }
}

TEST_CASE("flow to equilibrium") {
    auto one = PeriodLattice::make(1, {1}, {0});
    auto pot = fk_potential(FKSpec{1, TrigSeries::standard(1.0)});

    Eigen::VectorXd v(1);
    v << 0.25;
    auto eq = flow_to_equilibrium(pot, Configuration(one, v), 1e-10);
    CHECK(eq.flow.converged);
    CHECK(eq.candidate.config.values()[0] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(eq.candidate.index == 0);

    // starting exactly at the saddle keeps the defect at zero
    Eigen::VectorXd s(1);
    s << 0.0;
    auto stay = flow_to_equilibrium(pot, Configuration(one, s), 1e-10);
    CHECK(stay.flow.converged);
    CHECK(std::abs(stay.candidate.config.values()[0]) < 1e-12);

    // V == 0: gradient flow of the convex quadratic lands on the linear family
    auto lat = PeriodLattice::make(1, {2}, {-1});
    auto free = fk_potential(FKSpec{1, TrigSeries::zero()});
    std::mt19937_64 rng(3);
    Configuration x = testutil::random_config(lat, 0.4, 0.45, rng);
    auto eq2 = flow_to_equilibrium(free, x, 1e-10);
    CHECK(eq2.flow.converged);
    CHECK(stationarity_defect(free, eq2.candidate.config) <= 1e-20);
    CHECK(std::abs(eq2.candidate.config.values()[1] - eq2.candidate.config.values()[0] - 0.5) <
          1e-8);
}

TEST_CASE("action trace is non-increasing") {
    auto lat = PeriodLattice::make(1, {2}, {-1});
    auto pot = fk_potential(FKSpec{1, TrigSeries::standard(1.0)});
    std::mt19937_64 rng(7);
    Configuration x = testutil::random_config(lat, 0.1, 0.4, rng);
    FlowResult r = flow(pot, x, 4.0);
    for (size_t i = 0; i + 1 < r.trace.size(); ++i)
        CHECK(r.trace[i + 1].action <= r.trace[i].action + 1e-10);
}

TEST_CASE("comparison principle") {
    auto lat = PeriodLattice::make(1, {2}, {-1});
    auto free = fk_potential(FKSpec{1, TrigSeries::zero()});
    std::mt19937_64 rng(11);
    Configuration x = testutil::random_config(lat, 0.2, 0.3, rng);

    // constant vertical offsets are flow-invariant under V == 0
    auto r = comparison_check(free, x, x.plus(1.0), 2.0);
    CHECK(r.ordered);
    CHECK(r.margin == doctest::Approx(1.0).epsilon(1e-9));

    // a single-site bump strictly orders all sites after flowing
    auto pot = fk_potential(FKSpec{1, TrigSeries::standard(0.5)});
    Configuration y = x;
    y.values()[0] += 0.4;
    REQUIRE(compare(x, y) == Order::Less);
    auto r2 = comparison_check(pot, x, y, 0.5);
    CHECK(r2.ordered);
    CHECK(r2.margin > 0.0);

    CHECK_THROWS_AS(comparison_check(pot, x, x, 1.0), std::invalid_argument);
}

TEST_CASE("order intervals are forward invariant") {
    auto lat = PeriodLattice::make(1, {2}, {-1});
    auto pot = fk_potential(FKSpec{1, TrigSeries::standard(0.9)});
    std::mt19937_64 rng(13);
    Configuration x = testutil::random_config(lat, 0.1, 0.2, rng);
    Configuration y = x.plus(0.8);
    Configuration mid = testutil::random_config(lat, 0.0, 0.0, rng);
    mid.values() = 0.5 * (x.values() + y.values());
    for (double t : {0.2, 1.0, 4.0}) {
        const Eigen::VectorXd fx = flow(pot, x, t).endpoint.values();
        const Eigen::VectorXd fy = flow(pot, y, t).endpoint.values();
        const Eigen::VectorXd fm = flow(pot, mid, t).endpoint.values();
        CHECK((fm - fx).minCoeff() >= -1e-10);
        CHECK((fy - fm).minCoeff() >= -1e-10);
    }
}

TEST_CASE("parabolic Harnack inequality with empirical constants") {
    auto lat = PeriodLattice::make(1, {2}, {-1});
    auto pot = fk_potential(FKSpec{1, TrigSeries::standard(0.5)});
    std::mt19937_64 rng(17);
    Configuration x = Configuration::linear(lat, 0.15);
    Configuration y = x.plus(0.35);

    for (long long dist : {0LL, 1LL, 2LL}) {
        auto h = parabolic_harnack_check(pot, x, y, 1.0, Index{dist}, Index{0});
        CHECK(h.verdict);
        CHECK(h.lambda == doctest::Approx(0.25).epsilon(1e-13));
        CHECK(h.lhs >= h.rhs);
    }
    CHECK_THROWS_AS(parabolic_harnack_check(pot, x, x, 1.0, Index{0}, Index{0}),
                    std::invalid_argument);
}

TEST_CASE("elliptic Harnack consequence on stationary translate pairs") {
    auto lat = PeriodLattice::make(1, {3}, {-1});
    auto pot = fk_potential(FKSpec{1, TrigSeries::standard(0.9)});
    CriticalPoint min = minimize_action(pot, lat, 8, 5);
    // strictly ordered stationary pair: the minimizer and a vertical translate
    const Configuration& x = min.config;
    Configuration y = x.plus(1.0);
    auto cond = verify_conditions(*pot, 2000, 2.0);
    const double lambda = cond.lambda_emp;
    const double c_emp = cond.c_emp;
    const int r = pot->range();
    const int d = pot->dim();
    for (long long n : {1LL, 2LL, 3LL}) {
        const double delta = std::pow(std::pow(2.0 * r, d) * c_emp / (2 * d * lambda),
                                      static_cast<double>(n));
        const double lhs = y.value_at({n}) - x.value_at({n});
        const double rhs = y.value_at({0}) - x.value_at({0});
        CHECK(lhs <= delta * rhs + 1e-12);
    }
}

TEST_CASE("energy identity") {
    auto one = PeriodLattice::make(1, {1}, {0});
    auto pot = fk_potential(FKSpec{1, TrigSeries::standard(1.0)});

    // stationary start: exact zero
    Eigen::VectorXd s(1);
    s << 0.5;
    CHECK(lyapunov_check(pot, Configuration(one, s), 1.0) < 1e-12);

    Eigen::VectorXd v(1);
    v << 0.25;
    CHECK(lyapunov_check(pot, Configuration(one, v), 3.0) <= 1e-6);

    // trapezoid over the recorded trace agrees at coarse tolerance
    FlowResult r = flow(pot, Configuration(one, v), 3.0);
    double integral = 0;
    for (size_t i = 0; i + 1 < r.trace.size(); ++i)
        integral += 0.5 * (r.trace[i].grad_sq + r.trace[i + 1].grad_sq) *
                    (r.trace[i + 1].t - r.trace[i].t);
    CHECK(std::abs(r.trace.back().action - r.trace.front().action + integral) < 1e-3);

    auto lat = PeriodLattice::make(1, {2}, {-1});
    std::mt19937_64 rng(23);
    auto pot2 = fk_potential(FKSpec{1, TrigSeries::standard(0.7)});
    for (int trial = 0; trial < 5; ++trial) {
        Configuration x = testutil::random_config(lat, 0.2, 0.4, rng);
        CHECK(lyapunov_check(pot2, x, 2.0) <= 1e-6);
    }
}
