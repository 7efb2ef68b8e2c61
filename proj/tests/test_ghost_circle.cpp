#include <doctest.h>

#include <cmath>
#include <random>

#include "aubrykit/ghost_circle.hpp"
#include "helpers.hpp"

using namespace aubrykit;

namespace {
const double PI = std::acos(-1.0);

GhostCircle scalar_circle(double k) {
    auto one = PeriodLattice::make(1, {1}, {0});
    auto pot = fk_potential(FKSpec{1, TrigSeries::standard(k)});
    return assemble_ghost_circle(pot, one, {});
}
}  // namespace

TEST_CASE("index-0 skeleton") {
    auto one = PeriodLattice::make(1, {1}, {0});
    auto pot = fk_potential(FKSpec{1, TrigSeries::standard(1.0)});
    auto cats = find_critical_points(pot, one, {});
    auto skel = index0_skeleton(cats, one);
    REQUIRE(skel.size() == 1);
    CHECK(skel[0].config.values()[0] == doctest::Approx(0.5).epsilon(1e-9));

    // degenerate catalogs are rejected toward morse_approximation
    auto lat = PeriodLattice::make(1, {2}, {-1});
    auto free = fk_potential(FKSpec{1, TrigSeries::zero()});
    auto degenerate = find_critical_points(free, lat, {});
    CHECK_THROWS_AS(index0_skeleton(degenerate, lat), std::invalid_argument);

    // shift closure: p=2 skeleton holds both translates of the minimizer
    auto pot2 = fk_potential(FKSpec{1, TrigSeries::standard(1.0)});
    auto cats2 = find_critical_points(pot2, lat, {});
    auto skel2 = index0_skeleton(cats2, lat);
    REQUIRE(skel2.size() == 2);
    CHECK(compare(skel2[0].config, skel2[1].config) == Order::LessLess);
}

TEST_CASE("mountain pass saddle in the scalar chain") {
    auto one = PeriodLattice::make(1, {1}, {0});
    auto pot = fk_potential(FKSpec{1, TrigSeries::standard(1.0)});
    auto cats = find_critical_points(pot, one, {});
    auto skel = index0_skeleton(cats, one);
    REQUIRE(skel.size() == 1);
    CriticalPoint hi = skel[0];
    hi.config = hi.config.plus(1.0);
    CriticalPoint z = mountain_pass_saddle(pot, skel[0], hi, {});
    CHECK(z.config.values()[0] == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(z.index == 1);
    CHECK(z.eigenvalues[0] == doctest::Approx(-0.5).epsilon(1e-8));
    CHECK(z.action > skel[0].action);
}

TEST_CASE("symmetric onsite well pins the saddle at the symmetry point") {
    // V = c cos(4 pi x): minima at 0.25 and 0.75, saddles at 0 and 0.5
    TrigSeries v;
    v.terms.push_back({2, 0.01, 0.0});
    auto one = PeriodLattice::make(1, {1}, {0});
    auto pot = fk_potential(FKSpec{1, v});
    auto skel = index0_skeleton(find_critical_points(pot, one, {}), one);
    REQUIRE(skel.size() == 2);
    CHECK(skel[0].config.values()[0] == doctest::Approx(0.25).epsilon(1e-8));
    CHECK(skel[1].config.values()[0] == doctest::Approx(0.75).epsilon(1e-8));
    CriticalPoint z = mountain_pass_saddle(pot, skel[0], skel[1], {});
    CHECK(z.config.values()[0] == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("heteroclinics from the scalar saddle") {
    auto one = PeriodLattice::make(1, {1}, {0});
    auto pot = fk_potential(FKSpec{1, TrigSeries::standard(1.0)});
    ActionEvaluator ev(pot, one);
    Eigen::VectorXd z0(1);
    z0 << 1.0;
    CriticalPoint z = make_critical_point(ev, Configuration(one, z0));
    REQUIRE(z.index == 1);
    auto [down, up] = heteroclinics_from_saddle(pot, z, 1e-6, {});

    CHECK(down.e_max[0] == doctest::Approx(1.0));  // 1x1 Hessian
    CHECK(down.target[0] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(up.target[0] == doctest::Approx(1.5).epsilon(1e-9));
    CHECK(down.samples.front()[0] == doctest::Approx(1.0 - 1e-6).epsilon(1e-12));
    CHECK(up.samples.front()[0] == doctest::Approx(1.0 + 1e-6).epsilon(1e-12));

    // samples strictly ordered along the travel direction
    for (size_t i = 0; i + 1 < down.samples.size(); ++i)
        CHECK(down.samples[i + 1][0] < down.samples[i][0]);
    for (size_t i = 0; i + 1 < up.samples.size(); ++i)
        CHECK(up.samples[i + 1][0] > up.samples[i][0]);
}

TEST_CASE("scalar ghost circle is the constant family") {
    GhostCircle circle = scalar_circle(1.0);
    REQUIRE(circle.entries().size() == 2);
    CHECK(circle.minimizer().config.values()[0] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(circle.entries()[1].point.config.values()[0] == doctest::Approx(1.0).epsilon(1e-8));

    // evaluate(xi) = the constant configuration xi; projection is bijective
    for (double xi = 0.5; xi < 2.5; xi += 0.07) {
        Configuration c = circle.evaluate(xi);
        CHECK(c.values()[0] == doctest::Approx(xi).epsilon(1e-7));
    }
}

TEST_CASE("assembled circle on the two-site lattice") {
    auto lat = PeriodLattice::make(1, {2}, {-1});
    auto pot = fk_potential(FKSpec{1, TrigSeries::standard(1.0)});
    GhostCircle circle = assemble_ghost_circle(pot, lat, {});
    REQUIRE(circle.entries().size() == 4);  // two minimizers, two saddles per period

    // skeleton alternates and is strictly ordered
    for (size_t i = 0; i + 1 < circle.entries().size(); ++i) {
        CHECK(circle.entries()[i].is_saddle != circle.entries()[i + 1].is_saddle);
        CHECK(compare(circle.entries()[i].point.config, circle.entries()[i + 1].point.config) ==
              Order::LessLess);
    }

    // mountain-pass levels sit strictly above their neighbors
    for (size_t i = 0; i < circle.entries().size(); ++i) {
        if (!circle.entries()[i].is_saddle) continue;
        CHECK(circle.entries()[i].point.action >
              circle.entries()[(i + circle.entries().size() - 1) % circle.entries().size()]
                  .point.action);
    }

    // strict ordering along the parametrization
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unif(0.0, 2.0);
    for (int trial = 0; trial < 40; ++trial) {
        double a = unif(rng), b = unif(rng);
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        CHECK(compare(circle.evaluate(a), circle.evaluate(b)) == Order::LessLess);
    }

    // contains a stationary configuration (defect ~ 0 at the minimizer)
    CHECK(stationarity_defect(pot, circle.minimizer().config) <= 1e-20);

    // saddles have exactly one negative eigenvalue
    for (const auto& e : circle.entries())
        if (e.is_saddle) {
            CHECK(e.point.index == 1);
            CHECK(e.point.eigenvalues[0] < 0);
            CHECK(e.point.eigenvalues[1] > 0);
        }

    // flow invariance: flowed circle points stay on the circle
    for (double xi : {0.35, 0.8, 1.1}) {
        Configuration start = circle.evaluate(xi);
        for (double t : {0.1, 0.5, 1.0}) {
            Configuration moved = flow(pot, start, t).endpoint;
            Configuration back = circle.evaluate(moved.origin_value());
            CHECK(moved.sup_distance(back) < 2e-4);
        }
    }

    // shift invariance of the circle as a set
    for (const auto& sc : enumerate_shift_classes(*lat)) {
        for (double xi : {0.3, 0.9}) {
            Configuration moved = circle.evaluate(xi).shifted(sc.k, sc.l);
            Configuration back = circle.evaluate(moved.origin_value());
            CHECK(moved.sup_distance(back) < 2e-4);
        }
    }
}

TEST_CASE("t_map: fixed points, monotonicity, Lipschitz bound") {
    const double k = 1.0;
    GhostCircle circle = scalar_circle(k);

    // critical points are fixed under the time shift
    CHECK(circle.t_map(0.5, Index{0}) == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(circle.t_map(1.0, Index{0}) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(circle.t_map(1.5, Index{3}) == doctest::Approx(1.5).epsilon(1e-10));

    // monotone in xi on a grid
    double prev = -1e300;
    std::vector<double> tvals;
    for (int i = 0; i <= 40; ++i) {
        const double xi = 0.5 + i / 40.0;
        const double tv = circle.t_map(xi, Index{0});
        CHECK(tv >= prev - 1e-9);
        tvals.push_back(tv);
        prev = tv;
    }

    // Lipschitz constant 1/L, with L the parabolic Harnack constant at t=1
    // built from the exact FK twist bound and the global diagonal bound.
    const double lambda = 0.25;
    const double diag = k / 2 + 1.0;
    for (long long dist : {0LL, 1LL}) {
        const double L = 0.9 * std::exp(-diag) *
                         (dist == 0 ? 1.0 : std::pow(lambda / dist, dist));
        for (int i = 0; i + 1 <= 40; ++i) {
            const double xa = 0.5 + i / 40.0, xb = 0.5 + (i + 1) / 40.0;
            const double da = std::abs(circle.t_map(xb, Index{dist}) -
                                       circle.t_map(xa, Index{dist}));
            CHECK(da <= (xb - xa) / L + 1e-9);
        }
    }

    // vertical equivariance of the time-shifted parametrization
    CHECK(circle.t_map(1.73 + 1.0, Index{0}) ==
          doctest::Approx(circle.t_map(1.73, Index{0}) + 1.0).epsilon(1e-8));
}

TEST_CASE("ghost-circle limit diagnostic on a short convergent chain") {
    auto pot = fk_potential(FKSpec{1, TrigSeries::standard(0.5)});
    std::vector<LatticePtr> convergents = {
        PeriodLattice::make(1, {1}, {-1}),
        PeriodLattice::make(1, {2}, {-1}),
    };
    std::vector<double> grid;
    for (int i = 0; i < 8; ++i) grid.push_back(i / 8.0);
    MorseApproxSpec spec{100, 1e-3, 2, 3};
    AssembleOptions opts;
    opts.search.grid_per_dof = 5;
    auto rep = ghost_circle_limit(pot, convergents, grid, {Index{0}}, spec, opts);
    REQUIRE(rep.stages.size() == 2);
    CHECK(rep.stages[0].ok);
    CHECK(rep.stages[1].ok);
    REQUIRE(rep.deltas.size() == 1);
    CHECK(rep.achieved_delta >= 0.0);

    // identical lattices: deltas vanish up to the Morse perturbation size
    std::vector<LatticePtr> same = {
        PeriodLattice::make(1, {2}, {-1}),
        PeriodLattice::make(1, {2}, {-1}),
    };
    auto rep2 = ghost_circle_limit(pot, same, grid, {Index{0}}, spec, opts);
    REQUIRE(rep2.deltas.size() == 1);
    CHECK(rep2.deltas[0] < 5e-2);
}
