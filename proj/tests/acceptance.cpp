// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Tolerances are pinned here, not configurable.

#include <omp.h>

#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <vector>

#include "aubrykit/aubry_mather.hpp"
#include "aubrykit/flow.hpp"
#include "aubrykit/ghost_circle.hpp"
#include "aubrykit/minimizers.hpp"
#include "aubrykit/standard_map.hpp"

using namespace aubrykit;

namespace {

const double PI = std::acos(-1.0);
int g_failures = 0;

struct Checker {
    bool ok = true;
    std::string detail;
    void require(bool cond, const std::string& what) {
        if (!cond && ok) {
            ok = false;
            detail = what;
        }
    }
};

void run_criterion(int number, const std::string& name, double time_budget,
                   const std::function<void(Checker&)>& body) {
    Checker c;
    const double t0 = omp_get_wtime();
    try {
        body(c);
    } catch (const std::exception& e) {
        c.require(false, std::string("exception: ") + e.what());
    }
    const double elapsed = omp_get_wtime() - t0;
    if (time_budget > 0 && elapsed >= time_budget)
        c.require(false, "runtime budget exceeded");
    std::printf("[%s] criterion %2d: %s (%.2f s%s)\n", c.ok ? "PASS" : "FAIL", number,
                name.c_str(), elapsed,
                c.ok ? "" : (std::string("; ") + c.detail).c_str());
    std::fflush(stdout);
    if (!c.ok) ++g_failures;
}

}  // namespace

int main() {
    // 1. scalar FK pipeline
    run_criterion(1, "scalar FK pipeline: minimizer, saddle, circle, gap, gap solution", 2.0,
                  [](Checker& c) {
        auto one = PeriodLattice::make(1, {1}, {0});
        auto pot = fk_potential(FKSpec{1, TrigSeries::standard(1.0)});

        CriticalPoint min = minimize_action(pot, one, 8, 1);
        c.require(std::abs(min.config.values()[0] - 0.5) <= 1e-9, "minimizer not at 1/2");
        c.require(std::abs(min.action - (-1.0 / (8 * PI * PI))) <= 1e-10,
                  "minimum action != -1/(8 pi^2)");

        auto cps = find_critical_points(pot, one, {});
        c.require(cps.size() == 2, "catalog size != 2");
        const CriticalPoint* saddle = nullptr;
        for (const auto& cp : cps)
            if (cp.index == 1) saddle = &cp;
        c.require(saddle != nullptr, "no index-1 point");
        if (saddle) c.require(std::abs(saddle->config.values()[0]) <= 1e-8, "saddle not at 0");

        GhostCircle circle = assemble_ghost_circle(pot, one, {});
        for (double xi = 0.55; xi < 1.5; xi += 0.11) {
            Configuration e = circle.evaluate(xi);
            c.require(std::abs(e.values()[0] - xi) <= 1e-6, "circle is not the constant family");
        }

        AubryMatherSet am = orbit_closure(pot, min, one);
        auto gaps = detect_gaps(am);
        c.require(gaps.size() == 1, "expected exactly one gap");
        if (gaps.size() == 1) {
            c.require(std::abs(gaps[0].y_minus.values()[0] - 0.5) <= 1e-8 &&
                          std::abs(gaps[0].y_plus.values()[0] - 1.5) <= 1e-8,
                      "gap endpoints not [0.5, 1.5]");
            auto l1 = gap_summability_check(gaps[0], one);
            c.require(std::abs(l1.sum - 1.0) <= 1e-8, "gap l1 sum != 1");

            auto sol = gap_solution(pot, circle, gaps[0]);
            c.require(!sol.foliated && sol.solution.has_value(), "gap solution missing");
            if (sol.solution) {
                c.require(std::abs(sol.solution->config.values()[0] - 1.0) <= 1e-7,
                          "gap solution not at 1.0");
                c.require(std::abs(sol.renormalized - 1.0 / (4 * PI * PI)) <= 1e-8,
                          "renormalized action != 1/(4 pi^2)");
                c.require(!sol.minimality.verdict, "gap solution not classified non-minimizing");
            }
        }
    });

    // 2. degeneracy handling
    run_criterion(2, "degenerate free chain: eigenvalues {0,2}, Morse repair", 2.0,
                  [](Checker& c) {
        auto lat = PeriodLattice::make(1, {2}, {-1});
        auto free = fk_potential(FKSpec{1, TrigSeries::zero()});
        ActionEvaluator ev(free, lat);
        for (double xi : {0.0, 0.3, 0.77}) {
            CriticalPoint lin = make_critical_point(ev, Configuration::linear(lat, xi));
            c.require(std::abs(lin.eigenvalues[0]) <= 1e-10, "lowest eigenvalue != 0");
            c.require(std::abs(lin.eigenvalues[1] - 2.0) <= 1e-10, "top eigenvalue != 2");
        }
        auto degenerate = find_critical_points(free, lat, {});
        c.require(!degenerate.empty() && !is_morse(free, lat, degenerate),
                  "V == 0 action reported Morse");

        MorseApproxSpec spec{100, 1e-3, 1, 3};
        PotentialPtr fixed = morse_approximation(free, lat, spec);
        auto cats = find_critical_points(fixed, lat, {});
        c.require(!cats.empty() && is_morse(fixed, lat, cats),
                  "morse_approximation did not produce a Morse action");
    });

    // 3. comparison principle suite
    run_criterion(3, "comparison principle: 100 pairs x {0.1, 1, 5}", 20.0, [](Checker& c) {
        auto lat = PeriodLattice::make(1, {2}, {-1});
        auto pot = fk_potential(FKSpec{1, TrigSeries::standard(0.5)});
        std::mt19937_64 rng(2024);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        int checks = 0;
        for (int pair = 0; pair < 100; ++pair) {
            Configuration x = Configuration::linear(lat, unif(rng));
            for (Eigen::Index i = 0; i < x.values().size(); ++i)
                x.values()[i] += 0.3 * (unif(rng) - 0.5);
            Configuration y = x;
            if (pair % 2 == 0) {
                y.values()[pair % 2 == 0 ? 0 : 1] += 0.2 + 0.5 * unif(rng);
            } else {
                for (Eigen::Index i = 0; i < y.values().size(); ++i)
                    y.values()[i] += 0.1 + 0.4 * unif(rng);
            }
            for (double t : {0.1, 1.0, 5.0}) {
                auto r = comparison_check(pot, x, y, t);
                if (r.ordered && r.margin > 0) ++checks;
            }
        }
        c.require(checks == 300, "ordered margin failed in " + std::to_string(300 - checks) +
                                     " of 300 checks");
    });

    // 4. parabolic Harnack suite
    run_criterion(4, "parabolic Harnack: 100 Birkhoff pairs, distances {0,1,2}", 30.0,
                  [](Checker& c) {
        auto lat = PeriodLattice::make(1, {2}, {-1});
        auto pot = fk_potential(FKSpec{1, TrigSeries::standard(0.5)});
        std::mt19937_64 rng(77);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        int ok = 0, total = 0;
        for (int pair = 0; pair < 100; ++pair) {
            const double xi = unif(rng);
            Configuration x = Configuration::linear(lat, xi);
            Configuration y = x.plus(0.05 + 0.8 * unif(rng));
            for (long long dist : {0LL, 1LL, 2LL}) {
                auto h = parabolic_harnack_check(pot, x, y, 1.0, Index{dist}, Index{0});
                ++total;
                if (h.verdict) ++ok;
            }
        }
        c.require(ok == total, std::to_string(total - ok) + " of 300 Harnack checks failed");
    });

    // 5. energy identity
    run_criterion(5, "energy identity residual <= 1e-6 on 20 seeded flows", 0.0, [](Checker& c) {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> unif(-0.4, 0.4);
        int bad = 0;
        for (int trial = 0; trial < 20; ++trial) {
            const double k = trial % 2 == 0 ? 0.5 : 1.0;
            auto lat = trial % 3 == 0 ? PeriodLattice::make(1, {3}, {-1})
                                      : PeriodLattice::make(1, {2}, {-1});
            auto pot = fk_potential(FKSpec{1, TrigSeries::standard(k)});
            Configuration x = Configuration::linear(lat, unif(rng) + 0.5);
            for (Eigen::Index i = 0; i < x.values().size(); ++i) x.values()[i] += unif(rng);
            if (lyapunov_check(pot, x, 2.0) > 1e-6) ++bad;
        }
        c.require(bad == 0, std::to_string(bad) + " flows violated the 1e-6 residual");
    });

    // 6. derivative correctness
    run_criterion(6, "analytic derivatives vs finite differences on 50 configurations", 0.0,
                  [](Checker& c) {
        auto lat = PeriodLattice::make(1, {3}, {-1});
        std::vector<PotentialPtr> pots = {
            fk_potential(FKSpec{1, TrigSeries::standard(1.0)}),
            morse_perturbation(fk_potential(FKSpec{1, TrigSeries::standard(1.0)}), lat,
                               {100, 1e-3, 3, 3}),
        };
        std::mt19937_64 rng(6);
        std::uniform_real_distribution<double> unif(-0.5, 0.5);
        const double h = 1e-5;
        int bad = 0;
        for (int trial = 0; trial < 50; ++trial) {
            const auto& pot = pots[static_cast<size_t>(trial % 2)];
            ActionEvaluator ev(pot, lat);
            Configuration x = Configuration::linear(lat, unif(rng));
            for (Eigen::Index i = 0; i < x.values().size(); ++i) x.values()[i] += unif(rng);
            Eigen::VectorXd g;
            ev.gradient(x.values(), g);
            Eigen::MatrixXd hm;
            ev.hessian(x.values(), hm);
            Eigen::VectorXd t = x.values();
            Eigen::VectorXd gfd(g.size());
            for (Eigen::Index i = 0; i < g.size(); ++i) {
                t[i] = x.values()[i] + h;
                const double fp = ev.value(t);
                t[i] = x.values()[i] - h;
                const double fm = ev.value(t);
                t[i] = x.values()[i];
                gfd[i] = (fp - fm) / (2 * h);
            }
            bool ok = (g - gfd).norm() <= 1e-6 * std::max(1.0, gfd.norm());
            // Hessian against central differences of the analytic gradient
            // (the gradient itself is checked against values above).
            Eigen::MatrixXd hfd(g.size(), g.size());
            Eigen::VectorXd gp(g.size()), gm(g.size());
            for (Eigen::Index i = 0; i < g.size(); ++i) {
                t[i] = x.values()[i] + h;
                ev.gradient(t, gp);
                t[i] = x.values()[i] - h;
                ev.gradient(t, gm);
                t[i] = x.values()[i];
                hfd.col(i) = (gp - gm) / (2 * h);
            }
            ok = ok && (hm - hfd).norm() <= 1e-6 * std::max(1.0, hfd.norm());
            if (!ok) ++bad;
        }
        c.require(bad == 0, std::to_string(bad) + " of 50 configurations failed");
    });

    // 7. Aubry / ordering suite
    run_criterion(7, "minimizer translates ordered; refinement density to 1e-8", 0.0,
                  [](Checker& c) {
        auto pot = fk_potential(FKSpec{1, TrigSeries::standard(1.0)});
        std::vector<std::pair<long long, long long>> lattices = {{1, 0}, {2, -1}, {3, -1}};
        for (auto [p, q] : lattices) {
            auto lat = PeriodLattice::make(1, {p}, {q});
            CriticalPoint min = minimize_action(pot, lat, 10, 7);
            for (const auto& sc : enumerate_shift_classes(*lat)) {
                for (long long m = -1; m <= 1; ++m) {
                    const Rational total = sc.level + Rational(m);
                    if (total == Rational(0)) continue;
                    const Order o =
                        compare(min.config.shifted(sc.k, sc.l).plus(static_cast<double>(m)),
                                min.config);
                    c.require(o == Order::LessLess || o == Order::GreaterGreater,
                              "translate not strictly ordered");
                }
            }
            const double density = min.action / static_cast<double>(lat->domain_size());
            for (long long n : {2LL, 3LL}) {
                auto fine = lat->refined(n);
                CriticalPoint minf = minimize_action(pot, fine, 10, 7);
                const double densf = minf.action / static_cast<double>(fine->domain_size());
                c.require(std::abs(densf - density) <= 1e-8,
                          "refinement density mismatch at n=" + std::to_string(n));
            }
        }
    });

    // 8. twist-map correspondence
    run_criterion(8, "twist-map correspondence at p=3, q=-1, k=0.9", 0.0, [](Checker& c) {
        auto lat = PeriodLattice::make(1, {3}, {-1});
        TrigSeries v = TrigSeries::standard(0.9);
        auto pot = fk_potential(FKSpec{1, v});
        auto cps = find_critical_points(pot, lat, {});
        const CriticalPoint* stat = nullptr;
        for (const auto& cp : cps)
            if (cp.index == 1 && !cp.degenerate) stat = &cp;
        c.require(stat != nullptr, "no index-1 stationary configuration found");
        if (!stat) return;

        TwistOrbit orbit = orbit_from_configuration(stat->config, v, 3);
        c.require(orbit.max_residual <= 1e-9, "step residual above 1e-9");

        auto lift = iterate_lift(v, orbit.x[0], orbit.y[0], 300);
        double worst = 0;
        for (int i = 1; i <= 300; ++i) {
            const double expect = stat->config.value_at(Index{i});
            const double err = std::abs(lift[static_cast<size_t>(i)].first - expect);
            worst = std::max(worst, std::abs(err - std::round(err)));
        }
        c.require(worst <= 1e-7, "300-iteration reproduction above 1e-7");

        std::mt19937_64 rng(8);
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        for (int trial = 0; trial < 10; ++trial) {
            Eigen::Matrix2d J = standard_map_fd_jacobian(v, unif(rng), unif(rng));
            c.require(std::abs(J.determinant() - 1.0) <= 1e-12, "Jacobian determinant != 1");
        }
    });

    // 9. oscillation criterion
    run_criterion(9, "oscillation criterion: osc V = 2.5 forces gaps; V == 0 foliates", 0.0,
                  [](Checker& c) {
        const double k = 2.5 * 4 * PI * PI;  // osc V = k / (4 pi^2) = 2.5
        auto pot = fk_potential(FKSpec{1, TrigSeries::standard(k)});
        for (auto [p, q] : std::vector<std::pair<long long, long long>>{{1, 0}, {2, -1}}) {
            auto lat = PeriodLattice::make(1, {p}, {q});
            auto rep = oscillation_gap_criterion(pot, TrigSeries::standard(k), lat);
            c.require(rep.criterion_fires, "criterion silent at osc 2.5");
            c.require(!rep.gap_widths.empty(), "no gaps detected");
            for (double w : rep.gap_widths)
                c.require(w > 1e-3, "gap width below 1e-3");
            c.require(std::abs(rep.std_k_threshold - 8 * PI * PI) < 1e-12,
                      "k threshold metadata wrong");
            c.require(std::abs(rep.percival_bound - 63.0 / 64.0) < 1e-15,
                      "Percival metadata wrong");
        }
        auto free = fk_potential(FKSpec{1, TrigSeries::zero()});
        auto lat = PeriodLattice::make(1, {2}, {-1});
        auto rep = oscillation_gap_criterion(free, TrigSeries::zero(), lat);
        c.require(!rep.criterion_fires, "criterion fired for V == 0");
        c.require(rep.foliation_confirmed, "V == 0 foliation not confirmed");
    });

    // 10. ghost-circle convergence diagnostic
    run_criterion(10, "golden-mean ghost-circle limit: deltas settle below 1e-2", 120.0,
                  [](Checker& c) {
        auto pot = fk_potential(FKSpec{1, TrigSeries::standard(0.5)});
        std::vector<std::pair<long long, long long>> conv = {{1, 1}, {1, 2}, {2, 3},
                                                             {3, 5}, {5, 8}, {8, 13}};
        std::vector<LatticePtr> lattices;
        for (auto [num, den] : conv)
            lattices.push_back(PeriodLattice::make(1, {den}, {-num}));
        std::vector<double> grid;
        for (int i = 0; i < 32; ++i) grid.push_back(i / 32.0);
        MorseApproxSpec spec{100, 1e-3, 1, 3};
        AssembleOptions opts;
        opts.search.max_seeds = 400;
        auto rep = ghost_circle_limit(pot, lattices, grid, {Index{0}}, spec, opts);
        for (const auto& st : rep.stages)
            c.require(st.ok, "stage " + st.lattice_desc + " failed: " + st.error);
        c.require(rep.deltas.size() == 5, "expected 5 deltas");
        for (size_t i = 1; i + 1 < rep.deltas.size(); ++i)
            c.require(rep.deltas[i + 1] <= rep.deltas[i] + 1e-12,
                      "deltas not monotone after the first step");
        c.require(rep.achieved_delta >= 0 && rep.achieved_delta < 1e-2,
                  "final delta not below 1e-2");
    });

    std::printf("acceptance: %d of 10 criteria passed\n", 10 - g_failures);
    return g_failures == 0 ? 0 : 1;
}
