#include "aubrykit/minimizers.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace aubrykit {

Configuration vertical_reduce(const Configuration& x) {
    const double shift = std::floor(x.origin_value());
    return shift == 0.0 ? x : x.plus(-shift);
}

bool same_orbit(const Configuration& x, const Configuration& y, double tol) {
    if (!x.lattice().same_as(y.lattice())) return false;
    const auto classes = enumerate_shift_classes(x.lattice());
    for (const auto& sc : classes) {
        Configuration t = x.shifted(sc.k, sc.l);
        const double frac = y.origin_value() - t.origin_value();
        const double m = std::round(frac);
        if (std::abs(frac - m) > tol) continue;
        if (t.plus(m).sup_distance(y) <= tol) return true;
    }
    return false;
}

CriticalPoint minimize_action(const PotentialPtr& pot, const LatticePtr& lattice, int multistart,
                              unsigned long long seed, const FlowParams& params) {
    if (multistart < 1) throw std::invalid_argument("minimize_action: multistart >= 1 required");
    std::vector<Configuration> starts;
    for (int s = 0; s < multistart; ++s)
        starts.push_back(Configuration::linear(lattice, static_cast<double>(s) / multistart));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-0.25, 0.25);
    const int extra = std::max(2, multistart / 2);
    for (int s = 0; s < extra; ++s) {
        Configuration c = Configuration::linear(lattice, std::uniform_real_distribution<double>(0, 1)(rng));
        for (Eigen::Index i = 0; i < c.values().size(); ++i) c.values()[i] += unif(rng);
        starts.push_back(std::move(c));
    }

    std::vector<std::optional<CriticalPoint>> results(starts.size());
#pragma omp parallel for schedule(dynamic)
    for (long long s = 0; s < static_cast<long long>(starts.size()); ++s) {
        try {
            auto eq = flow_to_equilibrium(pot, starts[static_cast<size_t>(s)], params.grad_tol, params);
            if (eq.flow.converged) results[static_cast<size_t>(s)] = std::move(eq.candidate);
        } catch (const std::exception&) {
            // non-converged start: skipped
        }
    }

    std::optional<CriticalPoint> best;
    for (auto& r : results) {
        if (!r) continue;
        r->config = vertical_reduce(r->config);
        if (!best || r->action < best->action - 1e-14 ||
            (std::abs(r->action - best->action) <= 1e-14 && r->x0() < best->x0()))
            best = std::move(*r);
    }
    if (!best) throw std::runtime_error("minimize_action: no start converged");
    ActionEvaluator ev(pot, lattice);
    return make_critical_point(ev, best->config);
}

std::vector<CriticalPoint> find_critical_points(const PotentialPtr& pot, const LatticePtr& lattice,
                                                const CriticalSearchOptions& opts) {
    if (opts.grid_per_dof < 2)
        throw std::invalid_argument("find_critical_points: grid_per_dof >= 2 required");
    const long long dof = lattice->domain_size();
    ActionEvaluator ev(pot, lattice);

    // Seed offsets relative to x^{omega,0}, grid over [0,1)^dof capped at
    // max_seeds, then seeded random offsets.
    std::vector<Eigen::VectorXd> seeds;
    double total = std::pow(static_cast<double>(opts.grid_per_dof), static_cast<double>(dof));
    const Configuration lin = Configuration::linear(lattice, 0.0);
    if (total <= static_cast<double>(opts.max_seeds)) {
        const long long count = static_cast<long long>(std::llround(total));
        for (long long s = 0; s < count; ++s) {
            Eigen::VectorXd v = lin.values();
            long long rem = s;
            for (long long b = 0; b < dof; ++b) {
                v[b] += static_cast<double>(rem % opts.grid_per_dof) / opts.grid_per_dof;
                rem /= opts.grid_per_dof;
            }
            seeds.push_back(std::move(v));
        }
    } else {
        std::mt19937_64 rng(opts.seed);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        for (long long s = 0; s < opts.max_seeds; ++s) {
            Eigen::VectorXd v = lin.values();
            for (long long b = 0; b < dof; ++b) v[b] += unif(rng);
            seeds.push_back(std::move(v));
        }
    }

    NewtonOptions nopts;
    nopts.grad_tol = std::min(opts.grad_tol, 1e-12);
    nopts.max_iterations = 120;

    std::vector<char> ok(seeds.size(), 0);
    std::vector<Eigen::VectorXd> sols(seeds.size());
#pragma omp parallel for schedule(dynamic)
    for (long long s = 0; s < static_cast<long long>(seeds.size()); ++s) {
        NewtonResult r = newton_polish(ev, seeds[static_cast<size_t>(s)], nopts);
        if (r.grad_norm <= opts.grad_tol) {
            ok[static_cast<size_t>(s)] = 1;
            sols[static_cast<size_t>(s)] = std::move(r.values);
        }
    }

    std::vector<CriticalPoint> found;
    for (size_t s = 0; s < seeds.size(); ++s) {
        if (!ok[s]) continue;
        Configuration c = vertical_reduce(Configuration(lattice, sols[s]));
        bool dup = false;
        for (const auto& f : found)
            if (same_orbit(f.config, c, opts.dedupe_tol)) { dup = true; break; }
        if (dup) continue;
        found.push_back(make_critical_point(ev, c, opts.degeneracy_tol));
    }
    std::sort(found.begin(), found.end(),
              [](const CriticalPoint& a, const CriticalPoint& b) { return a.x0() < b.x0(); });
    return found;
}

GlobalMinimizerReport verify_global_minimizer(const PotentialPtr& pot, const CriticalPoint& x,
                                              long long refinement, int trials,
                                              unsigned long long seed, double tol,
                                              const FlowParams& params) {
    GlobalMinimizerReport rep;
    const LatticePtr base = x.config.lattice_ptr();
    const LatticePtr fine = base->refined(refinement);
    const Configuration xe = x.config.reencoded(fine);
    ActionEvaluator evf(pot, fine);
    const double wn = evf.value(xe.values());

    // r-interior of B_{np}: sites whose whole r-ball stays inside B_{np}.
    const int r = pot->range();
    std::vector<long long> interior;
    for (long long b = 0; b < fine->domain_size(); ++b) {
        bool inside = true;
        for (const auto& nb : ball_indices(fine->dim(), fine->domain()[static_cast<size_t>(b)], r)) {
            long long repi;
            Index m;
            fine->decompose(nb, repi, m);
            if (std::any_of(m.begin(), m.end(), [](long long v) { return v != 0; })) {
                inside = false;
                break;
            }
        }
        if (inside) interior.push_back(b);
    }

    std::mt19937_64 rng(seed);
    rep.worst_margin = 1e300;
    rep.perturbations_ok = true;
    if (!interior.empty()) {
        for (int t = 0; t < trials; ++t) {
            const double amp = (t % 3 == 0) ? 1.0 : (t % 3 == 1 ? 0.1 : 1e-3);
            std::uniform_real_distribution<double> unif(-amp, amp);
            Eigen::VectorXd v = xe.values();
            for (long long b : interior) v[b] += unif(rng);
            const double margin = evf.value(v) - wn;
            rep.worst_margin = std::min(rep.worst_margin, margin);
            if (margin < -tol) rep.perturbations_ok = false;
        }
    }

    rep.reminimization_ok = true;
    const int flow_trials = std::min(trials, 6);
    for (int t = 0; t < flow_trials; ++t) {
        std::uniform_real_distribution<double> unif(-0.35, 0.35);
        Eigen::VectorXd v = xe.values();
        for (Eigen::Index b = 0; b < v.size(); ++b) v[b] += unif(rng);
        auto eq = flow_to_equilibrium(pot, Configuration(fine, v), params.grad_tol, params);
        const double margin = eq.candidate.action - wn;
        rep.worst_margin = std::min(rep.worst_margin, margin);
        if (margin < -tol) rep.reminimization_ok = false;
    }

    rep.translates_ordered = true;
    for (const auto& sc : enumerate_shift_classes(*base)) {
        for (long long m = -1; m <= 1; ++m) {
            const Rational total = sc.level + Rational(m);
            if (total == Rational(0) && sc.level == Rational(0)) continue;  // identity
            const Configuration t = x.config.shifted(sc.k, sc.l).plus(static_cast<double>(m));
            const Order o = compare(t, x.config);
            if (total == Rational(0)) {
                // maximal periodicity on principal lattices
                if (base->principal() && o != Order::Equal) rep.translates_ordered = false;
            } else if (o != Order::LessLess && o != Order::GreaterGreater) {
                rep.translates_ordered = false;
            }
        }
    }

    rep.verdict = rep.perturbations_ok && rep.reminimization_ok && rep.translates_ordered;
    return rep;
}

MinMaxReport minmax_combine(const PotentialPtr& pot, const Configuration& x,
                            const Configuration& y) {
    if (!x.lattice().same_as(y.lattice()))
        throw std::invalid_argument("minmax_combine: lattice mismatch");
    MinMaxReport rep;
    rep.min_config = Configuration(x.lattice_ptr(), x.values().cwiseMin(y.values()));
    rep.max_config = Configuration(x.lattice_ptr(), x.values().cwiseMax(y.values()));
    ActionEvaluator ev(pot, x.lattice_ptr());
    rep.energy_slack = ev.value(x.values()) + ev.value(y.values()) -
                       ev.value(rep.min_config.values()) - ev.value(rep.max_config.values());
    return rep;
}

bool is_morse(const PotentialPtr& pot, const LatticePtr& lattice,
              const std::vector<CriticalPoint>& criticals, double tol) {
    (void)pot;
    (void)lattice;
    if (criticals.empty())
        throw std::invalid_argument("is_morse: empty critical list (search first)");
    for (const auto& cp : criticals)
        for (Eigen::Index i = 0; i < cp.eigenvalues.size(); ++i)
            if (std::abs(cp.eigenvalues[i]) <= tol) return false;
    return true;
}

PotentialPtr morse_approximation(const PotentialPtr& pot, const LatticePtr& lattice,
                                 const MorseApproxSpec& spec, int retries,
                                 const CriticalSearchOptions& search) {
    double last_eig = 0.0;
    for (int attempt = 0; attempt < retries; ++attempt) {
        MorseApproxSpec draw = spec;
        draw.seed = spec.seed + static_cast<unsigned long long>(attempt);
        PotentialPtr cand = morse_perturbation(pot, lattice, draw);
        if (!verify_conditions(*cand, 200, 2.0).all_pass()) continue;
        auto criticals = find_critical_points(cand, lattice, search);
        if (criticals.empty()) continue;
        double min_abs = 1e300;
        for (const auto& cp : criticals)
            for (Eigen::Index i = 0; i < cp.eigenvalues.size(); ++i)
                min_abs = std::min(min_abs, std::abs(cp.eigenvalues[i]));
        last_eig = min_abs;
        if (is_morse(cand, lattice, criticals, search.degeneracy_tol)) return cand;
    }
    std::ostringstream os;
    os << "morse_approximation: retry budget exhausted; last near-degenerate eigenvalue "
       << last_eig;
    throw std::runtime_error(os.str());
}

}  // namespace aubrykit
