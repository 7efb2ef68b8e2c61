#include "aubrykit/aubry_mather.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace aubrykit {

namespace {

double config_x0(const Configuration& c) {
    Index zero(static_cast<size_t>(c.lattice().dim()), 0);
    return c.value_at(zero);
}

// Constrained Newton with the x_0 coordinate pinned; returns the full
// (unconstrained) stationarity defect at the constrained optimum.
double pinned_defect(const ActionEvaluator& ev, const Eigen::VectorXd& start, long long pin) {
    const long long n = start.size();
    Eigen::VectorXd v = start;
    Eigen::VectorXd g(n);
    Eigen::MatrixXd h(n, n);
    if (n > 1) {
        std::vector<long long> free_idx;
        for (long long i = 0; i < n; ++i)
            if (i != pin) free_idx.push_back(i);
        for (int it = 0; it < 80; ++it) {
            ev.gradient(v, g);
            Eigen::VectorXd gf(n - 1);
            for (long long i = 0; i < n - 1; ++i) gf[i] = g[free_idx[static_cast<size_t>(i)]];
            if (gf.norm() < 1e-14) break;
            ev.hessian(v, h);
            Eigen::MatrixXd hf(n - 1, n - 1);
            for (long long i = 0; i < n - 1; ++i)
                for (long long j = 0; j < n - 1; ++j)
                    hf(i, j) = h(free_idx[static_cast<size_t>(i)], free_idx[static_cast<size_t>(j)]);
            hf.diagonal().array() += 1e-12;
            Eigen::VectorXd step = hf.ldlt().solve(-gf);
            if (!step.allFinite()) break;
            const double len = step.cwiseAbs().maxCoeff();
            if (len > 0.5) step *= 0.5 / len;
            for (long long i = 0; i < n - 1; ++i) v[free_idx[static_cast<size_t>(i)]] += step[i];
        }
    }
    ev.gradient(v, g);
    return g.squaredNorm();
}

}  // namespace

double local_energy(const PotentialPtr& pot, const Configuration& config, const Index& site) {
    const auto& geom = pot->geometry();
    Eigen::VectorXd w(geom.size());
    Index probe(site.size());
    for (int oi = 0; oi < geom.size(); ++oi) {
        for (size_t c = 0; c < site.size(); ++c)
            probe[c] = site[c] + geom.offsets[static_cast<size_t>(oi)][c];
        w[oi] = config.value_at(probe);
    }
    return pot->value(w);
}

AubryMatherSet orbit_closure(const PotentialPtr& pot, const CriticalPoint& x,
                             const LatticePtr& lattice) {
    AubryMatherSet am;
    am.potential = pot;
    am.lattice = lattice;
    am.generator = x;
    for (const auto& sc : enumerate_shift_classes(*lattice)) {
        Configuration t = vertical_reduce(x.config.shifted(sc.k, sc.l));
        bool dup = false;
        for (const auto& e : am.elements)
            if (e.sup_distance(t) <= 1e-10) { dup = true; break; }
        if (!dup) am.elements.push_back(std::move(t));
    }
    std::sort(am.elements.begin(), am.elements.end(),
              [](const Configuration& a, const Configuration& b) {
                  return config_x0(a) < config_x0(b);
              });
    for (size_t i = 0; i + 1 < am.elements.size(); ++i) {
        const Order o = compare(am.elements[i], am.elements[i + 1]);
        if (o != Order::LessLess)
            throw std::runtime_error(
                "orbit_closure: translates not strictly ordered (generator is not minimizing)");
    }
    if (am.elements.size() > 1) {
        if (compare(am.elements.back(), am.elements.front().plus(1.0)) != Order::LessLess)
            throw std::runtime_error("orbit_closure: vertical wrap not strictly ordered");
    }
    return am;
}

std::vector<Gap> detect_gaps(const AubryMatherSet& am, double gap_tol) {
    if (am.elements.empty()) throw std::invalid_argument("detect_gaps: empty Aubry-Mather set");
    std::vector<Gap> gaps;
    ActionEvaluator ev(am.potential, am.lattice);
    Index zero(static_cast<size_t>(am.lattice->dim()), 0);
    long long rep0;
    Index m0;
    am.lattice->decompose(zero, rep0, m0);

    const size_t n = am.elements.size();
    for (size_t i = 0; i < n; ++i) {
        const Configuration& lo = am.elements[i];
        const Configuration hi =
            i + 1 < n ? am.elements[i + 1] : am.elements.front().plus(1.0);
        Gap g{lo, hi, 0.0, hi.values() - lo.values()};
        g.width = g.per_site.minCoeff();
        if (g.width <= gap_tol) continue;
        // Continuum check: pinned re-minimization at several interior x_0
        // levels; all defects vanishing exhibits minimizers filling the
        // candidate interval.
        bool continuum = true;
        for (double frac : {0.25, 0.5, 0.75}) {
            const Eigen::VectorXd probe = (1.0 - frac) * lo.values() + frac * hi.values();
            if (pinned_defect(ev, probe, rep0) > 1e-16) {
                continuum = false;
                break;
            }
        }
        if (continuum) continue;
        gaps.push_back(std::move(g));
    }
    return gaps;
}

SummabilityReport gap_summability_check(const Gap& gap, const LatticePtr& lattice, double tol) {
    SummabilityReport rep;
    const auto& omega = lattice->omega();
    for (const auto& b : lattice->domain()) {
        bool dup = false;
        for (const auto& r : rep.representatives) {
            Rational lv(0);
            for (size_t c = 0; c < b.size(); ++c)
                lv += omega[c] * Rational(b[c] - r[c]);
            if (rat_is_integer(lv)) { dup = true; break; }
        }
        if (!dup) rep.representatives.push_back(b);
    }
    for (const auto& r : rep.representatives)
        rep.sum += std::abs(gap.y_plus.value_at(r) - gap.y_minus.value_at(r));
    rep.verdict = rep.sum <= 1.0 + tol;
    return rep;
}

double renormalized_action(const PotentialPtr& pot, const Gap& gap, const Configuration& y) {
    const double slack = 1e-9;
    for (Eigen::Index i = 0; i < y.values().size(); ++i) {
        if (y.values()[i] < gap.y_minus.values()[i] - slack ||
            y.values()[i] > gap.y_plus.values()[i] + slack)
            throw std::invalid_argument("renormalized_action: y outside the order interval");
    }
    SummabilityReport reps = gap_summability_check(gap, y.lattice_ptr());
    double s = 0;
    for (const auto& j : reps.representatives)
        s += local_energy(pot, y, j) - local_energy(pot, gap.y_minus, j);
    return s;
}

GapSolutionResult gap_solution(const PotentialPtr& pot, const GhostCircle& circle, const Gap& gap,
                               const GapSolutionOptions& opts) {
    GapSolutionResult res;
    const double xi_lo = [&] {
        Index zero(static_cast<size_t>(gap.y_minus.lattice().dim()), 0);
        return gap.y_minus.value_at(zero);
    }();
    const double xi_hi = [&] {
        Index zero(static_cast<size_t>(gap.y_plus.lattice().dim()), 0);
        return gap.y_plus.value_at(zero);
    }();
    if (circle.evaluate(xi_lo).sup_distance(gap.y_minus) > opts.endpoint_tol ||
        circle.evaluate(xi_hi).sup_distance(gap.y_plus) > opts.endpoint_tol)
        throw std::invalid_argument("gap_solution: gap endpoints do not lie on the ghost circle");

    ActionEvaluator ev(pot, gap.y_minus.lattice_ptr());
    double best_w = -1e300;
    Configuration best = gap.y_minus;
    bool defects_vanish = true;
    int defect_samples = 0;
    for (int s = 0; s <= opts.samples + 1; ++s) {
        const double xi = xi_lo + (xi_hi - xi_lo) * s / (opts.samples + 1);
        Configuration y = circle.evaluate(xi);
        // clamp interpolation noise into the order interval
        Eigen::VectorXd v = y.values()
                                .cwiseMax(gap.y_minus.values())
                                .cwiseMin(gap.y_plus.values());
        y = Configuration(y.lattice_ptr(), v);
        const double wgap = renormalized_action(pot, gap, y);
        Eigen::VectorXd g;
        ev.gradient(y.values(), g);
        if (g.squaredNorm() > opts.defect_tol * opts.defect_tol) defects_vanish = false;
        ++defect_samples;
        if (wgap > best_w) {
            best_w = wgap;
            best = y;
        }
    }

    if (best_w > opts.pos_tol) {
        NewtonOptions nopts;
        nopts.grad_tol = 1e-13;
        NewtonResult nr = newton_polish(ev, best.values(), nopts);
        if (!nr.converged)
            throw std::runtime_error("gap_solution: stationarity polish of the maximizer failed");
        Configuration z(gap.y_minus.lattice_ptr(), nr.values);
        const double wz = renormalized_action(pot, gap, z);
        CriticalPoint cp = make_critical_point(ev, z);
        if (cp.grad_norm > opts.defect_tol)
            throw std::runtime_error("gap_solution: polished maximizer is not stationary");
        res.minimality = verify_global_minimizer(pot, cp, 3, 24, 123, 1e-9, opts.flow);
        res.solution = std::move(cp);
        res.renormalized = wz;
        res.foliated = false;
        return res;
    }
    if (defects_vanish && defect_samples >= opts.samples) {
        res.foliated = true;
        res.renormalized = best_w;
        return res;
    }
    throw std::runtime_error(
        "gap_solution: segment neither foliated nor carrying a positive renormalized maximum");
}

namespace {

class OnsiteAddedPotential final : public LocalPotential {
public:
    OnsiteAddedPotential(PotentialPtr base, TrigSeries v) : base_(std::move(base)), v_(std::move(v)) {}
    const WindowGeometry& geometry() const override { return base_->geometry(); }
    double value(const Eigen::VectorXd& w) const override {
        return base_->value(w) + v_.eval(w[geometry().center]);
    }
    double deriv1(int oi, const Eigen::VectorXd& w) const override {
        double s = base_->deriv1(oi, w);
        if (oi == geometry().center) s += v_.d1(w[oi]);
        return s;
    }
    double deriv2(int oi, int ok, const Eigen::VectorXd& w) const override {
        double s = base_->deriv2(oi, ok, w);
        if (oi == geometry().center && ok == geometry().center) s += v_.d2(w[oi]);
        return s;
    }
    std::string name() const override { return base_->name() + "+onsite"; }

private:
    PotentialPtr base_;
    TrigSeries v_;
};

}  // namespace

OscillationReport oscillation_gap_criterion(const PotentialPtr& pot_base, const TrigSeries& onsite,
                                            const LatticePtr& lattice, unsigned long long seed) {
    OscillationReport rep;
    rep.osc_v = onsite.oscillation();
    rep.fk_family = pot_base->name().rfind("frenkel_kontorova", 0) == 0;
    const int d = pot_base->dim();
    if (rep.fk_family) {
        rep.threshold = 2.0 * d;
    } else {
        // Sampled oscillation of S_j over order-bounded Birkhoff-like
        // windows: w_o = xi + <omega, o> + dev with |omega_c| <= 1, |dev| <= 1.
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> uxi(0.0, 1.0), uom(-1.0, 1.0), udev(-1.0, 1.0);
        const auto& geom = pot_base->geometry();
        double smin = 1e300, smax = -1e300;
        Eigen::VectorXd w(geom.size());
        for (int s = 0; s < 4000; ++s) {
            const double xi = uxi(rng);
            std::vector<double> om(static_cast<size_t>(d));
            for (auto& o : om) o = uom(rng);
            for (int oi = 0; oi < geom.size(); ++oi) {
                double v = xi;
                for (int c = 0; c < d; ++c)
                    v += om[static_cast<size_t>(c)] *
                         static_cast<double>(geom.offsets[static_cast<size_t>(oi)][static_cast<size_t>(c)]);
                if (oi != geom.center) v += udev(rng);
                w[oi] = v;
            }
            const double sv = pot_base->value(w);
            smin = std::min(smin, sv);
            smax = std::max(smax, sv);
        }
        rep.threshold = std::pow(2.0 * pot_base->range() + 1.0, d) * (smax - smin);
    }
    rep.criterion_fires = rep.osc_v > rep.threshold;
    rep.std_k_threshold = 8.0 * M_PI * M_PI;
    rep.percival_bound = 63.0 / 64.0;

    // Cross-check on the supplied lattice.
    PotentialPtr combined = rep.fk_family && onsite.empty()
                                ? pot_base
                                : (rep.fk_family
                                       ? fk_potential(FKSpec{d, onsite})
                                       : PotentialPtr(std::make_shared<OnsiteAddedPotential>(
                                             pot_base, onsite)));
    try {
        CriticalPoint min = minimize_action(combined, lattice, 8, seed);
        AubryMatherSet am = orbit_closure(combined, min, lattice);
        auto gaps = detect_gaps(am, 1e-6);
        for (const auto& g : gaps) rep.gap_widths.push_back(g.width);
        rep.foliation_confirmed = gaps.empty();
    } catch (const std::exception&) {
        rep.foliation_confirmed = false;
    }
    return rep;
}

}  // namespace aubrykit
