#include "aubrykit/ghost_circle.hpp"

#include <omp.h>

#include <boost/numeric/odeint.hpp>
#include <boost/numeric/odeint/external/eigen/eigen.hpp>

#include "aubrykit/stiff_runner.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace aubrykit {

namespace {

namespace odeint = boost::numeric::odeint;
using Stepper = odeint::runge_kutta_dopri5<Eigen::VectorXd, double, Eigen::VectorXd, double,
                                           odeint::vector_space_algebra>;
using DenseStepper = odeint::dense_output_runge_kutta<odeint::controlled_runge_kutta<Stepper>>;

struct NegGrad {
    const ActionEvaluator* ev;
    void operator()(const Eigen::VectorXd& x, Eigen::VectorXd& dxdt, double) const {
        ev->gradient(x, dxdt);
        dxdt = -dxdt;
    }
};

DenseStepper make_stepper(const FlowParams& p) {
    return odeint::make_dense_output(p.abs_tol, p.rel_tol, p.max_step, Stepper());
}

// Internal assembly integrations let the error control pick the step size;
// explicit-RK stability caps it at the fast modes anyway.
DenseStepper make_free_stepper(const FlowParams& p) {
    return odeint::make_dense_output(p.abs_tol, p.rel_tol, 50.0, Stepper());
}


double x0_of(const Configuration& c) {
    Index zero(static_cast<size_t>(c.lattice().dim()), 0);
    return c.value_at(zero);
}

long long zero_rep(const PeriodLattice& lat) {
    Index zero(static_cast<size_t>(lat.dim()), 0);
    long long rep;
    Index m;
    lat.decompose(zero, rep, m);
    return rep;
}

// Eigendata of the folded Hessian needed at saddles: smallest eigenvalue,
// spectral gap, and the Perron direction of -D^2 W (strictly positive).
struct SaddleEigen {
    double lambda_max = 0.0;  // positive eigenvalue of -D^2 W
    double gap = 0.0;
    Eigen::VectorXd e_max;
    bool positive = false;
    int index = 0;
};

SaddleEigen saddle_eigen(const ActionEvaluator& ev, const Eigen::VectorXd& vals, double tol) {
    Eigen::MatrixXd h;
    ev.hessian(vals, h);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    SaddleEigen se;
    const auto& lam = es.eigenvalues();
    se.index = 0;
    for (Eigen::Index i = 0; i < lam.size(); ++i)
        if (lam[i] < -tol) ++se.index;
    se.lambda_max = -lam[0];
    se.gap = lam.size() > 1 ? lam[1] - lam[0] : 1.0;
    Eigen::VectorXd v = es.eigenvectors().col(0);
    const Eigen::Index imax = [&] {
        Eigen::Index best = 0;
        for (Eigen::Index i = 1; i < v.size(); ++i)
            if (std::abs(v[i]) > std::abs(v[best])) best = i;
        return best;
    }();
    if (v[imax] < 0) v = -v;
    v /= v.maxCoeff();
    se.e_max = v;
    se.positive = v.minCoeff() > 0;
    return se;
}

// Flow classification against the two bracketing index-0 points. Returns 0
// for x_lo, 1 for x_hi. A genuinely different equilibrium raises
// CatalogIncompleteError; landing on the separating saddle classifies by the
// unstable direction.
struct ClassifyResult {
    int side = -1;                  // 0 = reaches a, 1 = reaches b
    double best_defect = 1e300;     // minimal squared gradient seen en route
    Eigen::VectorXd best_state;
};

ClassifyResult classify_flow(const ActionEvaluator& ev, const LatticePtr& lat,
                             Eigen::VectorXd start, const Eigen::VectorXd& a,
                             const Eigen::VectorXd& b, const AssembleOptions& opts) {
    NegGrad sys{&ev};
    const double gap = (b - a).cwiseAbs().maxCoeff();
    const double near = opts.classify_fraction * gap;
    // Tight tolerances: the velocity-sign decision must resolve slow-mode
    // signals far below the fast-mode scale.
    FlowParams cls = opts.flow;
    cls.abs_tol = std::min(cls.abs_tol, 1e-11);
    cls.rel_tol = std::min(cls.rel_tol, 1e-11);
    auto stepper = make_free_stepper(cls);
    stepper.initialize(start, 0.0, 1e-3);
    Eigen::VectorXd g;
    const double polish_thresh = std::max(1e-6, 1e-4 * gap);
    int cooldown = 0;
    ClassifyResult res;
    res.best_state = start;
    while (stepper.current_time() < opts.flow.max_time) {
        stepper.do_step(sys);
        const Eigen::VectorXd& x = stepper.current_state();
        const double da = (x - a).cwiseAbs().maxCoeff();
        const double db = (x - b).cwiseAbs().maxCoeff();
        if (da <= near && db > 2.0 * da) {
            res.side = 0;
            return res;
        }
        if (db <= near && da > 2.0 * db) {
            res.side = 1;
            return res;
        }
        ev.gradient(x, g);
        const double defect = g.squaredNorm();
        if (defect < res.best_defect) {
            res.best_defect = defect;
            res.best_state = x;
        }
        // A strictly one-signed velocity -grad W makes the trajectory
        // componentwise monotone for all later times (comparison principle),
        // which decides its side immediately. The margin sits above the
        // integration noise floor.
        const double sign_margin = 3e-11;
        if (g.maxCoeff() < -sign_margin) {
            res.side = 1;  // moving strictly up
            return res;
        }
        if (g.minCoeff() > sign_margin) {
            res.side = 0;  // moving strictly down
            return res;
        }
        if (cooldown > 0) --cooldown;
        if (g.norm() <= polish_thresh && cooldown == 0) {
            // Near some critical point: polish and decide, instead of
            // waiting out a small spectral gap.
            NewtonOptions nopts;
            nopts.grad_tol = 1e-13;
            NewtonResult nr = newton_polish(ev, x, nopts);
            if (!nr.converged) {
                cooldown = 200;
                continue;
            }
            const Eigen::VectorXd& z = nr.values;
            if ((z - a).cwiseAbs().maxCoeff() <= opts.match_tol * std::max(1.0, gap)) {
                res.side = 0;
                return res;
            }
            if ((z - b).cwiseAbs().maxCoeff() <= opts.match_tol * std::max(1.0, gap)) {
                res.side = 1;
                return res;
            }
            Configuration zc(lat, z);
            const auto se = saddle_eigen(ev, z, 1e-10);
            if (se.index == 0)
                throw CatalogIncompleteError(
                    "basin bisection reached an index-0 point missing from the skeleton",
                    std::move(zc));
            // Passing a saddle: the trajectory ends on the side selected by
            // its unstable-direction component.
            res.best_defect = 0.0;
            res.best_state = z;
            const double proj = se.e_max.dot(x - z);
            if (std::abs(proj) > 1e-13) {
                res.side = proj >= 0 ? 1 : 0;
                return res;
            }
            if (g.norm() <= 1e-14) {
                // Numerically pinned on the saddle: the midpoint equals the
                // basin boundary to machine precision; either side keeps the
                // bracket valid.
                res.side = 0;
                return res;
            }
            cooldown = 40;
        }
    }
    throw std::runtime_error("classify_flow: no decision within max_time");
}

Eigen::VectorXd min_defect_state(const ActionEvaluator& ev, Eigen::VectorXd start,
                                 const AssembleOptions& opts) {
    StiffOrbitRunner runner(ev, std::max(opts.flow.abs_tol, 1e-10), std::max(opts.flow.rel_tol, 1e-10));
    runner.initialize(start, 0.0, 1e-3);
    Eigen::VectorXd g;
    ev.gradient(start, g);
    double best = g.squaredNorm();
    Eigen::VectorXd best_state = start;
    for (long step = 0; step < 40000 && runner.current_time() < 1e9; ++step) {
        runner.do_step();
        const Eigen::VectorXd x = runner.current_state();
        ev.gradient(x, g);
        const double d = g.squaredNorm();
        if (d < best) {
            best = d;
            best_state = x;
            if (best < 1e-22) break;  // sitting on the critical point already
        } else if (d > 100.0 * best && best < 1e-8) {
            break;  // left the saddle region after closest approach
        }
    }
    return best_state;
}

// Try to promote a near-critical state into the verified index-1 mountain
// pass between x_lo and x_hi.
std::optional<CriticalPoint> try_saddle(const ActionEvaluator& ev, const LatticePtr& lat,
                                        const Eigen::VectorXd& near_state,
                                        const CriticalPoint& x_lo, const CriticalPoint& x_hi) {
    NewtonOptions nopts;
    nopts.grad_tol = 1e-13;
    nopts.max_iterations = 200;
    NewtonResult nr = newton_polish(ev, near_state, nopts);
    if (!nr.converged) return std::nullopt;
    CriticalPoint z = make_critical_point(ev, Configuration(lat, nr.values));
    if (z.index != 1 || z.degenerate) return std::nullopt;
    if (compare(x_lo.config, z.config) != Order::LessLess ||
        compare(z.config, x_hi.config) != Order::LessLess)
        return std::nullopt;
    if (!(z.action > std::max(x_lo.action, x_hi.action))) return std::nullopt;
    const auto se = saddle_eigen(ev, z.config.values(), 1e-12);
    if (!se.positive || se.gap <= 1e-12) return std::nullopt;
    return z;
}

}  // namespace

std::vector<CriticalPoint> index0_skeleton(const std::vector<CriticalPoint>& criticals,
                                           const LatticePtr& lattice, double dedupe_tol) {
    for (const auto& cp : criticals)
        if (cp.degenerate)
            throw std::invalid_argument(
                "index0_skeleton: degenerate critical point in catalog; apply morse_approximation "
                "first");
    std::vector<CriticalPoint> out;
    const auto classes = enumerate_shift_classes(*lattice);
    for (const auto& cp : criticals) {
        if (cp.index != 0) continue;
        for (const auto& sc : classes) {
            Configuration t = vertical_reduce(cp.config.shifted(sc.k, sc.l));
            bool dup = false;
            for (const auto& have : out)
                if (have.config.sup_distance(t) <= dedupe_tol) { dup = true; break; }
            if (dup) continue;
            CriticalPoint entry = cp;
            entry.config = std::move(t);
            out.push_back(std::move(entry));
        }
    }
    std::sort(out.begin(), out.end(), [](const CriticalPoint& a, const CriticalPoint& b) {
        return x0_of(a.config) < x0_of(b.config);
    });
    for (size_t i = 0; i + 1 < out.size(); ++i)
        if (compare(out[i].config, out[i + 1].config) != Order::LessLess)
            throw std::runtime_error("index0_skeleton: entries are not strictly ordered");
    if (!out.empty() &&
        compare(out.back().config, out.front().config.plus(1.0)) != Order::LessLess)
        throw std::runtime_error("index0_skeleton: vertical wrap not strictly ordered");
    return out;
}

CriticalPoint mountain_pass_saddle(const PotentialPtr& pot, const CriticalPoint& x_lo,
                                   const CriticalPoint& x_hi, const AssembleOptions& opts) {
    if (compare(x_lo.config, x_hi.config) != Order::LessLess)
        throw std::invalid_argument("mountain_pass_saddle: requires x_lo << x_hi");
    const LatticePtr lat = x_lo.config.lattice_ptr();
    ActionEvaluator ev(pot, lat);
    const Eigen::VectorXd a = x_lo.config.values();
    const Eigen::VectorXd b = x_hi.config.values();

    auto point = [&](double s) -> Eigen::VectorXd { return (1.0 - s) * a + s * b; };

    // Coarse scan: exactly one basin transition expected along the segment.
    std::vector<int> cls(static_cast<size_t>(opts.coarse_scan));
    for (int j = 0; j < opts.coarse_scan; ++j) {
        const double s = static_cast<double>(j + 1) / (opts.coarse_scan + 1);
        auto r = classify_flow(ev, lat, point(s), a, b, opts);
        cls[static_cast<size_t>(j)] = r.side;
        if (r.best_defect <= 1e-10) {
            if (auto z = try_saddle(ev, lat, r.best_state, x_lo, x_hi)) return *z;
        }
    }
    int transitions = 0;
    int prev = 0;
    double lo = 0.0, hi = 1.0;
    for (int j = 0; j < opts.coarse_scan; ++j) {
        const double s = static_cast<double>(j + 1) / (opts.coarse_scan + 1);
        if (cls[static_cast<size_t>(j)] != prev) {
            ++transitions;
            hi = s;
        } else if (transitions == 0) {
            lo = s;
        }
        prev = cls[static_cast<size_t>(j)];
    }
    if (prev != 1) ++transitions;  // segment must end in x_hi's basin
    if (transitions != 1)
        throw std::runtime_error(
            "mountain_pass_saddle: multiple basin-boundary crossings at scan resolution; the "
            "index-0 catalog is incomplete");

    for (int it = 0; it < opts.bisection_steps; ++it) {
        const double mid = 0.5 * (lo + hi);
        auto r = classify_flow(ev, lat, point(mid), a, b, opts);
        // Near-boundary trajectories hug the basin boundary and pass close to
        // the separating saddle: polish as soon as one gets close enough.
        if (r.best_defect <= 1e-10) {
            if (auto z = try_saddle(ev, lat, r.best_state, x_lo, x_hi)) return *z;
        }
        if (r.side == 0)
            lo = mid;
        else
            hi = mid;
    }

    const Eigen::VectorXd near_saddle = min_defect_state(ev, point(0.5 * (lo + hi)), opts);
    if (auto z = try_saddle(ev, lat, near_saddle, x_lo, x_hi)) return *z;
    throw std::runtime_error(
        "mountain_pass_saddle: boundary point did not polish to a nondegenerate index-1 "
        "configuration strictly between the endpoints");
}

std::pair<Heteroclinic, Heteroclinic> heteroclinics_from_saddle(const PotentialPtr& pot,
                                                                const CriticalPoint& z,
                                                                double epsilon,
                                                                const AssembleOptions& opts) {
    if (z.index != 1)
        throw std::invalid_argument("heteroclinics_from_saddle: saddle must have index 1");
    const LatticePtr lat = z.config.lattice_ptr();
    ActionEvaluator ev(pot, lat);
    const auto se = saddle_eigen(ev, z.config.values(), 1e-12);
    if (!se.positive)
        throw std::runtime_error("heteroclinics_from_saddle: e_max not strictly positive");

    auto integrate_branch = [&](int dir) -> Heteroclinic {
        Heteroclinic h;
        h.direction = dir;
        h.epsilon = epsilon;
        h.lambda_max = se.lambda_max;
        h.e_max = se.e_max;
        h.saddle = z.config.values();
        h.times.push_back(0.0);
        h.samples.push_back(z.config.values() + dir * epsilon * se.e_max);

        // The sub-launch stretch is the linear escape along e_max; seed the
        // integrator at a finite amplitude and keep analytic knots below it.
        const double amp0 =
            std::max(epsilon, epsilon * (opts.launch_fraction / opts.epsilon_factor));
        if (amp0 > epsilon * (1.0 + 1e-12)) {
            const int analytic_knots = 8;
            for (int j = 1; j <= analytic_knots; ++j) {
                const double aj =
                    epsilon * std::pow(amp0 / epsilon, static_cast<double>(j) / analytic_knots);
                h.times.push_back(std::log(aj / epsilon) / se.lambda_max);
                h.samples.push_back(z.config.values() + dir * aj * se.e_max);
            }
        }
        h.seed_index = static_cast<int>(h.samples.size()) - 1;
        const Eigen::VectorXd start = h.samples.back();
        const double t_seed = h.times.back();

        StiffOrbitRunner runner(ev, std::max(opts.flow.abs_tol, 1e-10),
                                std::max(opts.flow.rel_tol, 1e-10));
        runner.initialize(start, t_seed, 1e-4);
        Eigen::VectorXd g;
        const double keep_dx = 1e-3;
        bool converged = false;
        double g_peak = 0.0;
        for (long step = 0; step < 200000 && runner.current_time() - t_seed < 1e9; ++step) {
            runner.do_step();
            const Eigen::VectorXd x = runner.current_state();
            if ((x - h.samples.back()).cwiseAbs().maxCoeff() >= keep_dx) {
                h.times.push_back(runner.current_time());
                h.samples.push_back(x);
            }
            ev.gradient(x, g);
            const double gn = g.norm();
            g_peak = std::max(g_peak, gn);
            if (gn <= opts.flow.grad_tol) {
                converged = true;
                break;
            }
            // Inside the endpoint's linear regime the remaining approach is
            // exponential with the endpoint's own rate; its tail is carried
            // analytically, so stop once a polish confirms the contraction.
            if (gn <= 1e-5 && g_peak >= 30.0 * gn) {
                NewtonOptions nopts;
                nopts.grad_tol = 1e-13;
                NewtonResult nr = newton_polish(ev, x, nopts);
                if (nr.converged && (nr.values - x).cwiseAbs().maxCoeff() <= 0.05) {
                    converged = true;
                    break;
                }
            }
        }
        if (!converged)
            throw std::runtime_error("heteroclinics_from_saddle: branch did not converge");
        if (h.times.back() < runner.current_time()) {
            h.times.push_back(runner.current_time());
            h.samples.push_back(runner.current_state());
        }

        NewtonOptions nopts;
        nopts.grad_tol = 1e-13;
        NewtonResult nr = newton_polish(ev, runner.current_state(), nopts);
        CriticalPoint end = make_critical_point(ev, Configuration(lat, nr.values));
        if (end.index != 0)
            throw CatalogIncompleteError(
                "heteroclinics_from_saddle: endpoint is not an index-0 point",
                Configuration(lat, nr.values));
        h.target = nr.values;
        h.target_rate = end.eigenvalues[0];
        return h;
    };

    Heteroclinic down = integrate_branch(-1);
    Heteroclinic up = integrate_branch(+1);
    return {std::move(down), std::move(up)};
}

GhostCircle::GhostCircle(PotentialPtr pot, LatticePtr lattice, std::vector<Entry> entries,
                         std::vector<std::pair<Heteroclinic, Heteroclinic>> heteroclinics)
    : pot_(std::move(pot)),
      lat_(std::move(lattice)),
      entries_(std::move(entries)),
      hets_(std::move(heteroclinics)) {
    if (entries_.empty()) throw std::invalid_argument("GhostCircle: empty skeleton");
    ev_ = std::make_shared<ActionEvaluator>(pot_, lat_);
    reintegrate_params_.abs_tol = 1e-11;
    reintegrate_params_.rel_tol = 1e-11;
}

const CriticalPoint& GhostCircle::minimizer() const {
    const CriticalPoint* best = nullptr;
    for (const auto& e : entries_)
        if (!e.is_saddle && (!best || e.point.action < best->action)) best = &e.point;
    if (!best) throw std::logic_error("GhostCircle: no index-0 entry");
    return *best;
}

GhostCircle::Location GhostCircle::locate(double xi) const {
    const long long r0 = zero_rep(*lat_);
    const double base = entries_.front().point.config.values()[r0];
    Location loc;
    loc.vertical = static_cast<long long>(std::floor(xi - base));
    const double xr = xi - static_cast<double>(loc.vertical);
    // xr in [base, base+1)
    const double snap = 1e-10;
    int seg = -1;
    for (size_t j = 0; j < entries_.size(); ++j) {
        const double ex = entries_[j].point.config.values()[r0];
        if (std::abs(xr - ex) <= snap) {
            loc.entry = static_cast<int>(j);
            return loc;
        }
        if (ex < xr) seg = static_cast<int>(j);
    }
    if (std::abs(xr - (entries_.front().point.config.values()[r0] + 1.0)) <= snap) {
        loc.entry = 0;
        loc.vertical += 1;
        return loc;
    }
    if (seg < 0) throw std::logic_error("GhostCircle::locate: xi below the base entry");
    const Entry& left = entries_[static_cast<size_t>(seg)];
    if (left.is_saddle) {
        loc.het = left.het;
        loc.up = true;
    } else {
        const size_t right = (static_cast<size_t>(seg) + 1) % entries_.size();
        loc.het = entries_[right].het;
        loc.up = false;
    }
    return loc;
}

Configuration GhostCircle::evaluate(double xi) const {
    const Location loc = locate(xi);
    const double m = static_cast<double>(loc.vertical);
    if (loc.entry >= 0)
        return entries_[static_cast<size_t>(loc.entry)].point.config.plus(m);

    const Heteroclinic& h = het(loc.het, loc.up);
    const long long r0 = zero_rep(*lat_);
    const double xr = xi - m;

    // Knots in increasing x0: saddle, launch, samples..., target for "up";
    // target, samples reversed, launch, saddle for "down". Piecewise linear.
    auto knot_x0 = [&](long long i) -> double {
        // i in [-1, n]: -1 = saddle side, n = target side (travel order)
        if (i < 0) return h.saddle[r0];
        if (i >= static_cast<long long>(h.samples.size())) return h.target[r0];
        return h.samples[static_cast<size_t>(i)][r0];
    };
    auto knot_state = [&](long long i) -> Eigen::VectorXd {
        if (i < 0) return h.saddle;
        if (i >= static_cast<long long>(h.samples.size())) return h.target;
        return h.samples[static_cast<size_t>(i)];
    };
    const long long n = static_cast<long long>(h.samples.size());
    // travel order has x0 moving in h.direction; binary-search linearly (the
    // knot count is modest).
    long long a = -1, b = n;
    // ensure xr is within [min,max] of this segment
    for (long long i = -1; i < n; ++i) {
        const double x0a = knot_x0(i), x0b = knot_x0(i + 1);
        const double lo = std::min(x0a, x0b), hi = std::max(x0a, x0b);
        if (xr >= lo - 1e-12 && xr <= hi + 1e-12) {
            a = i;
            b = i + 1;
            break;
        }
    }
    if (a == -1 && b == n) {
        // numerical edge: clamp to the nearer endpoint of the segment
        const double dsad = std::abs(xr - h.saddle[r0]);
        const double dtar = std::abs(xr - h.target[r0]);
        Eigen::VectorXd v = dsad < dtar ? h.saddle : h.target;
        return Configuration(lat_, v).plus(m);
    }
    const double x0a = knot_x0(a), x0b = knot_x0(b);
    const double denom = x0b - x0a;
    const double w = std::abs(denom) < 1e-300 ? 0.0 : (xr - x0a) / denom;
    Eigen::VectorXd v = (1.0 - w) * knot_state(a) + w * knot_state(b);
    return Configuration(lat_, v).plus(m);
}

Eigen::VectorXd GhostCircle::state_at_time(const Heteroclinic& h, double t) const {
    const double t_seed = h.times[static_cast<size_t>(h.seed_index)];
    if (t <= t_seed)
        return h.saddle + h.direction * h.epsilon * std::exp(h.lambda_max * t) * h.e_max;
    if (t >= h.times.back()) {
        const double decay = std::exp(-h.target_rate * (t - h.times.back()));
        return h.target + decay * (h.samples.back() - h.target);
    }
    const auto it = std::upper_bound(h.times.begin(), h.times.end(), t);
    const size_t j = static_cast<size_t>(std::distance(h.times.begin(), it)) - 1;
    const double dt = t - h.times[j];
    if (dt <= 1e-13) return h.samples[j];
    StiffOrbitRunner runner(*ev_, reintegrate_params_.abs_tol, reintegrate_params_.rel_tol);
    runner.initialize(h.samples[j], 0.0, std::min(dt, 1e-3));
    while (runner.current_time() < dt) runner.do_step();
    return runner.state_at(dt);
}

double GhostCircle::t_map(double xi, const Index& k) const {
    const Location loc = locate(xi);
    const double m = static_cast<double>(loc.vertical);
    if (loc.entry >= 0)
        return entries_[static_cast<size_t>(loc.entry)].point.config.plus(m).value_at(k);

    const Heteroclinic& h = het(loc.het, loc.up);
    const long long r0 = zero_rep(*lat_);
    const double xr = xi - m;

    // Orbit time of the located configuration.
    double t_xi;
    const double seed_x0 = h.samples[static_cast<size_t>(h.seed_index)][r0];
    const double last_x0 = h.samples.back()[r0];
    const double target_x0 = h.target[r0];
    const double dir = static_cast<double>(h.direction);
    if (dir * (xr - seed_x0) < 0.0) {
        // Between the saddle and the integration seed: linearized escape.
        const double rho = dir * (xr - h.saddle[r0]) / (h.epsilon * h.e_max[r0]);
        const double clamped = std::max(rho, 1e-300);
        t_xi = std::log(clamped) / h.lambda_max;
    } else if (dir * (xr - last_x0) >= 0.0) {
        // Endpoint tail: exponential approach at the target's slowest rate.
        const double num = target_x0 - xr;
        const double den = target_x0 - last_x0;
        const double rho = std::max(1e-300, std::min(1.0, den == 0.0 ? 1.0 : num / den));
        t_xi = h.times.back() + std::log(1.0 / rho) / h.target_rate;
    } else {
        // Inside the samples: bracket by x0, refine by one dense forward
        // integration of the bracketing step.
        size_t j = 0;
        for (size_t i = 0; i + 1 < h.samples.size(); ++i) {
            const double xa = h.samples[i][r0], xb = h.samples[i + 1][r0];
            if ((xr - xa) * (xr - xb) <= 0.0) {
                j = i;
                break;
            }
        }
        const double span = h.times[j + 1] - h.times[j];
        StiffOrbitRunner runner(*ev_, reintegrate_params_.abs_tol, reintegrate_params_.rel_tol);
        runner.initialize(h.samples[j], 0.0, std::min(span, 1e-3));
        while (runner.current_time() < span) runner.do_step();
        double lo = 0.0, hi = span;
        for (int it = 0; it < 80; ++it) {
            const double mid = 0.5 * (lo + hi);
            const Eigen::VectorXd probe = runner.state_at(mid);
            if (dir * (probe[r0] - xr) < 0.0)
                lo = mid;
            else
                hi = mid;
        }
        t_xi = h.times[j] + 0.5 * (lo + hi);
    }

    const Eigen::VectorXd back = state_at_time(h, t_xi - 1.0);
    return Configuration(lat_, back).value_at(k) + m;
}

GhostCircle assemble_ghost_circle(const PotentialPtr& pot, const LatticePtr& lattice,
                                  const AssembleOptions& opts) {
    auto criticals = find_critical_points(pot, lattice, opts.search);
    if (criticals.empty()) throw std::runtime_error("assemble_ghost_circle: no critical points");

    std::vector<CriticalPoint> skeleton = index0_skeleton(criticals, lattice, opts.search.dedupe_tol);
    if (skeleton.empty())
        throw std::runtime_error("assemble_ghost_circle: no index-0 points in the catalog");
    ActionEvaluator ev(pot, lattice);

    for (int round = 0; round <= opts.refine_rounds; ++round) {
        const size_t n = skeleton.size();
        std::vector<CriticalPoint> saddles(n);
        std::vector<std::pair<Heteroclinic, Heteroclinic>> hets(n);
        std::vector<std::optional<Configuration>> discovered(n);
        std::vector<std::string> failures(n);

#pragma omp parallel for schedule(dynamic)
        for (long long g = 0; g < static_cast<long long>(n); ++g) {
            const CriticalPoint& lo = skeleton[static_cast<size_t>(g)];
            CriticalPoint hi = static_cast<size_t>(g) + 1 < n
                                   ? skeleton[static_cast<size_t>(g) + 1]
                                   : [&] {
                                         CriticalPoint w = skeleton.front();
                                         w.config = w.config.plus(1.0);
                                         return w;
                                     }();
            try {
                CriticalPoint z = mountain_pass_saddle(pot, lo, hi, opts);
                const double gap_lo = (z.config.values() - lo.config.values()).minCoeff();
                const double gap_hi = (hi.config.values() - z.config.values()).minCoeff();
                const double eps = opts.epsilon_factor * std::max(1e-9, std::min(gap_lo, gap_hi));
                auto branches = heteroclinics_from_saddle(pot, z, eps, opts);
                const double scale = std::max(1.0, (hi.config.values() - lo.config.values()).maxCoeff());
                if ((branches.first.target - lo.config.values()).cwiseAbs().maxCoeff() >
                    opts.match_tol * scale)
                    throw CatalogIncompleteError(
                        "down heteroclinic does not end at the left skeleton entry",
                        Configuration(lattice, branches.first.target));
                if ((branches.second.target - hi.config.values()).cwiseAbs().maxCoeff() >
                    opts.match_tol * scale)
                    throw CatalogIncompleteError(
                        "up heteroclinic does not end at the right skeleton entry",
                        Configuration(lattice, branches.second.target));
                saddles[static_cast<size_t>(g)] = std::move(z);
                hets[static_cast<size_t>(g)] = std::move(branches);
            } catch (const CatalogIncompleteError& e) {
                discovered[static_cast<size_t>(g)] = e.discovered();
                failures[static_cast<size_t>(g)] = e.what();
            } catch (const std::exception& e) {
                failures[static_cast<size_t>(g)] = e.what();
            }
        }

        bool refined = false;
        for (size_t g = 0; g < n; ++g) {
            if (!discovered[g]) continue;
            CriticalPoint extra = make_critical_point(ev, vertical_reduce(*discovered[g]));
            if (extra.index == 0 && !extra.degenerate) {
                std::vector<CriticalPoint> cat = skeleton;
                cat.push_back(extra);
                skeleton = index0_skeleton(cat, lattice, opts.search.dedupe_tol);
                refined = true;
                break;
            }
        }
        if (refined) continue;

        for (size_t g = 0; g < n; ++g)
            if (!failures[g].empty())
                throw std::runtime_error("assemble_ghost_circle: gap " + std::to_string(g) + ": " +
                                         failures[g]);

        std::vector<GhostCircle::Entry> entries;
        std::vector<std::pair<Heteroclinic, Heteroclinic>> het_store;
        for (size_t g = 0; g < n; ++g) {
            entries.push_back({skeleton[g], false, -1});
            entries.push_back({saddles[g], true, static_cast<int>(het_store.size())});
            het_store.push_back(std::move(hets[g]));
        }
        return GhostCircle(pot, lattice, std::move(entries), std::move(het_store));
    }
    throw std::runtime_error("assemble_ghost_circle: refinement rounds exhausted");
}

GhostLimitReport ghost_circle_limit(const PotentialPtr& pot,
                                    const std::vector<LatticePtr>& convergents,
                                    const std::vector<double>& sample_grid,
                                    const std::vector<Index>& sites,
                                    const MorseApproxSpec& base_spec,
                                    const AssembleOptions& opts) {
    GhostLimitReport report;
    report.grid = sample_grid;
    for (size_t stage = 0; stage < convergents.size(); ++stage) {
        GhostLimitStage st;
        st.lattice_desc = convergents[stage]->describe();
        try {
            MorseApproxSpec spec = base_spec;
            spec.n = base_spec.n * static_cast<long long>(stage + 1);
            spec.epsilon = base_spec.epsilon / static_cast<double>((stage + 1) * (stage + 1));
            spec.seed = base_spec.seed + 17 * stage;
            PotentialPtr pert = morse_perturbation(pot, convergents[stage], spec);
            GhostCircle circle = assemble_ghost_circle(pert, convergents[stage], opts);
            for (const auto& site : sites)
                for (double xi : sample_grid) st.t_values.push_back(circle.t_map(xi, site));
            st.ok = true;
        } catch (const std::exception& e) {
            st.error = e.what();
        }
        report.stages.push_back(std::move(st));
    }
    const GhostLimitStage* prev = nullptr;
    for (const auto& st : report.stages) {
        if (!st.ok) continue;
        if (prev && prev->t_values.size() == st.t_values.size()) {
            double delta = 0;
            for (size_t i = 0; i < st.t_values.size(); ++i)
                delta = std::max(delta, std::abs(st.t_values[i] - prev->t_values[i]));
            report.deltas.push_back(delta);
        }
        prev = &st;
    }
    if (!report.deltas.empty()) report.achieved_delta = report.deltas.back();
    return report;
}

}  // namespace aubrykit
