#include "aubrykit/flow.hpp"

#include <boost/numeric/odeint.hpp>
#include <boost/numeric/odeint/external/eigen/eigen.hpp>

#include <cmath>
#include <stdexcept>

namespace aubrykit {

namespace {

namespace odeint = boost::numeric::odeint;

using Stepper = odeint::runge_kutta_dopri5<Eigen::VectorXd, double, Eigen::VectorXd, double,
                                           odeint::vector_space_algebra>;
using DenseStepper =
    odeint::dense_output_runge_kutta<odeint::controlled_runge_kutta<Stepper>>;

struct GradientSystem {
    const ActionEvaluator* ev;
    void operator()(const Eigen::VectorXd& x, Eigen::VectorXd& dxdt, double) const {
        ev->gradient(x, dxdt);
        dxdt = -dxdt;
    }
};

DenseStepper make_stepper(const FlowParams& params) {
    return odeint::make_dense_output(params.abs_tol, params.rel_tol, params.max_step, Stepper());
}

// 7-point Gauss-Legendre nodes/weights on [0,1].
constexpr double kGLx[7] = {0.025446043828620736, 0.12923440720030277, 0.29707742431130146,
                            0.5,                  0.70292257568869854, 0.87076559279969723,
                            0.97455395617137926};
constexpr double kGLw[7] = {0.064742483084434846, 0.13985269574463833, 0.19091502525255946,
                            0.20897959183673470,  0.19091502525255946, 0.13985269574463833,
                            0.064742483084434846};

}  // namespace

FlowResult flow(const PotentialPtr& pot, const Configuration& x, double t,
                const FlowParams& params) {
    if (t < 0) throw std::invalid_argument("flow: t >= 0 required (backward flow not exposed)");
    ActionEvaluator ev(pot, x.lattice_ptr());
    GradientSystem sys{&ev};

    FlowResult res;
    Eigen::VectorXd state = x.values();
    Eigen::VectorXd g;
    ev.gradient(state, g);
    res.trace.push_back({0.0, ev.value(state), g.squaredNorm()});
    res.states.push_back(state);
    if (t == 0.0) {
        res.endpoint = Configuration(x.lattice_ptr(), state);
        res.converged = true;
        return res;
    }

    auto stepper = make_stepper(params);
    stepper.initialize(state, 0.0, std::min(params.max_step, std::max(1e-6, t / 16)));
    try {
        while (stepper.current_time() < t) {
            stepper.do_step(sys);
            const double tc = std::min(stepper.current_time(), t);
            Eigen::VectorXd xc;
            stepper.calc_state(tc, xc);
            ev.gradient(xc, g);
            res.trace.push_back({tc, ev.value(xc), g.squaredNorm()});
            res.states.push_back(xc);
        }
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("flow: integrator failure (step-size underflow?): ") +
                                 e.what());
    }
    Eigen::VectorXd xfinal;
    stepper.calc_state(t, xfinal);
    res.endpoint = Configuration(x.lattice_ptr(), xfinal);
    res.elapsed = t;
    res.converged = true;
    return res;
}

EquilibriumResult flow_to_equilibrium(const PotentialPtr& pot, const Configuration& x,
                                      double grad_tol, const FlowParams& params) {
    if (grad_tol <= 0) throw std::invalid_argument("flow_to_equilibrium: grad_tol > 0 required");
    ActionEvaluator ev(pot, x.lattice_ptr());
    GradientSystem sys{&ev};

    FlowResult res;
    Eigen::VectorXd state = x.values();
    Eigen::VectorXd g;
    ev.gradient(state, g);
    res.trace.push_back({0.0, ev.value(state), g.squaredNorm()});

    auto stepper = make_stepper(params);
    stepper.initialize(state, 0.0, 1e-3);
    bool reached = g.norm() <= grad_tol;
    try {
        while (!reached && stepper.current_time() < params.max_time) {
            stepper.do_step(sys);
            ev.gradient(stepper.current_state(), g);
            res.trace.push_back(
                {stepper.current_time(), ev.value(stepper.current_state()), g.squaredNorm()});
            if (g.norm() <= grad_tol) reached = true;
        }
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("flow_to_equilibrium: integrator failure: ") +
                                 e.what());
    }
    res.elapsed = stepper.current_time();
    res.converged = reached;
    Eigen::VectorXd endpoint = stepper.current_state();

    NewtonOptions nopts;
    nopts.grad_tol = std::min(grad_tol, 1e-12);
    NewtonResult polished = newton_polish(ev, endpoint, nopts);
    if (polished.converged || polished.grad_norm < g.norm()) endpoint = polished.values;
    res.endpoint = Configuration(x.lattice_ptr(), endpoint);
    res.converged = res.converged || polished.converged;

    EquilibriumResult out{std::move(res), make_critical_point(ev, Configuration(x.lattice_ptr(), endpoint))};
    return out;
}

ComparisonResult comparison_check(const PotentialPtr& pot, const Configuration& x,
                                  const Configuration& y, double t, const FlowParams& params) {
    const Order o = compare(x, y);
    if (o != Order::Less && o != Order::LessLess)
        throw std::invalid_argument("comparison_check: requires x < y");
    FlowResult fx = flow(pot, x, t, params);
    FlowResult fy = flow(pot, y, t, params);
    ComparisonResult res;
    res.margin = (fy.endpoint.values() - fx.endpoint.values()).minCoeff();
    res.ordered = res.margin > 0;
    return res;
}

HarnackResult parabolic_harnack_check(const PotentialPtr& pot, const Configuration& x,
                                      const Configuration& y, double t, const Index& i,
                                      const Index& k, const FlowParams& params, double safety,
                                      int grid_size) {
    const Order o = compare(x, y);
    if (o != Order::Less && o != Order::LessLess)
        throw std::invalid_argument("parabolic_harnack_check: requires x < y");
    if (t <= 0) throw std::invalid_argument("parabolic_harnack_check: t > 0 required");

    ActionEvaluator ev(pot, x.lattice_ptr());
    GradientSystem sys{&ev};

    // Snapshot both trajectories on the time grid with one dense pass each.
    std::vector<Eigen::VectorXd> xs(static_cast<size_t>(grid_size)),
        ys(static_cast<size_t>(grid_size));
    for (int pass = 0; pass < 2; ++pass) {
        auto& dst = pass == 0 ? xs : ys;
        const Eigen::VectorXd start = pass == 0 ? x.values() : y.values();
        auto stepper = make_stepper(params);
        stepper.initialize(start, 0.0, std::min(params.max_step, t / 16));
        dst[0] = start;
        for (int next = 1; next < grid_size; ++next) {
            const double tg = t * next / (grid_size - 1);
            while (stepper.current_time() < tg) stepper.do_step(sys);
            Eigen::VectorXd snap;
            stepper.calc_state(tg, snap);
            dst[static_cast<size_t>(next)] = snap;
        }
    }

    HarnackResult res;
    res.lambda = 1e300;
    res.diag_bound = -1e300;
    for (int a = 0; a < grid_size; ++a) {
        for (int b = 0; b < grid_size; ++b) {
            const double tau = grid_size == 1 ? 0.5 : static_cast<double>(b) / (grid_size - 1);
            const Eigen::VectorXd z =
                tau * xs[static_cast<size_t>(a)] + (1.0 - tau) * ys[static_cast<size_t>(a)];
            const auto tb = ev.twist_bounds(z);
            res.lambda = std::min(res.lambda, tb.lambda);
            res.diag_bound = std::max(res.diag_bound, tb.diag_max);
        }
    }

    Index diff(i.size());
    for (size_t c = 0; c < i.size(); ++c) diff[c] = i[c] - k[c];
    const long long N = norm1(diff);
    res.constant = safety * std::exp(-res.diag_bound * t);
    if (N > 0) res.constant *= std::pow(res.lambda * t / static_cast<double>(N), static_cast<double>(N));

    const Configuration ex = Configuration(x.lattice_ptr(), xs.back());
    const Configuration ey = Configuration(y.lattice_ptr(), ys.back());
    res.lhs = ey.value_at(i) - ex.value_at(i);
    res.rhs = res.constant * (y.value_at(k) - x.value_at(k));
    res.verdict = res.lhs >= res.rhs;
    return res;
}

double lyapunov_check(const PotentialPtr& pot, const Configuration& x, double t,
                      const FlowParams& params) {
    if (t <= 0) throw std::invalid_argument("lyapunov_check: t > 0 required");
    ActionEvaluator ev(pot, x.lattice_ptr());
    GradientSystem sys{&ev};

    const double w0 = ev.value(x.values());
    auto stepper = make_stepper(params);
    stepper.initialize(x.values(), 0.0, std::min(params.max_step, t / 16));

    double integral = 0.0;
    Eigen::VectorXd g, snap;
    double tprev = 0.0;
    while (tprev < t) {
        stepper.do_step(sys);
        const double tcur = std::min(stepper.current_time(), t);
        const double h = tcur - tprev;
        for (int q = 0; q < 7; ++q) {
            stepper.calc_state(tprev + h * kGLx[q], snap);
            ev.gradient(snap, g);
            integral += h * kGLw[q] * g.squaredNorm();
        }
        tprev = tcur;
    }
    stepper.calc_state(t, snap);
    const double wt = ev.value(snap);
    return std::abs(wt - w0 + integral);
}

}  // namespace aubrykit
