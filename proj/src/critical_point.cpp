#include "aubrykit/critical_point.hpp"

#include <cmath>

namespace aubrykit {

CriticalPoint make_critical_point(const ActionEvaluator& ev, const Configuration& config,
                                  double degeneracy_tol) {
    CriticalPoint cp;
    cp.config = config;
    cp.action = ev.value(config.values());
    Eigen::VectorXd g;
    ev.gradient(config.values(), g);
    cp.grad_norm = g.norm();
    Eigen::MatrixXd h;
    ev.hessian(config.values(), h);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    cp.eigenvalues = es.eigenvalues();
    cp.index = 0;
    double min_abs = 1e300;
    for (Eigen::Index i = 0; i < cp.eigenvalues.size(); ++i) {
        if (cp.eigenvalues[i] < -degeneracy_tol) ++cp.index;
        min_abs = std::min(min_abs, std::abs(cp.eigenvalues[i]));
    }
    cp.degenerate = min_abs <= degeneracy_tol;
    return cp;
}

NewtonResult newton_polish(const ActionEvaluator& ev, const Eigen::VectorXd& start,
                           const NewtonOptions& opts) {
    NewtonResult res;
    res.values = start;
    Eigen::VectorXd g;
    Eigen::MatrixXd h;
    ev.gradient(res.values, g);
    res.grad_norm = g.norm();
    double shift = 0.0;
    for (int it = 0; it < opts.max_iterations; ++it) {
        res.iterations = it;
        if (res.grad_norm <= opts.grad_tol) {
            res.converged = true;
            return res;
        }
        ev.hessian(res.values, h);
        Eigen::MatrixXd hs = h;
        if (shift > 0)
            hs.diagonal().array() += shift;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(hs);
        Eigen::VectorXd step;
        bool solved = false;
        if (ldlt.info() == Eigen::Success) {
            step = ldlt.solve(-g);
            solved = step.allFinite();
        }
        if (!solved) {
            hs = h;
            hs.diagonal().array() += std::max(shift, opts.tikhonov);
            Eigen::FullPivLU<Eigen::MatrixXd> lu(hs);
            step = lu.solve(-g);
            if (!step.allFinite()) {
                res.converged = false;
                return res;
            }
        }
        const double len = step.cwiseAbs().maxCoeff();
        if (len > opts.max_step) step *= opts.max_step / len;
        Eigen::VectorXd trial = res.values + step;
        Eigen::VectorXd gt;
        ev.gradient(trial, gt);
        const double gn = gt.norm();
        if (gn <= res.grad_norm || gn <= opts.grad_tol * 10) {
            res.values = trial;
            res.grad_norm = gn;
            g = gt;
            shift = shift > 0 ? shift * 0.25 : 0.0;
            if (shift < opts.tikhonov) shift = 0.0;
        } else {
            shift = shift == 0.0 ? opts.tikhonov : shift * 10.0;
            if (shift > 1e6) {
                res.converged = false;
                return res;
            }
        }
    }
    res.converged = res.grad_norm <= opts.grad_tol;
    return res;
}

}  // namespace aubrykit
