#pragma once

#include <Eigen/Dense>
#include <memory>

#include "aubrykit/potential.hpp"

namespace aubrykit {

/// Stiff companion integrator (Rosenbrock-4, analytic folded Hessian as
/// Jacobian) for orbit integration along ghost circles, where near-degenerate
/// spectral gaps stability-cap explicit steppers.
class StiffOrbitRunner {
public:
    StiffOrbitRunner(const ActionEvaluator& ev, double abs_tol, double rel_tol);
    ~StiffOrbitRunner();

    void initialize(const Eigen::VectorXd& x, double t, double dt0);
    void do_step();
    double current_time() const;
    Eigen::VectorXd current_state() const;
    /// Dense-output state inside the last step interval.
    Eigen::VectorXd state_at(double t);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace aubrykit
