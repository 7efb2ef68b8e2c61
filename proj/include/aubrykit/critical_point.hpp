#pragma once

#include <Eigen/Dense>

#include "aubrykit/lattice.hpp"
#include "aubrykit/potential.hpp"

namespace aubrykit {

struct CriticalPoint {
    Configuration config;
    double action = 0.0;
    double grad_norm = 0.0;
    Eigen::VectorXd eigenvalues;  // ascending
    int index = 0;                // count of negative eigenvalues
    bool degenerate = false;      // min |eigenvalue| <= tol

    double x0() const { return config.origin_value(); }
};

/// Eigendata, Morse index and degeneracy flag at a configuration (assumed
/// near-stationary; grad_norm is recorded, not enforced).
CriticalPoint make_critical_point(const ActionEvaluator& ev, const Configuration& config,
                                  double degeneracy_tol = 1e-8);

struct NewtonOptions {
    int max_iterations = 60;
    double grad_tol = 1e-12;
    double tikhonov = 1e-10;  // fallback shift near degeneracy
    double max_step = 1.0;    // trust-region style cap on the Newton step
};

struct NewtonResult {
    Eigen::VectorXd values;
    double grad_norm = 0.0;
    bool converged = false;
    int iterations = 0;
};

/// Damped Newton iteration on grad W = 0 (finds critical points of any
/// index). Tikhonov-shifts the Hessian when the plain solve fails or the
/// residual stalls.
NewtonResult newton_polish(const ActionEvaluator& ev, const Eigen::VectorXd& start,
                           const NewtonOptions& opts = {});

}  // namespace aubrykit
