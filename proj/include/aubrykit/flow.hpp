#pragma once

#include <Eigen/Dense>
#include <vector>

#include "aubrykit/critical_point.hpp"
#include "aubrykit/lattice.hpp"
#include "aubrykit/potential.hpp"

namespace aubrykit {

struct FlowParams {
    double abs_tol = 1e-9;
    double rel_tol = 1e-9;
    double max_step = 1.0;
    double max_time = 1e4;
    double grad_tol = 1e-10;  // convergence: ||grad W||_2 <= grad_tol
};

struct TracePoint {
    double t = 0.0;
    double action = 0.0;
    double grad_sq = 0.0;
};

struct FlowResult {
    Configuration endpoint;
    double elapsed = 0.0;
    std::vector<TracePoint> trace;
    std::vector<Eigen::VectorXd> states;  // values at the trace points
    bool converged = false;
};

/// Endpoint of dx/dt = -grad W_{p,q}(x) after time t (adaptive embedded
/// RK 4(5), dense output). Trace records (t, W, ||grad W||^2) per accepted
/// step.
FlowResult flow(const PotentialPtr& pot, const Configuration& x, double t,
                const FlowParams& params = {});

struct EquilibriumResult {
    FlowResult flow;
    CriticalPoint candidate;  // Newton-polished endpoint
};

/// Integrate until ||grad W|| <= grad_tol or params.max_time, then polish by
/// Newton. Non-convergence within max_time is reported, not thrown.
EquilibriumResult flow_to_equilibrium(const PotentialPtr& pot, const Configuration& x,
                                      double grad_tol, const FlowParams& params = {});

struct ComparisonResult {
    bool ordered = false;  // min margin > 0
    double margin = 0.0;   // min_i [(Psi_t y)_i - (Psi_t x)_i]
};

/// Strict parabolic comparison: x < y must hold on entry; after time t the
/// flowed pair must satisfy Psi_t x << Psi_t y.
ComparisonResult comparison_check(const PotentialPtr& pot, const Configuration& x,
                                  const Configuration& y, double t, const FlowParams& params = {});

struct HarnackResult {
    double lhs = 0.0;     // (Psi_t y)_i - (Psi_t x)_i
    double rhs = 0.0;     // L * (y_k - x_k)
    double constant = 0.0;
    double lambda = 0.0;  // empirical uniform twist bound along the segment
    double diag_bound = 0.0;
    bool verdict = false;
};

/// Parabolic Harnack inequality with empirical constants:
/// L = safety * exp(-M t) * (lambda t / N)^N, N = ||i-k|| (N = 0 uses
/// safety * exp(-M t)); lambda and M sampled on a grid_size x grid_size
/// (time, interpolation) grid along the two trajectories.
HarnackResult parabolic_harnack_check(const PotentialPtr& pot, const Configuration& x,
                                      const Configuration& y, double t, const Index& i,
                                      const Index& k, const FlowParams& params = {},
                                      double safety = 0.9, int grid_size = 16);

/// |W(Psi_t x) - W(x) + int_0^t ||grad W||^2 ds| via dense-output quadrature.
double lyapunov_check(const PotentialPtr& pot, const Configuration& x, double t,
                      const FlowParams& params = {});

}  // namespace aubrykit
