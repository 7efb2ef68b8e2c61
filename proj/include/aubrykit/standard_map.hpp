#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "aubrykit/lattice.hpp"
#include "aubrykit/potential.hpp"

namespace aubrykit {

/// One lifted step of the Chirikov standard map
/// T_V(x, y) = (x + y + 2 V'(x), y + 2 V'(x)).
std::pair<double, double> standard_map_step(const TrigSeries& v, double x, double y);

std::vector<std::pair<double, double>> iterate_lift(const TrigSeries& v, double x0, double y0,
                                                    int steps);

struct TwistOrbit {
    std::vector<double> x;          // lift coordinates
    std::vector<double> y;          // y_i = -d_x S(x_i, x_{i+1}) = (x_{i+1}-x_i) - 2 V'(x_i)
    std::vector<double> residuals;  // ||T(x_i,y_i) - (x_{i+1},y_{i+1})||_inf
    double max_residual = 0.0;
};

/// Orbit from an x-sequence via the generating function
/// S(x, X) = (x-X)^2/2 + 2 V(x). Needs at least 3 entries for a residual.
TwistOrbit orbit_from_sequence(const std::vector<double>& xs, const TrigSeries& v);

/// Orbit from a one-dimensional periodic configuration: the x-sequence is
/// x_0..x_{steps+1} through the periodic extension.
TwistOrbit orbit_from_configuration(const Configuration& config, const TrigSeries& v, int steps);

/// max_i |(x_i - x_{i-1}) - (x_{i+1} - x_i) + 2 V'(x_i)| over interior i;
/// zero iff the sequence is stationary in the twist-map normalization (the
/// factor-2 action scaling shares the zero set with the lattice form).
double stationarity_residual_1d(const std::vector<double>& xs, const TrigSeries& v);

/// Central finite-difference Jacobian of one lifted step.
Eigen::Matrix2d standard_map_fd_jacobian(const TrigSeries& v, double x, double y, double h = 1e-3);

struct InvariantCurveReport {
    double osc_v = 0.0;
    bool none_exist = false;         // osc V > 2 (d = 1)
    double k_threshold = 0.0;        // k > 8 pi^2 for the standard cosine family
    double percival_bound = 63.0 / 64.0;  // literature bound, reported as metadata
};

InvariantCurveReport invariant_curve_verdict(const TrigSeries& v);

}  // namespace aubrykit
