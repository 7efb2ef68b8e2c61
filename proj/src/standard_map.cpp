#include "aubrykit/standard_map.hpp"

#include <cmath>
#include <stdexcept>

namespace aubrykit {

std::pair<double, double> standard_map_step(const TrigSeries& v, double x, double y) {
    const double kick = 2.0 * v.d1(x);
    return {x + y + kick, y + kick};
}

std::vector<std::pair<double, double>> iterate_lift(const TrigSeries& v, double x0, double y0,
                                                    int steps) {
    std::vector<std::pair<double, double>> orbit;
    orbit.reserve(static_cast<size_t>(steps) + 1);
    orbit.emplace_back(x0, y0);
    double x = x0, y = y0;
    for (int i = 0; i < steps; ++i) {
        std::tie(x, y) = standard_map_step(v, x, y);
        orbit.emplace_back(x, y);
    }
    return orbit;
}

TwistOrbit orbit_from_sequence(const std::vector<double>& xs, const TrigSeries& v) {
    if (xs.size() < 2) throw std::invalid_argument("orbit_from_sequence: need >= 2 points");
    TwistOrbit orbit;
    for (size_t i = 0; i + 1 < xs.size(); ++i) {
        orbit.x.push_back(xs[i]);
        orbit.y.push_back((xs[i + 1] - xs[i]) - 2.0 * v.d1(xs[i]));
    }
    for (size_t i = 0; i + 1 < orbit.x.size(); ++i) {
        const auto [X, Y] = standard_map_step(v, orbit.x[i], orbit.y[i]);
        const double r = std::max(std::abs(X - orbit.x[i + 1]), std::abs(Y - orbit.y[i + 1]));
        orbit.residuals.push_back(r);
        orbit.max_residual = std::max(orbit.max_residual, r);
    }
    return orbit;
}

TwistOrbit orbit_from_configuration(const Configuration& config, const TrigSeries& v, int steps) {
    if (config.lattice().dim() != 1)
        throw std::invalid_argument("orbit_from_configuration: d = 1 required");
    std::vector<double> xs;
    for (int i = 0; i <= steps + 1; ++i) xs.push_back(config.value_at(Index{i}));
    return orbit_from_sequence(xs, v);
}

double stationarity_residual_1d(const std::vector<double>& xs, const TrigSeries& v) {
    if (xs.size() < 3) throw std::invalid_argument("stationarity_residual_1d: need >= 3 points");
    double worst = 0.0;
    for (size_t i = 1; i + 1 < xs.size(); ++i) {
        const double r = (xs[i] - xs[i - 1]) - (xs[i + 1] - xs[i]) + 2.0 * v.d1(xs[i]);
        worst = std::max(worst, std::abs(r));
    }
    return worst;
}

Eigen::Matrix2d standard_map_fd_jacobian(const TrigSeries& v, double x, double y, double h) {
    Eigen::Matrix2d J;
    const auto xp = standard_map_step(v, x + h, y);
    const auto xm = standard_map_step(v, x - h, y);
    const auto yp = standard_map_step(v, x, y + h);
    const auto ym = standard_map_step(v, x, y - h);
    J(0, 0) = (xp.first - xm.first) / (2 * h);
    J(1, 0) = (xp.second - xm.second) / (2 * h);
    J(0, 1) = (yp.first - ym.first) / (2 * h);
    J(1, 1) = (yp.second - ym.second) / (2 * h);
    return J;
}

InvariantCurveReport invariant_curve_verdict(const TrigSeries& v) {
    InvariantCurveReport rep;
    rep.osc_v = v.oscillation();
    rep.none_exist = rep.osc_v > 2.0;
    rep.k_threshold = 8.0 * M_PI * M_PI;
    rep.percival_bound = 63.0 / 64.0;
    return rep;
}

}  // namespace aubrykit
