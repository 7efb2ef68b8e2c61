#pragma once

#include <optional>
#include <string>
#include <vector>

#include "aubrykit/critical_point.hpp"
#include "aubrykit/flow.hpp"
#include "aubrykit/lattice.hpp"
#include "aubrykit/minimizers.hpp"
#include "aubrykit/potential.hpp"

namespace aubrykit {

/// Basin bisection found a flow endpoint that is not one of the two
/// consecutive skeleton entries: an index-0 point is missing from the
/// catalog. Carries the discovered attractor.
class CatalogIncompleteError : public std::runtime_error {
public:
    CatalogIncompleteError(std::string msg, Configuration discovered)
        : std::runtime_error(std::move(msg)), discovered_(std::move(discovered)) {}
    const Configuration& discovered() const { return discovered_; }

private:
    Configuration discovered_;
};

/// Gradient-flow orbit from an index-1 saddle's unstable manifold to a
/// neighboring index-0 point. Samples are strictly ordered along the travel
/// direction; the first sample is exactly saddle +- epsilon * e_max.
struct Heteroclinic {
    int direction = +1;  // +1 toward larger configurations, -1 toward smaller
    double epsilon = 0.0;
    double lambda_max = 0.0;      // positive eigenvalue of -D^2 W at the saddle
    Eigen::VectorXd e_max;        // strictly positive, max entry 1
    Eigen::VectorXd saddle;       // saddle values
    std::vector<double> times;    // t = 0 at the launch sample
    std::vector<Eigen::VectorXd> samples;
    int seed_index = 0;           // samples before this follow the linearized
                                  // escape z + dir * eps * exp(lambda t) e_max
    Eigen::VectorXd target;       // endpoint critical values
    double target_rate = 0.0;     // smallest eigenvalue of D^2 W at the endpoint
};

struct AssembleOptions {
    CriticalSearchOptions search;
    FlowParams flow;
    int bisection_steps = 60;
    int coarse_scan = 9;           // pre-scan of the segment before bisecting
    double classify_fraction = 0.3;  // endpoint decided within this fraction of the gap
    double epsilon_factor = 1e-6;    // heteroclinic launch, scaled by the gap
    double launch_fraction = 0.05;   // integration seed amplitude, scaled by the gap
    double match_tol = 1e-5;         // endpoint-to-skeleton matching
    int refine_rounds = 4;           // catalog self-repair rounds
};

/// Index-0 points of the catalog closed under shift classes and vertical
/// integer shifts, restricted to one vertical period (x_0 in [0,1)),
/// strictly ordered by x_0. Degenerate entries are rejected.
std::vector<CriticalPoint> index0_skeleton(const std::vector<CriticalPoint>& criticals,
                                           const LatticePtr& lattice, double dedupe_tol = 1e-6);

/// Index-1 point strictly between two consecutive index-0 points, found by
/// basin-of-attraction bisection of the straight segment. Verified: Morse
/// index 1, simple positive eigenvalue of -D^2 W with strictly positive
/// eigenvector, action above both endpoints.
CriticalPoint mountain_pass_saddle(const PotentialPtr& pot, const CriticalPoint& x_lo,
                                   const CriticalPoint& x_hi, const AssembleOptions& opts = {});

/// Both unstable-manifold orbits of an index-1 saddle, integrated to the
/// neighboring minimizers. Returns (down, up).
std::pair<Heteroclinic, Heteroclinic> heteroclinics_from_saddle(const PotentialPtr& pot,
                                                                const CriticalPoint& z,
                                                                double epsilon,
                                                                const AssembleOptions& opts = {});

/// Periodic ghost circle: alternating index-0/index-1 skeleton over one
/// vertical period plus the connecting heteroclinics, parametrized
/// monotonically by xi = x_0.
class GhostCircle {
public:
    struct Entry {
        CriticalPoint point;
        bool is_saddle = false;
        int het = -1;  // index into heteroclinics() for saddles
    };

    GhostCircle(PotentialPtr pot, LatticePtr lattice, std::vector<Entry> entries,
                std::vector<std::pair<Heteroclinic, Heteroclinic>> heteroclinics);

    const LatticePtr& lattice_ptr() const { return lat_; }
    const PotentialPtr& potential_ptr() const { return pot_; }
    const std::vector<Entry>& entries() const { return entries_; }
    const std::vector<std::pair<Heteroclinic, Heteroclinic>>& heteroclinics() const {
        return hets_;
    }

    /// Monotone parametrization by xi = x_0 (piecewise linear between
    /// heteroclinic samples).
    Configuration evaluate(double xi) const;

    /// T^Gamma_k(xi): locate evaluate(xi) on its stored orbit and step back
    /// one time unit along that orbit (forward re-integration from an earlier
    /// sample; linearized asymptotics beyond the first sample / in the
    /// endpoint tail). Never integrates the ODE backward.
    double t_map(double xi, const Index& k) const;

    /// Smallest action over the skeleton (the contained global minimizer).
    const CriticalPoint& minimizer() const;

private:
    struct Location {
        int entry = -1;        // exact skeleton entry, or
        int het = -1;          // heteroclinic id
        bool up = false;
        double orbit_time = 0; // time along that heteroclinic (launch = 0)
        long long vertical = 0;
    };
    Location locate(double xi) const;
    const Heteroclinic& het(int id, bool up) const { return up ? hets_[static_cast<size_t>(id)].second : hets_[static_cast<size_t>(id)].first; }
    Eigen::VectorXd state_at_time(const Heteroclinic& h, double t) const;

    PotentialPtr pot_;
    LatticePtr lat_;
    std::vector<Entry> entries_;
    std::vector<std::pair<Heteroclinic, Heteroclinic>> hets_;
    std::shared_ptr<ActionEvaluator> ev_;
    FlowParams reintegrate_params_;
};

/// Full pipeline: critical-point search, index-0 skeleton, mountain-pass
/// saddles, heteroclinics, stitched parametrization. The caller supplies a
/// Morse action (apply morse_approximation first when needed); missing
/// index-0 orbits discovered during bisection are inserted and the gap
/// re-processed, up to opts.refine_rounds.
GhostCircle assemble_ghost_circle(const PotentialPtr& pot, const LatticePtr& lattice,
                                  const AssembleOptions& opts = {});

struct GhostLimitStage {
    std::string lattice_desc;
    bool ok = false;
    std::string error;
    std::vector<double> t_values;  // T^Gamma_k(xi) on the sample grid, k-major
};

struct GhostLimitReport {
    std::vector<GhostLimitStage> stages;
    std::vector<double> deltas;    // sup differences between consecutive ok stages
    double achieved_delta = -1.0;  // last delta, or -1 when fewer than 2 stages ok
    std::vector<double> grid;
};

/// Rational-approximation diagnostic toward an irrational rotation vector:
/// assembles a ghost circle per convergent (with vanishing per-stage Morse
/// perturbation), evaluates the T-map on the grid, and reports successive
/// sup-differences. The report never claims convergence beyond the achieved
/// delta.
GhostLimitReport ghost_circle_limit(const PotentialPtr& pot,
                                    const std::vector<LatticePtr>& convergents,
                                    const std::vector<double>& sample_grid,
                                    const std::vector<Index>& sites,
                                    const MorseApproxSpec& base_spec,
                                    const AssembleOptions& opts = {});

}  // namespace aubrykit
