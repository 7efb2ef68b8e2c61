#pragma once

#include <optional>
#include <string>
#include <vector>

#include "aubrykit/critical_point.hpp"
#include "aubrykit/ghost_circle.hpp"
#include "aubrykit/lattice.hpp"
#include "aubrykit/minimizers.hpp"
#include "aubrykit/potential.hpp"

namespace aubrykit {

/// Finite Aubry-Mather set of a rational rotation vector: the shift orbit of
/// a verified periodic minimizer, one representative per class level in
/// [0,1), strictly ordered.
struct AubryMatherSet {
    PotentialPtr potential;
    LatticePtr lattice;
    CriticalPoint generator;
    std::vector<Configuration> elements;  // ordered by level = x_0
};

/// Translate orbit of a minimizer (Lemma-style rational construction).
/// Crossing translates mean the generator was not minimizing and raise an
/// error.
AubryMatherSet orbit_closure(const PotentialPtr& pot, const CriticalPoint& x,
                             const LatticePtr& lattice);

struct Gap {
    Configuration y_minus;
    Configuration y_plus;
    double width = 0.0;            // min_i (y+_i - y-_i)
    Eigen::VectorXd per_site;      // per-site widths over B_p
};

/// Consecutive-element gaps (including the vertical wrap) wider than gap_tol.
/// A candidate is discarded as part of a continuum when constrained
/// re-minimization at the pinned midpoint x_0 reaches zero stationarity
/// defect.
std::vector<Gap> detect_gaps(const AubryMatherSet& am, double gap_tol = 1e-6);

struct SummabilityReport {
    double sum = 0.0;
    bool verdict = false;  // sum <= 1 + tol
    std::vector<Index> representatives;  // transversal of Z^d / H_omega in B_p
};

/// sum over Z^d/H_omega representatives of |y+_i - y-_i|; must be <= 1.
SummabilityReport gap_summability_check(const Gap& gap, const LatticePtr& lattice,
                                        double tol = 1e-9);

/// W_{[y-,y+]}(y) = sum_{j in Z^d/H_omega} (S_j(y) - S_j(y-)); zero on the
/// gap endpoints and on global minimizers. y must lie in the order interval.
double renormalized_action(const PotentialPtr& pot, const Gap& gap, const Configuration& y);

struct GapSolutionResult {
    bool foliated = false;
    std::optional<CriticalPoint> solution;  // stationary non-minimizer, when found
    double renormalized = 0.0;
    GlobalMinimizerReport minimality;
};

struct GapSolutionOptions {
    int samples = 64;
    double pos_tol = 1e-8;
    double defect_tol = 1e-8;     // stationarity: defect <= defect_tol^2
    double endpoint_tol = 1e-5;   // gap endpoints must lie on the circle
    FlowParams flow;
};

/// Maximize the renormalized action over the circle segment between the gap
/// endpoints. A positive maximum yields a polished stationary non-minimizer;
/// a flat segment of vanishing defects yields the foliation verdict.
GapSolutionResult gap_solution(const PotentialPtr& pot, const GhostCircle& circle, const Gap& gap,
                               const GapSolutionOptions& opts = {});

struct OscillationReport {
    double osc_v = 0.0;
    double threshold = 0.0;       // 2d for the FK family, (2r+1)^d * N otherwise
    bool criterion_fires = false; // osc V > threshold: no connected minimizer family
    bool fk_family = false;
    double std_k_threshold = 0.0; // k > 8 pi^2 for V = (k/8pi^2) cos(2 pi x)
    double percival_bound = 63.0 / 64.0;
    std::vector<double> gap_widths;  // cross-check via detect_gaps
    bool foliation_confirmed = false;
};

/// Gap-existence criterion from the onsite oscillation, with the detect_gaps
/// cross-check on the supplied lattice.
OscillationReport oscillation_gap_criterion(const PotentialPtr& pot_base, const TrigSeries& onsite,
                                            const LatticePtr& lattice,
                                            unsigned long long seed = 11);

/// S_j(x) evaluated at one lattice site (window filled from the periodic
/// extension).
double local_energy(const PotentialPtr& pot, const Configuration& config, const Index& site);

}  // namespace aubrykit
