#pragma once

#include <optional>
#include <vector>

#include "aubrykit/critical_point.hpp"
#include "aubrykit/flow.hpp"
#include "aubrykit/lattice.hpp"
#include "aubrykit/potential.hpp"

namespace aubrykit {

/// Vertical reduction: add the integer that puts values[0] into [0,1).
Configuration vertical_reduce(const Configuration& x);

/// True when y equals some tau_{k,l} x + m (shift class of the lattice plus
/// vertical integer) within sup-distance tol.
bool same_orbit(const Configuration& x, const Configuration& y, double tol);

/// Best (lowest-action) polished critical point over multistart linear
/// initial configurations x^{omega,xi} (xi on a uniform [0,1) grid) plus
/// seeded perturbations of them.
CriticalPoint minimize_action(const PotentialPtr& pot, const LatticePtr& lattice, int multistart,
                              unsigned long long seed, const FlowParams& params = {});

struct CriticalSearchOptions {
    int grid_per_dof = 6;
    double grad_tol = 1e-10;
    double dedupe_tol = 1e-6;
    long long max_seeds = 20000;  // grid capped here, then seeded random starts
    unsigned long long seed = 7;
    double degeneracy_tol = 1e-8;
};

/// Newton from a seed grid over [0,1)^{|B_p|} of offsets relative to the
/// linear configuration; converged points deduplicated modulo shift classes
/// and x -> x+1, ordered by x_0.
std::vector<CriticalPoint> find_critical_points(const PotentialPtr& pot, const LatticePtr& lattice,
                                                const CriticalSearchOptions& opts = {});

struct GlobalMinimizerReport {
    bool verdict = false;
    double worst_margin = 0.0;  // most negative action increase seen
    bool perturbations_ok = false;
    bool reminimization_ok = false;
    bool translates_ordered = false;
};

/// Probabilistic falsifier of global minimality: (a) compactly supported
/// random perturbations on the r-interior of B_{np} (periodically extended)
/// must not lower W_{np,nq}; (b) re-minimization from perturbed starts must
/// not beat n^d W_{p,q}(x); (c) all nontrivial translates strictly ordered
/// against x.
GlobalMinimizerReport verify_global_minimizer(const PotentialPtr& pot, const CriticalPoint& x,
                                              long long refinement, int trials,
                                              unsigned long long seed, double tol = 1e-9,
                                              const FlowParams& params = {});

struct MinMaxReport {
    Configuration min_config;
    Configuration max_config;
    double energy_slack = 0.0;  // W(x)+W(y) - W(min) - W(max), >= -tol
};

MinMaxReport minmax_combine(const PotentialPtr& pot, const Configuration& x,
                            const Configuration& y);

/// True iff every Hessian eigenvalue of every supplied critical point
/// satisfies |lambda| > tol. Throws on an empty catalog.
bool is_morse(const PotentialPtr& pot, const LatticePtr& lattice,
              const std::vector<CriticalPoint>& criticals, double tol = 1e-8);

/// Bounded-retry Morse approximation: draws morse_perturbation with fresh
/// seeds until the perturbed action is Morse (checked through a critical
/// point search); throws after the retry budget carrying the last
/// near-degenerate eigenvalue in the message.
PotentialPtr morse_approximation(const PotentialPtr& pot, const LatticePtr& lattice,
                                 const MorseApproxSpec& spec, int retries = 8,
                                 const CriticalSearchOptions& search = {});

}  // namespace aubrykit
