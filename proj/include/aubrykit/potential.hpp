#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "aubrykit/lattice.hpp"

namespace aubrykit {

/// Offsets {o : ||o|| <= r} in lexicographic order, shared by all window
/// evaluations of a potential of range r.
struct WindowGeometry {
    int d = 0;
    int r = 0;
    std::vector<Index> offsets;
    int center = -1;  // index of the zero offset
    std::vector<int> nearest;  // indices of the unit offsets

    WindowGeometry(int d, int r);
    int index_of(const Index& offset) const;
    int size() const { return static_cast<int>(offsets.size()); }
};

/// The family {S_j} through its window function S_0 (condition B makes all
/// other S_j shifts of it). Windows are value vectors indexed per the
/// geometry's offset ordering.
class LocalPotential {
public:
    virtual ~LocalPotential() = default;

    int dim() const { return geometry().d; }
    int range() const { return geometry().r; }
    virtual const WindowGeometry& geometry() const = 0;

    virtual double value(const Eigen::VectorXd& w) const = 0;
    virtual double deriv1(int oi, const Eigen::VectorXd& w) const = 0;
    virtual double deriv2(int oi, int ok, const Eigen::VectorXd& w) const = 0;

    virtual std::string name() const = 0;
    virtual std::string params_text() const { return ""; }
};

using PotentialPtr = std::shared_ptr<const LocalPotential>;

/// Finite trigonometric series c0 + sum_h a_h cos(2 pi h x) + b_h sin(2 pi h x);
/// 1-periodic by construction.
struct TrigSeries {
    struct Term {
        int harmonic = 1;
        double cos_coeff = 0.0;
        double sin_coeff = 0.0;
    };
    double constant = 0.0;
    std::vector<Term> terms;

    static TrigSeries zero() { return {}; }
    /// The standard form V(x) = (k / 8 pi^2) cos(2 pi x).
    static TrigSeries standard(double k);

    bool empty() const;
    double eval(double x) const;
    double d1(double x) const;
    double d2(double x) const;
    /// max V - min V via extrema scan (grid + derivative bisection).
    double oscillation() const;
};

struct FKSpec {
    int d = 1;
    TrigSeries onsite;
};

/// S_j(x) = V(x_j) + 1/(8d) sum_{||k-j||=1} (x_k - x_j)^2, range 1.
PotentialPtr fk_potential(const FKSpec& spec);

/// Potential defined by a value callback only; derivatives by central finite
/// differences (h = 1e-5).
PotentialPtr custom_potential(int d, int r, std::function<double(const Eigen::VectorXd&)> value,
                              std::string name = "custom");

struct MorseApproxSpec {
    long long n = 100;       // monotonization strength 1/n
    double epsilon = 1e-3;   // onsite perturbation amplitude bound
    unsigned long long seed = 1;
    int degree = 3;          // trig degree of the random onsite perturbation
};

/// Single Morse-approximation draw:
///   S_j^n = S_j + (1/(n |B_p|)) sum_{i!=k in j+B_p} (x_k-x_i) arctan(x_k-x_i)
///           + g(x_j),
/// g a seeded random 1-periodic trig polynomial with sup-norm <= epsilon.
/// The declared range grows to cover the B_p pair offsets.
PotentialPtr morse_perturbation(const PotentialPtr& base, const LatticePtr& lattice,
                                const MorseApproxSpec& spec);

struct ConditionCheck {
    bool pass = false;
    double stat = 0.0;       // check-specific scalar (bound, worst value, ...)
    std::string detail;
};

struct ConditionReport {
    ConditionCheck A, B, C, D, E;
    double lambda_emp = 0.0;  // condition D: uniform twist bound on NN pairs
    double c_emp = 0.0;       // condition E: max sampled |second derivative|
    bool all_pass() const { return A.pass && B.pass && C.pass && D.pass && E.pass; }
};

ConditionReport verify_conditions(const LocalPotential& pot, int sample_budget,
                                  double box_halfwidth, unsigned long long seed = 2024);

/// Periodic action W_{p,q} = sum_{j in B_p} S_j with folded gradient/Hessian
/// on the fundamental-domain coordinates. Neighbor tables are precomputed at
/// construction; evaluations run serial or OpenMP-parallel over B_p.
class ActionEvaluator {
public:
    ActionEvaluator(PotentialPtr pot, LatticePtr lattice);

    const PeriodLattice& lattice() const { return *lat_; }
    const LatticePtr& lattice_ptr() const { return lat_; }
    const LocalPotential& potential() const { return *pot_; }
    const PotentialPtr& potential_ptr() const { return pot_; }

    double value(const Eigen::VectorXd& vals, bool parallel = true) const;
    void gradient(const Eigen::VectorXd& vals, Eigen::VectorXd& out, bool parallel = true) const;
    void hessian(const Eigen::VectorXd& vals, Eigen::MatrixXd& out, bool parallel = true) const;

    double value_serial(const Eigen::VectorXd& vals) const { return value(vals, false); }
    void gradient_serial(const Eigen::VectorXd& vals, Eigen::VectorXd& out) const {
        gradient(vals, out, false);
    }

    /// Bounds used by the parabolic Harnack constants along a configuration:
    /// lambda = min over NN pairs of -d_{i,k} S_i, diag_max = max unfolded
    /// diagonal of D^2 W (infinite-lattice operator).
    struct TwistBounds {
        double lambda = 0.0;
        double diag_max = 0.0;
    };
    TwistBounds twist_bounds(const Eigen::VectorXd& vals) const;

private:
    void fill_window(const Eigen::VectorXd& vals, long long j, Eigen::VectorXd& w) const;

    PotentialPtr pot_;
    LatticePtr lat_;
    struct PlanEntry {
        int rep;
        double qdot;
    };
    std::vector<PlanEntry> plan_;  // site-major: plan_[j * wsize + oi]
    int wsize_ = 0;
    long long nsites_ = 0;
};

struct ActionEval {
    double value = 0.0;
    Eigen::VectorXd gradient;
    Eigen::MatrixXd hessian;
};

/// (W, folded gradient, folded Hessian) at a periodic configuration.
ActionEval action_derivatives(const PotentialPtr& pot, const Configuration& config,
                              bool want_hessian = true);

/// A(x) = sum_{i in B_p} (d_i W(x))^2; zero iff stationary.
double stationarity_defect(const PotentialPtr& pot, const Configuration& config);

}  // namespace aubrykit
