#pragma once

#include <Eigen/Dense>
#include <boost/rational.hpp>
#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace aubrykit {

using Rational = boost::rational<long long>;
using Index = std::vector<long long>;  // point of Z^d

inline long long norm1(const Index& i) {
    long long s = 0;
    for (long long c : i) s += std::abs(c);
    return s;
}

inline long long rat_floor(const Rational& r) {
    long long q = r.numerator() / r.denominator();
    if (r.numerator() % r.denominator() != 0 && (r.numerator() < 0) != (r.denominator() < 0)) --q;
    return q;
}

inline bool rat_is_integer(const Rational& r) { return r.denominator() == 1; }

/// Periodicity data (p_1,q_1),...,(p_d,q_d): a d x d integer matrix p with
/// det p != 0 plus an integer vector q. Derived quantities (p^{-1}, the
/// rotation vector omega = -p^{-T} q, the fundamental domain B_p) are exact.
class PeriodLattice {
public:
    PeriodLattice(int d, std::vector<long long> p_row_major, std::vector<long long> q);

    static std::shared_ptr<const PeriodLattice> make(int d, std::vector<long long> p,
                                                     std::vector<long long> q) {
        return std::make_shared<const PeriodLattice>(d, std::move(p), std::move(q));
    }
    /// Scaled lattice (np, nq); same rotation vector.
    std::shared_ptr<const PeriodLattice> refined(long long n) const;

    int dim() const { return d_; }
    long long p(int row, int col) const { return p_[static_cast<size_t>(row) * d_ + col]; }
    long long q(int j) const { return q_[j]; }
    long long det() const { return det_; }
    long long domain_size() const { return static_cast<long long>(domain_.size()); }

    const std::vector<Rational>& omega() const { return omega_; }
    std::vector<double> omega_real() const;
    double omega_max_abs() const;

    /// B_p = p([0,1)^d) cap Z^d in lexicographic order.
    const std::vector<Index>& domain() const { return domain_; }
    long long domain_index(const Index& k) const;

    /// Canonical decomposition i = k + p*m with k in B_p.
    void decompose(const Index& i, long long& rep, Index& m) const;

    /// <omega,k> + l, exact.
    Rational level(const Index& k, long long l) const;

    /// True when (p,q) is a Z-basis of I_omega (the shift-class levels
    /// 0, 1/n, ..., (n-1)/n are pairwise distinct).
    bool principal() const { return principal_; }

    bool same_as(const PeriodLattice& o) const { return d_ == o.d_ && p_ == o.p_ && q_ == o.q_; }

    std::string describe() const;

private:
    int d_;
    std::vector<long long> p_;  // row-major
    std::vector<long long> q_;
    long long det_ = 0;
    std::vector<Rational> p_inv_;  // row-major, exact
    std::vector<Rational> omega_;
    std::vector<Index> domain_;
    std::map<Index, long long> domain_lookup_;
    bool principal_ = false;
};

using LatticePtr = std::shared_ptr<const PeriodLattice>;

/// Representative (k,l) of a class of (Z^d x Z)/J_{p,q} with level in [0,1).
struct ShiftClass {
    Index k;
    long long l = 0;
    Rational level;
};

/// Element of X_{p,q}: values on the fundamental domain B_p, extended
/// everywhere by x_{i+p*m} = x_i - <q,m>.
class Configuration {
public:
    Configuration() = default;
    Configuration(LatticePtr lattice, Eigen::VectorXd values);

    /// x^{omega,xi}: x_i = xi + <omega,i>.
    static Configuration linear(LatticePtr lattice, double xi);

    const PeriodLattice& lattice() const { return *lat_; }
    const LatticePtr& lattice_ptr() const { return lat_; }
    const Eigen::VectorXd& values() const { return values_; }
    Eigen::VectorXd& values() { return values_; }

    double value_at(const Index& i) const;
    Configuration shifted(const Index& k, long long l) const;
    Configuration plus(double c) const;

    /// Same configuration encoded on another lattice whose periods are
    /// multiples of this one's (values read through the extension rule).
    Configuration reencoded(const LatticePtr& target) const;

    /// x_0, the value at the lattice origin.
    double origin_value() const;

    /// max_{B_p} |x - y| (same lattice); differences are p-periodic.
    double sup_distance(const Configuration& other) const;

private:
    LatticePtr lat_;
    Eigen::VectorXd values_;
};

enum class Order { LessLess, Less, Equal, Greater, GreaterGreater, Crossing };

std::string order_name(Order o);

/// Ordering verdict over B_p (exhaustive by periodicity). Entries within eta
/// count as equal.
Order compare(const Configuration& x, const Configuration& y, double eta = 1e-12);

struct BirkhoffReport {
    bool birkhoff = true;
    bool deviation_ok = true;   // |x_i - x_0 - <omega,i>| <= 1 on B_p
    double max_deviation = 0.0;
    Index witness_k;            // first violating shift, if any
    long long witness_l = 0;
    bool sign_rule_ok = true;   // level > 0 => tau x >= x, level < 0 => <=
};

/// Finite Birkhoff check: all ||k|| <= shift_radius and
/// |l| <= shift_radius*(1+max|omega_j|)+1, conclusive for periodic
/// configurations passing the deviation pre-check.
BirkhoffReport is_birkhoff(const Configuration& x, int shift_radius, double eta = 1e-12);

std::vector<ShiftClass> enumerate_shift_classes(const PeriodLattice& lattice);

struct WeightedNorm {
    double truncated_sum = 0.0;
    double tail_bound = 0.0;
};

/// sum_{||i||<=R} |x_i-y_i| / 2^{||i||} plus the analytic tail bound
/// max_{B_p}|x-y| * (3^d - sum_{||i||<=R} 2^{-||i||}).
WeightedNorm weighted_norm_difference(const Configuration& x, const Configuration& y,
                                      int truncation_radius);

/// All i with ||i - center|| <= r.
std::vector<Index> ball_indices(int d, const Index& center, int r);

}  // namespace aubrykit
