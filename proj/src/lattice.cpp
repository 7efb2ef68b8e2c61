#include "aubrykit/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace aubrykit {

namespace {

// Exact inverse of an integer matrix by Gauss-Jordan over rationals.
// Throws when singular.
std::vector<Rational> rational_inverse(int d, const std::vector<long long>& a_int) {
    std::vector<Rational> a(static_cast<size_t>(d) * d), inv(static_cast<size_t>(d) * d, Rational(0));
    for (int i = 0; i < d * d; ++i) a[i] = Rational(a_int[i]);
    for (int i = 0; i < d; ++i) inv[static_cast<size_t>(i) * d + i] = Rational(1);
    for (int col = 0; col < d; ++col) {
        int pivot = -1;
        for (int row = col; row < d; ++row)
            if (a[static_cast<size_t>(row) * d + col] != Rational(0)) { pivot = row; break; }
        if (pivot < 0) throw std::invalid_argument("PeriodLattice: singular period matrix p");
        if (pivot != col)
            for (int j = 0; j < d; ++j) {
                std::swap(a[static_cast<size_t>(pivot) * d + j], a[static_cast<size_t>(col) * d + j]);
                std::swap(inv[static_cast<size_t>(pivot) * d + j], inv[static_cast<size_t>(col) * d + j]);
            }
        Rational piv = a[static_cast<size_t>(col) * d + col];
        for (int j = 0; j < d; ++j) {
            a[static_cast<size_t>(col) * d + j] /= piv;
            inv[static_cast<size_t>(col) * d + j] /= piv;
        }
        for (int row = 0; row < d; ++row) {
            if (row == col) continue;
            Rational f = a[static_cast<size_t>(row) * d + col];
            if (f == Rational(0)) continue;
            for (int j = 0; j < d; ++j) {
                a[static_cast<size_t>(row) * d + j] -= f * a[static_cast<size_t>(col) * d + j];
                inv[static_cast<size_t>(row) * d + j] -= f * inv[static_cast<size_t>(col) * d + j];
            }
        }
    }
    return inv;
}

long long integer_det(int d, const std::vector<long long>& a_int) {
    // Fraction-free enough at desk scale: rational elimination, exact.
    std::vector<Rational> a(static_cast<size_t>(d) * d);
    for (int i = 0; i < d * d; ++i) a[i] = Rational(a_int[i]);
    Rational det(1);
    for (int col = 0; col < d; ++col) {
        int pivot = -1;
        for (int row = col; row < d; ++row)
            if (a[static_cast<size_t>(row) * d + col] != Rational(0)) { pivot = row; break; }
        if (pivot < 0) return 0;
        if (pivot != col) {
            for (int j = 0; j < d; ++j)
                std::swap(a[static_cast<size_t>(pivot) * d + j], a[static_cast<size_t>(col) * d + j]);
            det = -det;
        }
        det *= a[static_cast<size_t>(col) * d + col];
        Rational piv = a[static_cast<size_t>(col) * d + col];
        for (int row = col + 1; row < d; ++row) {
            Rational f = a[static_cast<size_t>(row) * d + col] / piv;
            for (int j = col; j < d; ++j)
                a[static_cast<size_t>(row) * d + j] -= f * a[static_cast<size_t>(col) * d + j];
        }
    }
    if (det.denominator() != 1) throw std::logic_error("integer determinant not integral");
    return det.numerator();
}

}  // namespace

PeriodLattice::PeriodLattice(int d, std::vector<long long> p_row_major, std::vector<long long> q)
    : d_(d), p_(std::move(p_row_major)), q_(std::move(q)) {
    if (d_ <= 0) throw std::invalid_argument("PeriodLattice: dimension must be positive");
    if (p_.size() != static_cast<size_t>(d_) * d_ || q_.size() != static_cast<size_t>(d_))
        throw std::invalid_argument("PeriodLattice: p must be d x d and q length d");
    det_ = integer_det(d_, p_);
    if (det_ == 0) throw std::invalid_argument("PeriodLattice: singular period matrix p");
    p_inv_ = rational_inverse(d_, p_);

    // omega = -p^{-T} q, i.e. omega_i = -sum_j (p^{-1})_{j,i} q_j.
    omega_.assign(d_, Rational(0));
    for (int i = 0; i < d_; ++i) {
        Rational s(0);
        for (int j = 0; j < d_; ++j) s += p_inv_[static_cast<size_t>(j) * d_ + i] * Rational(q_[j]);
        omega_[i] = -s;
    }
    // Sanity: p^T omega + q = 0 exactly.
    for (int j = 0; j < d_; ++j) {
        Rational s(0);
        for (int i = 0; i < d_; ++i) s += Rational(p(i, j)) * omega_[i];
        if (s + Rational(q_[j]) != Rational(0))
            throw std::logic_error("PeriodLattice: p^T omega + q != 0");
    }

    // Enumerate B_p = p([0,1)^d) cap Z^d by scanning the bounding box of the
    // parallelepiped's vertices and testing p^{-1} i in [0,1)^d exactly.
    std::vector<long long> lo(d_, 0), hi(d_, 0);
    for (long long mask = 0; mask < (1LL << d_); ++mask) {
        for (int row = 0; row < d_; ++row) {
            long long v = 0;
            for (int col = 0; col < d_; ++col)
                if (mask & (1LL << col)) v += p(row, col);
            lo[row] = std::min(lo[row], v);
            hi[row] = std::max(hi[row], v);
        }
    }
    Index i(d_, 0);
    std::function<void(int)> scan = [&](int axis) {
        if (axis == d_) {
            for (int c = 0; c < d_; ++c) {
                Rational s(0);
                for (int j = 0; j < d_; ++j) s += p_inv_[static_cast<size_t>(c) * d_ + j] * Rational(i[j]);
                if (s < Rational(0) || s >= Rational(1)) return;
            }
            domain_.push_back(i);
            return;
        }
        for (long long v = lo[axis]; v <= hi[axis]; ++v) {
            i[axis] = v;
            scan(axis + 1);
        }
    };
    scan(0);
    std::sort(domain_.begin(), domain_.end());
    if (static_cast<long long>(domain_.size()) != std::abs(det_))
        throw std::logic_error("PeriodLattice: |B_p| != |det p|");
    for (long long idx = 0; idx < static_cast<long long>(domain_.size()); ++idx)
        domain_lookup_[domain_[static_cast<size_t>(idx)]] = idx;

    // Principality: the |det p| class levels are pairwise distinct iff no
    // nonzero residue has level 0.
    principal_ = true;
    for (size_t idx = 1; idx < domain_.size(); ++idx) {
        Rational lv = level(domain_[idx], 0);
        lv -= Rational(rat_floor(lv));
        if (lv == Rational(0)) { principal_ = false; break; }
    }
}

std::shared_ptr<const PeriodLattice> PeriodLattice::refined(long long n) const {
    std::vector<long long> np(p_), nq(q_);
    for (auto& v : np) v *= n;
    for (auto& v : nq) v *= n;
    return make(d_, std::move(np), std::move(nq));
}

std::vector<double> PeriodLattice::omega_real() const {
    std::vector<double> w(static_cast<size_t>(d_));
    for (int i = 0; i < d_; ++i) w[static_cast<size_t>(i)] = boost::rational_cast<double>(omega_[static_cast<size_t>(i)]);
    return w;
}

double PeriodLattice::omega_max_abs() const {
    double m = 0;
    for (double w : omega_real()) m = std::max(m, std::abs(w));
    return m;
}

long long PeriodLattice::domain_index(const Index& k) const {
    auto it = domain_lookup_.find(k);
    if (it == domain_lookup_.end()) throw std::invalid_argument("domain_index: not in B_p");
    return it->second;
}

void PeriodLattice::decompose(const Index& i, long long& rep, Index& m) const {
    m.assign(static_cast<size_t>(d_), 0);
    for (int c = 0; c < d_; ++c) {
        Rational s(0);
        for (int j = 0; j < d_; ++j) s += p_inv_[static_cast<size_t>(c) * d_ + j] * Rational(i[static_cast<size_t>(j)]);
        m[static_cast<size_t>(c)] = rat_floor(s);
    }
    Index k(static_cast<size_t>(d_));
    for (int r = 0; r < d_; ++r) {
        long long v = i[static_cast<size_t>(r)];
        for (int c = 0; c < d_; ++c) v -= p(r, c) * m[static_cast<size_t>(c)];
        k[static_cast<size_t>(r)] = v;
    }
    rep = domain_index(k);
}

Rational PeriodLattice::level(const Index& k, long long l) const {
    Rational s(l);
    for (int i = 0; i < d_; ++i) s += omega_[static_cast<size_t>(i)] * Rational(k[static_cast<size_t>(i)]);
    return s;
}

std::string PeriodLattice::describe() const {
    std::ostringstream os;
    os << "d=" << d_ << " p=[";
    for (int i = 0; i < d_ * d_; ++i) os << p_[static_cast<size_t>(i)] << (i + 1 < d_ * d_ ? "," : "");
    os << "] q=[";
    for (int i = 0; i < d_; ++i) os << q_[static_cast<size_t>(i)] << (i + 1 < d_ ? "," : "");
    os << "]";
    return os.str();
}

Configuration::Configuration(LatticePtr lattice, Eigen::VectorXd values)
    : lat_(std::move(lattice)), values_(std::move(values)) {
    if (!lat_) throw std::invalid_argument("Configuration: null lattice");
    if (values_.size() != lat_->domain_size())
        throw std::invalid_argument("Configuration: values length != |B_p|");
}

Configuration Configuration::linear(LatticePtr lattice, double xi) {
    const auto omega = lattice->omega_real();
    Eigen::VectorXd v(lattice->domain_size());
    const auto& dom = lattice->domain();
    for (size_t b = 0; b < dom.size(); ++b) {
        double s = xi;
        for (int c = 0; c < lattice->dim(); ++c) s += omega[static_cast<size_t>(c)] * static_cast<double>(dom[b][static_cast<size_t>(c)]);
        v[static_cast<Eigen::Index>(b)] = s;
    }
    return Configuration(std::move(lattice), std::move(v));
}

double Configuration::value_at(const Index& i) const {
    long long rep;
    Index m;
    lat_->decompose(i, rep, m);
    double v = values_[static_cast<Eigen::Index>(rep)];
    for (int j = 0; j < lat_->dim(); ++j) v -= static_cast<double>(lat_->q(j)) * static_cast<double>(m[static_cast<size_t>(j)]);
    return v;
}

Configuration Configuration::shifted(const Index& k, long long l) const {
    if (static_cast<int>(k.size()) != lat_->dim())
        throw std::invalid_argument("shifted: wrong shift dimension");
    const auto& dom = lat_->domain();
    Eigen::VectorXd v(values_.size());
    Index probe(static_cast<size_t>(lat_->dim()));
    for (size_t b = 0; b < dom.size(); ++b) {
        for (int c = 0; c < lat_->dim(); ++c) probe[static_cast<size_t>(c)] = dom[b][static_cast<size_t>(c)] + k[static_cast<size_t>(c)];
        v[static_cast<Eigen::Index>(b)] = value_at(probe) + static_cast<double>(l);
    }
    return Configuration(lat_, std::move(v));
}

Configuration Configuration::plus(double c) const {
    return Configuration(lat_, values_.array() + c);
}

double Configuration::sup_distance(const Configuration& other) const {
    if (!lat_->same_as(other.lattice())) throw std::invalid_argument("sup_distance: lattice mismatch");
    return (values_ - other.values_).cwiseAbs().maxCoeff();
}

Configuration Configuration::reencoded(const LatticePtr& target) const {
    if (target->dim() != lat_->dim())
        throw std::invalid_argument("reencoded: dimension mismatch");
    Eigen::VectorXd v(target->domain_size());
    const auto& dom = target->domain();
    for (size_t b = 0; b < dom.size(); ++b) v[static_cast<Eigen::Index>(b)] = value_at(dom[b]);
    return Configuration(target, std::move(v));
}

double Configuration::origin_value() const {
    Index zero(static_cast<size_t>(lat_->dim()), 0);
    return value_at(zero);
}

std::string order_name(Order o) {
    switch (o) {
        case Order::LessLess: return "<<";
        case Order::Less: return "<";
        case Order::Equal: return "=";
        case Order::Greater: return ">";
        case Order::GreaterGreater: return ">>";
        case Order::Crossing: return "crossing";
    }
    return "?";
}

Order compare(const Configuration& x, const Configuration& y, double eta) {
    if (!x.lattice().same_as(y.lattice())) throw std::invalid_argument("compare: lattice mismatch");
    const Eigen::VectorXd d = y.values() - x.values();
    bool any_up = false, any_down = false, all_up = true, all_down = true;
    for (Eigen::Index i = 0; i < d.size(); ++i) {
        if (d[i] > eta) any_up = true;
        else all_up = false;
        if (d[i] < -eta) any_down = true;
        else all_down = false;
    }
    if (any_up && any_down) return Order::Crossing;
    if (all_up) return Order::LessLess;
    if (all_down) return Order::GreaterGreater;
    if (any_up) return Order::Less;
    if (any_down) return Order::Greater;
    return Order::Equal;
}

BirkhoffReport is_birkhoff(const Configuration& x, int shift_radius, double eta) {
    if (shift_radius < 1) throw std::invalid_argument("is_birkhoff: shift_radius >= 1 required");
    const auto& lat = x.lattice();
    BirkhoffReport rep;

    // Deviation pre-check |x_i - x_0 - <omega,i>| over B_p (p-periodic, so
    // the domain is exhaustive); it bounds the l-range that can cross.
    Index zero(static_cast<size_t>(lat.dim()), 0);
    const double x0 = x.value_at(zero);
    const auto omega = lat.omega_real();
    for (const auto& b : lat.domain()) {
        double lv = 0;
        for (int c = 0; c < lat.dim(); ++c) lv += omega[static_cast<size_t>(c)] * static_cast<double>(b[static_cast<size_t>(c)]);
        rep.max_deviation = std::max(rep.max_deviation, std::abs(x.value_at(b) - x0 - lv));
    }
    rep.deviation_ok = rep.max_deviation <= 1.0 + 1e-9;

    const long long lmax = static_cast<long long>(std::ceil(shift_radius * (1.0 + lat.omega_max_abs()))) + 1;
    std::vector<Index> shifts = ball_indices(lat.dim(), zero, shift_radius);
    // smallest shifts first so the reported witness is minimal
    std::stable_sort(shifts.begin(), shifts.end(), [](const Index& a, const Index& b) {
        if (norm1(a) != norm1(b)) return norm1(a) < norm1(b);
        return b < a;
    });
    std::vector<long long> ls;
    for (long long l = 0; l <= lmax; ++l) {
        ls.push_back(l);
        if (l > 0) ls.push_back(-l);
    }
    for (const auto& k : shifts) {
        for (long long l : ls) {
            if (norm1(k) == 0 && l == 0) continue;
            Order o = compare(x.shifted(k, l), x, eta);
            if (o == Order::Crossing) {
                if (rep.birkhoff) {
                    rep.birkhoff = false;
                    rep.witness_k = k;
                    rep.witness_l = l;
                }
                continue;
            }
            Rational lv = lat.level(k, l);
            if (lv > Rational(0) && (o == Order::Less || o == Order::LessLess))
                rep.sign_rule_ok = false;
            if (lv < Rational(0) && (o == Order::Greater || o == Order::GreaterGreater))
                rep.sign_rule_ok = false;
        }
    }
    return rep;
}

std::vector<ShiftClass> enumerate_shift_classes(const PeriodLattice& lattice) {
    // One class per residue k in B_p; the unique l with level in [0,1).
    std::vector<ShiftClass> classes;
    for (const auto& k : lattice.domain()) {
        Rational base = lattice.level(k, 0);
        long long l = -rat_floor(base);
        ShiftClass sc;
        sc.k = k;
        sc.l = l;
        sc.level = base + Rational(l);
        classes.push_back(std::move(sc));
    }
    std::sort(classes.begin(), classes.end(),
              [](const ShiftClass& a, const ShiftClass& b) { return a.level < b.level; });
    return classes;
}

WeightedNorm weighted_norm_difference(const Configuration& x, const Configuration& y,
                                      int truncation_radius) {
    if (!x.lattice().same_as(y.lattice()))
        throw std::invalid_argument("weighted_norm_difference: lattice mismatch");
    const int d = x.lattice().dim();
    Index zero(static_cast<size_t>(d), 0);
    WeightedNorm out;
    double truncated_weight = 0.0;
    for (const auto& i : ball_indices(d, zero, truncation_radius)) {
        const double w = std::pow(2.0, -static_cast<double>(norm1(i)));
        out.truncated_sum += w * std::abs(x.value_at(i) - y.value_at(i));
        truncated_weight += w;
    }
    const double total_weight = std::pow(3.0, d);  // sum_{Z^d} 2^{-||i||}
    out.tail_bound = x.sup_distance(y) * std::max(0.0, total_weight - truncated_weight);
    return out;
}

std::vector<Index> ball_indices(int d, const Index& center, int r) {
    std::vector<Index> out;
    Index i(static_cast<size_t>(d));
    std::function<void(int, long long)> rec = [&](int axis, long long budget) {
        if (axis == d) {
            out.push_back(i);
            return;
        }
        for (long long v = -budget; v <= budget; ++v) {
            i[static_cast<size_t>(axis)] = center[static_cast<size_t>(axis)] + v;
            rec(axis + 1, budget - std::abs(v));
        }
    };
    rec(0, r);
    return out;
}

}  // namespace aubrykit
