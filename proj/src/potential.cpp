#include "aubrykit/potential.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

namespace aubrykit {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

WindowGeometry::WindowGeometry(int d_, int r_) : d(d_), r(r_) {
    Index zero(static_cast<size_t>(d), 0);
    offsets = ball_indices(d, zero, r);
    for (size_t i = 0; i < offsets.size(); ++i) {
        if (norm1(offsets[i]) == 0) center = static_cast<int>(i);
        if (norm1(offsets[i]) == 1) nearest.push_back(static_cast<int>(i));
    }
}

int WindowGeometry::index_of(const Index& offset) const {
    auto it = std::lower_bound(offsets.begin(), offsets.end(), offset);
    if (it == offsets.end() || *it != offset) throw std::invalid_argument("offset outside window");
    return static_cast<int>(it - offsets.begin());
}

TrigSeries TrigSeries::standard(double k) {
    TrigSeries v;
    v.terms.push_back({1, k / (8.0 * M_PI * M_PI), 0.0});
    return v;
}

bool TrigSeries::empty() const {
    if (!terms.empty()) {
        for (const auto& t : terms)
            if (t.cos_coeff != 0.0 || t.sin_coeff != 0.0) return false;
    }
    return true;
}

double TrigSeries::eval(double x) const {
    double s = constant;
    for (const auto& t : terms)
        s += t.cos_coeff * std::cos(kTwoPi * t.harmonic * x) +
             t.sin_coeff * std::sin(kTwoPi * t.harmonic * x);
    return s;
}

double TrigSeries::d1(double x) const {
    double s = 0;
    for (const auto& t : terms) {
        const double w = kTwoPi * t.harmonic;
        s += -t.cos_coeff * w * std::sin(w * x) + t.sin_coeff * w * std::cos(w * x);
    }
    return s;
}

double TrigSeries::d2(double x) const {
    double s = 0;
    for (const auto& t : terms) {
        const double w = kTwoPi * t.harmonic;
        s += -t.cos_coeff * w * w * std::cos(w * x) - t.sin_coeff * w * w * std::sin(w * x);
    }
    return s;
}

double TrigSeries::oscillation() const {
    if (empty()) return 0.0;
    // Bracket roots of V' on a fine grid over one period, bisect each, and
    // take extrema over the refined critical values.
    const int n = 4096;
    double vmin = eval(0.0), vmax = vmin;
    double prev_d = d1(0.0);
    for (int i = 1; i <= n; ++i) {
        const double x = static_cast<double>(i) / n;
        const double v = eval(x);
        vmin = std::min(vmin, v);
        vmax = std::max(vmax, v);
        const double dd = d1(x);
        if (prev_d == 0.0 || (prev_d < 0) != (dd < 0)) {
            double a = static_cast<double>(i - 1) / n, b = x;
            double fa = d1(a);
            for (int it = 0; it < 80; ++it) {
                const double m = 0.5 * (a + b), fm = d1(m);
                if ((fa < 0) == (fm < 0)) { a = m; fa = fm; }
                else b = m;
            }
            const double v2 = eval(0.5 * (a + b));
            vmin = std::min(vmin, v2);
            vmax = std::max(vmax, v2);
        }
        prev_d = dd;
    }
    return vmax - vmin;
}

namespace {

class FKPotential final : public LocalPotential {
public:
    explicit FKPotential(FKSpec spec) : spec_(std::move(spec)), geom_(spec_.d, 1) {
        if (spec_.d < 1) throw std::invalid_argument("fk_potential: d >= 1 required");
        coupling_ = 1.0 / (8.0 * spec_.d);
    }

    const WindowGeometry& geometry() const override { return geom_; }

    double value(const Eigen::VectorXd& w) const override {
        const double xc = w[geom_.center];
        double s = spec_.onsite.eval(xc);
        for (int nn : geom_.nearest) {
            const double dxy = w[nn] - xc;
            s += coupling_ * dxy * dxy;
        }
        return s;
    }

    double deriv1(int oi, const Eigen::VectorXd& w) const override {
        const double xc = w[geom_.center];
        if (oi == geom_.center) {
            double s = spec_.onsite.d1(xc);
            for (int nn : geom_.nearest) s -= 2.0 * coupling_ * (w[nn] - xc);
            return s;
        }
        if (norm1(geom_.offsets[static_cast<size_t>(oi)]) == 1)
            return 2.0 * coupling_ * (w[oi] - xc);
        return 0.0;
    }

    double deriv2(int oi, int ok, const Eigen::VectorXd& w) const override {
        const bool ci = oi == geom_.center, ck = ok == geom_.center;
        const bool ni = norm1(geom_.offsets[static_cast<size_t>(oi)]) == 1;
        const bool nk = norm1(geom_.offsets[static_cast<size_t>(ok)]) == 1;
        if (ci && ck) return spec_.onsite.d2(w[geom_.center]) + 2.0 * coupling_ * geom_.nearest.size();
        if (ci && nk) return -2.0 * coupling_;
        if (ni && ck) return -2.0 * coupling_;
        if (ni && nk && oi == ok) return 2.0 * coupling_;
        return 0.0;
    }

    std::string name() const override { return "frenkel_kontorova"; }
    std::string params_text() const override {
        std::ostringstream os;
        os << "d=" << spec_.d << " terms=" << spec_.onsite.terms.size();
        return os.str();
    }

private:
    FKSpec spec_;
    WindowGeometry geom_;
    double coupling_;
};

class CustomPotential final : public LocalPotential {
public:
    CustomPotential(int d, int r, std::function<double(const Eigen::VectorXd&)> f, std::string name)
        : geom_(d, r), f_(std::move(f)), name_(std::move(name)) {}

    const WindowGeometry& geometry() const override { return geom_; }
    double value(const Eigen::VectorXd& w) const override { return f_(w); }

    double deriv1(int oi, const Eigen::VectorXd& w) const override {
        Eigen::VectorXd t = w;
        t[oi] = w[oi] + kH;
        const double fp = f_(t);
        t[oi] = w[oi] - kH;
        const double fm = f_(t);
        return (fp - fm) / (2.0 * kH);
    }

    double deriv2(int oi, int ok, const Eigen::VectorXd& w) const override {
        Eigen::VectorXd t = w;
        if (oi == ok) {
            const double f0 = f_(w);
            t[oi] = w[oi] + kH;
            const double fp = f_(t);
            t[oi] = w[oi] - kH;
            const double fm = f_(t);
            return (fp - 2.0 * f0 + fm) / (kH * kH);
        }
        double s = 0;
        for (int si = -1; si <= 1; si += 2)
            for (int sk = -1; sk <= 1; sk += 2) {
                t = w;
                t[oi] += si * kH;
                t[ok] += sk * kH;
                s += si * sk * f_(t);
            }
        return s / (4.0 * kH * kH);
    }

    std::string name() const override { return name_; }

private:
    static constexpr double kH = 1e-5;
    WindowGeometry geom_;
    std::function<double(const Eigen::VectorXd&)> f_;
    std::string name_;
};

class MorsePerturbedPotential final : public LocalPotential {
public:
    MorsePerturbedPotential(PotentialPtr base, const LatticePtr& lattice, MorseApproxSpec spec)
        : base_(std::move(base)), spec_(spec) {
        if (base_->dim() != lattice->dim())
            throw std::invalid_argument("morse_perturbation: dimension mismatch");
        if (spec_.n < 1 || spec_.epsilon <= 0.0)
            throw std::invalid_argument("morse_perturbation: need n >= 1 and epsilon > 0");
        int r = base_->range();
        for (const auto& b : lattice->domain()) r = std::max<int>(r, static_cast<int>(norm1(b)));
        geom_ = std::make_unique<WindowGeometry>(base_->dim(), r);
        base_map_.reserve(base_->geometry().offsets.size());
        for (const auto& o : base_->geometry().offsets) base_map_.push_back(geom_->index_of(o));
        for (const auto& b : lattice->domain()) pair_sites_.push_back(geom_->index_of(b));
        pair_weight_ = 1.0 / (static_cast<double>(spec_.n) * static_cast<double>(lattice->domain_size()));

        // Random 1-periodic onsite perturbation with sup norm <= epsilon.
        std::mt19937_64 rng(spec_.seed);
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        double coeff_sum = 0;
        for (int h = 1; h <= spec_.degree; ++h) {
            TrigSeries::Term t;
            t.harmonic = h;
            t.cos_coeff = unif(rng);
            t.sin_coeff = unif(rng);
            coeff_sum += std::abs(t.cos_coeff) + std::abs(t.sin_coeff);
            g_.terms.push_back(t);
        }
        const double scale = coeff_sum > 0 ? spec_.epsilon / coeff_sum : 0.0;
        for (auto& t : g_.terms) {
            t.cos_coeff *= scale;
            t.sin_coeff *= scale;
        }
    }

    const WindowGeometry& geometry() const override { return *geom_; }

    double value(const Eigen::VectorXd& w) const override {
        double s = base_->value(base_window(w)) + g_.eval(w[geom_->center]);
        for (size_t a = 0; a < pair_sites_.size(); ++a)
            for (size_t b = 0; b < pair_sites_.size(); ++b) {
                if (a == b) continue;
                const double u = w[pair_sites_[b]] - w[pair_sites_[a]];
                s += pair_weight_ * u * std::atan(u);
            }
        return s;
    }

    double deriv1(int oi, const Eigen::VectorXd& w) const override {
        double s = base_in_window(oi) >= 0 ? base_->deriv1(base_in_window(oi), base_window(w)) : 0.0;
        if (oi == geom_->center) s += g_.d1(w[oi]);
        const auto it = std::find(pair_sites_.begin(), pair_sites_.end(), oi);
        if (it != pair_sites_.end()) {
            for (int site : pair_sites_) {
                if (site == oi) continue;
                // d/dxi of (x_k - x_i) atan(x_k - x_i) for both pair orders.
                const double u = w[oi] - w[site];
                s += 2.0 * pair_weight_ * df(u);
            }
        }
        return s;
    }

    double deriv2(int oi, int ok, const Eigen::VectorXd& w) const override {
        double s = 0.0;
        const int bi = base_in_window(oi), bk = base_in_window(ok);
        if (bi >= 0 && bk >= 0) s += base_->deriv2(bi, bk, base_window(w));
        if (oi == geom_->center && ok == geom_->center) s += g_.d2(w[oi]);
        const bool pi = std::find(pair_sites_.begin(), pair_sites_.end(), oi) != pair_sites_.end();
        const bool pk = std::find(pair_sites_.begin(), pair_sites_.end(), ok) != pair_sites_.end();
        if (pi && pk) {
            if (oi == ok) {
                for (int site : pair_sites_) {
                    if (site == oi) continue;
                    s += 2.0 * pair_weight_ * ddf(w[oi] - w[site]);
                }
            } else {
                s -= 2.0 * pair_weight_ * ddf(w[oi] - w[ok]);
            }
        }
        return s;
    }

    std::string name() const override { return base_->name() + "+morse"; }
    std::string params_text() const override {
        std::ostringstream os;
        os << "n=" << spec_.n << " eps=" << spec_.epsilon << " seed=" << spec_.seed
           << " degree=" << spec_.degree;
        return os.str();
    }

private:
    static double df(double u) { return std::atan(u) + u / (1.0 + u * u); }
    static double ddf(double u) {
        const double t = 1.0 + u * u;
        return 2.0 / (t * t);
    }

    Eigen::VectorXd base_window(const Eigen::VectorXd& w) const {
        Eigen::VectorXd bw(static_cast<Eigen::Index>(base_map_.size()));
        for (size_t i = 0; i < base_map_.size(); ++i) bw[static_cast<Eigen::Index>(i)] = w[base_map_[i]];
        return bw;
    }
    int base_in_window(int oi) const {
        auto it = std::find(base_map_.begin(), base_map_.end(), oi);
        return it == base_map_.end() ? -1 : static_cast<int>(it - base_map_.begin());
    }

    PotentialPtr base_;
    MorseApproxSpec spec_;
    std::unique_ptr<WindowGeometry> geom_;
    std::vector<int> base_map_;   // base offset index -> enlarged window index
    std::vector<int> pair_sites_; // window indices of the B_p offsets
    double pair_weight_;
    TrigSeries g_;
};

}  // namespace

PotentialPtr fk_potential(const FKSpec& spec) { return std::make_shared<FKPotential>(spec); }

PotentialPtr custom_potential(int d, int r, std::function<double(const Eigen::VectorXd&)> value,
                              std::string name) {
    return std::make_shared<CustomPotential>(d, r, std::move(value), std::move(name));
}

PotentialPtr morse_perturbation(const PotentialPtr& base, const LatticePtr& lattice,
                                const MorseApproxSpec& spec) {
    return std::make_shared<MorsePerturbedPotential>(base, lattice, spec);
}

ConditionReport verify_conditions(const LocalPotential& pot, int sample_budget,
                                  double box_halfwidth, unsigned long long seed) {
    if (sample_budget < 1) throw std::invalid_argument("verify_conditions: sample_budget >= 1");
    const auto& geom = pot.geometry();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-box_halfwidth, box_halfwidth);
    ConditionReport rep;

    rep.A.pass = true;
    rep.A.stat = geom.r;
    rep.A.detail = "finite range by construction";

    double worstB = 0, worstC = 1e300, worstD = -1e300;
    double lambda_min = 1e300, cmax = 0;
    const int nw = geom.size();
    Eigen::VectorXd w(nw);
    for (int s = 0; s < sample_budget; ++s) {
        for (int i = 0; i < nw; ++i) w[i] = unif(rng);

        // B: vertical periodicity S_0(w + 1) = S_0(w).
        worstB = std::max(worstB, std::abs(pot.value(w.array() + 1.0) - pot.value(w)));

        // C: growth when a nearest-neighbor separation runs to the box edge.
        if (!geom.nearest.empty()) {
            Eigen::VectorXd t = w;
            const int nn = geom.nearest[static_cast<size_t>(s) % geom.nearest.size()];
            t[nn] = t[geom.center];
            const double near_val = pot.value(t);
            t[nn] = t[geom.center] + ((s % 2) ? box_halfwidth : -box_halfwidth);
            worstC = std::min(worstC, pot.value(t) - near_val);
        }

        // D and E: second-derivative signs and bounds.
        for (int oi = 0; oi < nw; ++oi)
            for (int ok = 0; ok < nw; ++ok) {
                const double h = pot.deriv2(oi, ok, w);
                cmax = std::max(cmax, std::abs(h));
                if (oi != ok) worstD = std::max(worstD, h);
                if (oi == geom.center && norm1(geom.offsets[static_cast<size_t>(ok)]) == 1)
                    lambda_min = std::min(lambda_min, -h);
            }
    }

    rep.B.pass = worstB <= 1e-9;
    rep.B.stat = worstB;
    rep.B.detail = "max |S_0(w+1) - S_0(w)| over samples";

    rep.C.pass = worstC > 0;
    rep.C.stat = worstC;
    rep.C.detail = "min sampled growth of S_0 toward the box edge (report only)";

    rep.D.pass = worstD <= 1e-9 && lambda_min > 0;
    rep.D.stat = worstD;
    rep.D.detail = "max sampled off-diagonal second derivative (must be <= 0)";
    rep.lambda_emp = lambda_min == 1e300 ? 0.0 : lambda_min;

    rep.E.pass = std::isfinite(cmax);
    rep.E.stat = cmax;
    rep.E.detail = "max sampled |second derivative|";
    rep.c_emp = cmax;
    return rep;
}

ActionEvaluator::ActionEvaluator(PotentialPtr pot, LatticePtr lattice)
    : pot_(std::move(pot)), lat_(std::move(lattice)) {
    if (pot_->dim() != lat_->dim())
        throw std::invalid_argument("ActionEvaluator: dimension mismatch");
    const auto& geom = pot_->geometry();
    wsize_ = geom.size();
    nsites_ = lat_->domain_size();
    plan_.resize(static_cast<size_t>(nsites_) * wsize_);
    Index probe(static_cast<size_t>(lat_->dim()));
    Index m;
    for (long long j = 0; j < nsites_; ++j) {
        const Index& site = lat_->domain()[static_cast<size_t>(j)];
        for (int oi = 0; oi < wsize_; ++oi) {
            for (int c = 0; c < lat_->dim(); ++c)
                probe[static_cast<size_t>(c)] =
                    site[static_cast<size_t>(c)] + geom.offsets[static_cast<size_t>(oi)][static_cast<size_t>(c)];
            long long rep;
            lat_->decompose(probe, rep, m);
            double qdot = 0;
            for (int c = 0; c < lat_->dim(); ++c)
                qdot += static_cast<double>(lat_->q(c)) * static_cast<double>(m[static_cast<size_t>(c)]);
            plan_[static_cast<size_t>(j) * wsize_ + oi] = {static_cast<int>(rep), qdot};
        }
    }
}

void ActionEvaluator::fill_window(const Eigen::VectorXd& vals, long long j, Eigen::VectorXd& w) const {
    const PlanEntry* row = plan_.data() + static_cast<size_t>(j) * wsize_;
    for (int oi = 0; oi < wsize_; ++oi) w[oi] = vals[row[oi].rep] - row[oi].qdot;
}

double ActionEvaluator::value(const Eigen::VectorXd& vals, bool parallel) const {
    if (!parallel || nsites_ < 64 || omp_get_max_threads() == 1) {
        double s = 0;
        Eigen::VectorXd w(wsize_);
        for (long long j = 0; j < nsites_; ++j) {
            fill_window(vals, j, w);
            s += pot_->value(w);
        }
        return s;
    }
    const int nt = omp_get_max_threads();
    std::vector<double> partial(static_cast<size_t>(nt), 0.0);
#pragma omp parallel
    {
        const int tid = omp_get_thread_num();
        Eigen::VectorXd w(wsize_);
        double s = 0;
#pragma omp for schedule(static)
        for (long long j = 0; j < nsites_; ++j) {
            fill_window(vals, j, w);
            s += pot_->value(w);
        }
        partial[static_cast<size_t>(tid)] = s;
    }
    double s = 0;
    for (double v : partial) s += v;
    return s;
}

void ActionEvaluator::gradient(const Eigen::VectorXd& vals, Eigen::VectorXd& out, bool parallel) const {
    out.setZero(nsites_);
    if (!parallel || nsites_ < 64 || omp_get_max_threads() == 1) {
        Eigen::VectorXd w(wsize_);
        for (long long j = 0; j < nsites_; ++j) {
            fill_window(vals, j, w);
            const PlanEntry* row = plan_.data() + static_cast<size_t>(j) * wsize_;
            for (int oi = 0; oi < wsize_; ++oi) out[row[oi].rep] += pot_->deriv1(oi, w);
        }
        return;
    }
    const int nt = omp_get_max_threads();
    std::vector<Eigen::VectorXd> partial(static_cast<size_t>(nt));
#pragma omp parallel
    {
        const int tid = omp_get_thread_num();
        Eigen::VectorXd& acc = partial[static_cast<size_t>(tid)];
        acc.setZero(nsites_);
        Eigen::VectorXd w(wsize_);
#pragma omp for schedule(static)
        for (long long j = 0; j < nsites_; ++j) {
            fill_window(vals, j, w);
            const PlanEntry* row = plan_.data() + static_cast<size_t>(j) * wsize_;
            for (int oi = 0; oi < wsize_; ++oi) acc[row[oi].rep] += pot_->deriv1(oi, w);
        }
    }
    for (const auto& acc : partial)
        if (acc.size() == out.size()) out += acc;
}

void ActionEvaluator::hessian(const Eigen::VectorXd& vals, Eigen::MatrixXd& out, bool parallel) const {
    out.setZero(nsites_, nsites_);
    if (!parallel || nsites_ < 64 || omp_get_max_threads() == 1) {
        Eigen::VectorXd w(wsize_);
        for (long long j = 0; j < nsites_; ++j) {
            fill_window(vals, j, w);
            const PlanEntry* row = plan_.data() + static_cast<size_t>(j) * wsize_;
            for (int oi = 0; oi < wsize_; ++oi)
                for (int ok = 0; ok < wsize_; ++ok)
                    out(row[oi].rep, row[ok].rep) += pot_->deriv2(oi, ok, w);
        }
        return;
    }
    const int nt = omp_get_max_threads();
    std::vector<Eigen::MatrixXd> partial(static_cast<size_t>(nt));
#pragma omp parallel
    {
        const int tid = omp_get_thread_num();
        Eigen::MatrixXd& acc = partial[static_cast<size_t>(tid)];
        acc.setZero(nsites_, nsites_);
        Eigen::VectorXd w(wsize_);
#pragma omp for schedule(static)
        for (long long j = 0; j < nsites_; ++j) {
            fill_window(vals, j, w);
            const PlanEntry* row = plan_.data() + static_cast<size_t>(j) * wsize_;
            for (int oi = 0; oi < wsize_; ++oi)
                for (int ok = 0; ok < wsize_; ++ok)
                    acc(row[oi].rep, row[ok].rep) += pot_->deriv2(oi, ok, w);
        }
    }
    for (const auto& acc : partial)
        if (acc.size() == out.size()) out += acc;
}

ActionEvaluator::TwistBounds ActionEvaluator::twist_bounds(const Eigen::VectorXd& vals) const {
    const auto& geom = pot_->geometry();
    TwistBounds tb{1e300, -1e300};
    Eigen::VectorXd ud = Eigen::VectorXd::Zero(nsites_);
    Eigen::VectorXd w(wsize_);
    for (long long j = 0; j < nsites_; ++j) {
        fill_window(vals, j, w);
        const PlanEntry* row = plan_.data() + static_cast<size_t>(j) * wsize_;
        for (int nn : geom.nearest)
            tb.lambda = std::min(tb.lambda, -pot_->deriv2(geom.center, nn, w));
        for (int oi = 0; oi < wsize_; ++oi)
            ud[row[oi].rep] += pot_->deriv2(oi, oi, w);
    }
    tb.diag_max = ud.maxCoeff();
    return tb;
}

ActionEval action_derivatives(const PotentialPtr& pot, const Configuration& config,
                              bool want_hessian) {
    ActionEvaluator ev(pot, config.lattice_ptr());
    ActionEval out;
    out.value = ev.value(config.values());
    ev.gradient(config.values(), out.gradient);
    if (want_hessian) ev.hessian(config.values(), out.hessian);
    return out;
}

double stationarity_defect(const PotentialPtr& pot, const Configuration& config) {
    ActionEvaluator ev(pot, config.lattice_ptr());
    Eigen::VectorXd g;
    ev.gradient(config.values(), g);
    return g.squaredNorm();
}

}  // namespace aubrykit
