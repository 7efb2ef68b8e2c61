#pragma once

#include <Eigen/Dense>
#include <functional>
#include <random>
#include <vector>

#include "aubrykit/lattice.hpp"
#include "aubrykit/potential.hpp"

namespace testutil {

using aubrykit::Index;

// Exact integer determinant by cofactor expansion (oracle-grade, small d).
inline long long int_det(int d, const std::vector<long long>& a) {
    if (d == 1) return a[0];
    long long det = 0;
    for (int col = 0; col < d; ++col) {
        std::vector<long long> minor;
        for (int r = 1; r < d; ++r)
            for (int c = 0; c < d; ++c)
                if (c != col) minor.push_back(a[static_cast<size_t>(r) * d + c]);
        const long long cof = int_det(d - 1, minor) * a[static_cast<size_t>(col)];
        det += (col % 2 == 0 ? cof : -cof);
    }
    return det;
}

// Exact membership of p^{-1} i in [0,1)^d via Cramer's rule.
inline bool in_unit_cell(int d, const std::vector<long long>& p, const Index& i) {
    const long long det = int_det(d, p);
    for (int c = 0; c < d; ++c) {
        std::vector<long long> pc = p;
        for (int r = 0; r < d; ++r) pc[static_cast<size_t>(r) * d + c] = i[static_cast<size_t>(r)];
        const long long num = int_det(d, pc);
        // 0 <= num/det < 1
        if (det > 0) {
            if (num < 0 || num >= det) return false;
        } else {
            if (num > 0 || num <= det) return false;
        }
    }
    return true;
}

// Brute-force fundamental domain: scan [-L, L]^d.
inline std::vector<Index> brute_force_domain(int d, const std::vector<long long>& p, long long L) {
    std::vector<Index> out;
    Index i(static_cast<size_t>(d), -L);
    while (true) {
        if (in_unit_cell(d, p, i)) out.push_back(i);
        int axis = 0;
        while (axis < d && ++i[static_cast<size_t>(axis)] > L) {
            i[static_cast<size_t>(axis)] = -L;
            ++axis;
        }
        if (axis == d) break;
    }
    std::sort(out.begin(), out.end());
    return out;
}

// Central finite differences of the periodic action (independent oracle).
inline Eigen::VectorXd fd_gradient(const aubrykit::ActionEvaluator& ev, const Eigen::VectorXd& v,
                                   double h = 1e-5) {
    Eigen::VectorXd g(v.size());
    Eigen::VectorXd t = v;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        t[i] = v[i] + h;
        const double fp = ev.value(t);
        t[i] = v[i] - h;
        const double fm = ev.value(t);
        t[i] = v[i];
        g[i] = (fp - fm) / (2 * h);
    }
    return g;
}

inline Eigen::MatrixXd fd_hessian(const aubrykit::ActionEvaluator& ev, const Eigen::VectorXd& v,
                                  double h = 1e-5) {
    const Eigen::Index n = v.size();
    Eigen::MatrixXd H(n, n);
    Eigen::VectorXd t = v;
    const double f0 = ev.value(v);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
            double val;
            if (i == j) {
                t[i] = v[i] + h;
                const double fp = ev.value(t);
                t[i] = v[i] - h;
                const double fm = ev.value(t);
                t[i] = v[i];
                val = (fp - 2 * f0 + fm) / (h * h);
            } else {
                double s = 0;
                for (int si = -1; si <= 1; si += 2)
                    for (int sj = -1; sj <= 1; sj += 2) {
                        t[i] = v[i] + si * h;
                        t[j] = v[j] + sj * h;
                        s += si * sj * ev.value(t);
                    }
                t[i] = v[i];
                t[j] = v[j];
                val = s / (4 * h * h);
            }
            H(i, j) = val;
            H(j, i) = val;
        }
    }
    return H;
}

inline aubrykit::Configuration random_config(const aubrykit::LatticePtr& lat, double xi,
                                             double amp, std::mt19937_64& rng) {
    aubrykit::Configuration c = aubrykit::Configuration::linear(lat, xi);
    std::uniform_real_distribution<double> unif(-amp, amp);
    for (Eigen::Index i = 0; i < c.values().size(); ++i) c.values()[i] += unif(rng);
    return c;
}

}  // namespace testutil
