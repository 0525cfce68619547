#pragma once

#include "grid.hpp"

#include <map>

namespace lmm {

struct Atom {
    Vec y;
    double mass = 0;
};

// Purely atomic measure on R^d \ {0}.
struct DiscreteMeasure {
    std::vector<Atom> atoms;
    bool nonneg = false;

    void add(const Vec& y, double m) { atoms.push_back({y, m}); }
    std::size_t size() const { return atoms.size(); }
    bool empty() const { return atoms.empty(); }

    void validate() const {
        for (const auto& a : atoms) {
            if (a.y.norm() == 0) throw Error("measure: atom at the origin");
            if (!finite(a.mass)) throw Error("measure: non-finite mass at " + fmt_vec(a.y));
            if (nonneg && a.mass < 0) throw Error("measure: negative mass at " + fmt_vec(a.y) + " with nonneg flag");
        }
    }
    bool all_nonneg(double tol = 0) const {
        for (const auto& a : atoms)
            if (a.mass < -tol) return false;
        return true;
    }
};

struct LevyCoefficients {
    Mat A;
    Vec B;
    double C = 0;

    static LevyCoefficients zero(int d) { return {Mat::Zero(d, d), Vec::Zero(d), 0.0}; }
};

inline bool is_psd(const Mat& A, double tol = 1e-12) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (A + A.transpose()));
    return es.eigenvalues().minCoeff() >= -tol * std::max(1.0, A.norm());
}

// x -> (A, B, C) and x -> mu; the constant flag promises both fields ignore x.
struct LevyOperator {
    int dim = 1;
    std::function<LevyCoefficients(const Vec&)> coeffs;
    std::function<DiscreteMeasure(const Vec&)> measure;
    bool constant = true;

    static LevyOperator make_constant(const LevyCoefficients& c, const DiscreteMeasure& mu) {
        mu.validate();
        LevyOperator L;
        L.dim = int(c.B.size());
        L.coeffs = [c](const Vec&) { return c; };
        L.measure = [mu](const Vec&) { return mu; };
        L.constant = true;
        return L;
    }
    static LevyOperator make_constant(const Mat& A, const Vec& B, double C, const DiscreteMeasure& mu = {}) {
        return make_constant(LevyCoefficients{A, B, C}, mu);
    }

    // A >= 0 and mu >= 0 at x
    bool gcp_at(const Vec& x) const {
        return is_psd(coeffs(x).A) && measure(x).all_nonneg();
    }
};

// tr(A D^2u) + B.grad u + C u + sum m (u(x+y) - u(x) - 1_{|y|<rho} grad u(x).y), rho = 1 by default.
inline double evaluate(const LevyOperator& L, const SmoothFn& u, const Vec& x, double rho = 1.0) {
    LevyCoefficients c = L.coeffs(x);
    DiscreteMeasure mu = L.measure(x);
    int d = L.dim;
    double ux = u(x);
    bool need_grad = c.B.norm() > 0;
    for (const auto& a : mu.atoms)
        if (a.y.norm() < rho) need_grad = true;
    Vec g = need_grad ? u.gradient(x) : Vec(Vec::Zero(d));
    double v = c.C * ux + c.B.dot(g);
    if (c.A.norm() > 0) v += (c.A * u.hessian(x)).trace();
    if (!finite(v)) throw Error("evaluate: non-finite local part at " + fmt_vec(x));
    for (const auto& a : mu.atoms) {
        double t = u(x + a.y) - ux;
        if (a.y.norm() < rho) t -= g.dot(a.y);
        double term = a.mass * t;
        if (!finite(term)) throw Error("evaluate: non-finite jump term for atom " + fmt_vec(a.y));
        v += term;
    }
    return v;
}

inline double levy_moment(const DiscreteMeasure& mu, double beta) {
    double s = 0;
    for (const auto& a : mu.atoms) {
        if (mu.nonneg && a.mass < 0) throw Error("levy_moment: negative mass with nonneg flag");
        s += a.mass * std::min(1.0, std::pow(a.y.norm(), beta));
    }
    return s;
}

namespace levy_detail {
// offsets are matched after rounding to a fine dyadic grid
inline std::vector<long long> key(const Vec& y) {
    std::vector<long long> k(y.size());
    for (int i = 0; i < y.size(); ++i) k[i] = std::llround(y[i] * 0x1p40);
    return k;
}
}  // namespace levy_detail

// Total variation of mu1 - mu2 restricted to |y| >= r.
inline double tv_distance(const DiscreteMeasure& m1, const DiscreteMeasure& m2, double r) {
    require(r > 0, "tv_distance: radius must be positive");
    std::map<std::vector<long long>, double> diff;
    for (const auto& a : m1.atoms)
        if (a.y.norm() >= r) diff[levy_detail::key(a.y)] += a.mass;
    for (const auto& a : m2.atoms)
        if (a.y.norm() >= r) diff[levy_detail::key(a.y)] -= a.mass;
    double s = 0;
    for (const auto& [k, v] : diff) s += std::abs(v);
    return s;
}

}  // namespace lmm
