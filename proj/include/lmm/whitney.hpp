#pragma once

#include "calculus.hpp"
#include "cubes.hpp"

#include <memory>

namespace lmm {

// p^beta_{u,k}: Taylor-type polynomial anchored at y-hat with discrete derivatives.
struct InterpPoly {
    Vec anchor;
    double u0 = 0;
    Vec g;
    Mat H;
    int regime = 0;

    double operator()(const Vec& x) const {
        if (regime == 0) return u0;
        Vec y = x - anchor;
        double v = u0 + g.dot(y);
        if (regime == 2) v += 0.5 * y.dot(H * y);
        return v;
    }
    Vec gradient(const Vec& x) const {
        if (regime == 0) return Vec::Zero(anchor.size());
        if (regime == 1) return g;
        return g + H * (x - anchor);
    }
    Mat hessian(const Vec&) const {
        int d = int(anchor.size());
        return regime == 2 ? H : Mat(Mat::Zero(d, d));
    }
};

inline InterpPoly interp_poly_at(const GridFunction& u, const Idx& node, RegularityClass beta,
                                 Padding p = Padding::Strict) {
    const auto& g = u.grid();
    int d = g.dim();
    InterpPoly P;
    P.anchor = g.point(node);
    P.u0 = p == Padding::Strict ? u.checked(node) : u.at(node);
    P.regime = beta.regime();
    P.g = Vec::Zero(d);
    P.H = Mat::Zero(d, d);
    if (P.regime >= 1) P.g = dgrad(u, node, p);
    if (P.regime == 2) P.H = dhess(u, node, p);
    return P;
}

inline InterpPoly interp_poly(const GridFunction& u, const WhitneyCube& cube, RegularityClass beta,
                              Padding p = Padding::Strict) {
    return interp_poly_at(u, cube.anchor, beta, p);
}

// E_n^beta u. Reads outside the box are zero (u is an element of C_*(G_n)).
class WhitneyExtension {
public:
    WhitneyExtension(GridFunction u, RegularityClass beta)
        : u_(std::make_shared<const GridFunction>(std::move(u))), beta_(beta) {}

    const GridFunction& data() const { return *u_; }
    RegularityClass beta() const { return beta_; }
    int dim() const { return u_->grid().dim(); }

    double operator()(const Vec& x) const {
        const auto& g = u_->grid();
        CubeCover cov = cubes_at(x, g.spacing());
        if (cov.on_lattice) return u_->at(cov.node);
        double v = 0;
        for (std::size_t i = 0; i < cov.cubes.size(); ++i)
            v += cov.weights[i] * poly(cov.cubes[i].anchor)(x);
        return v;
    }

    // Near a node every active cube shares that anchor, so E is exactly the
    // anchor's polynomial there. Elsewhere derivatives are finite differences.
    Vec gradient(const Vec& x) const {
        if (auto a = single_anchor(x)) return poly(*a).gradient(x);
        double h = u_->grid().spacing(), e = 1e-5 * h;
        Vec out(dim());
        for (int k = 0; k < dim(); ++k) {
            Vec p = x, m = x;
            p[k] += e;
            m[k] -= e;
            out[k] = ((*this)(p) - (*this)(m)) / (2 * e);
        }
        return out;
    }

    Mat hessian(const Vec& x) const {
        if (auto a = single_anchor(x)) return poly(*a).hessian(x);
        double h = u_->grid().spacing(), e = 1e-4 * h;
        int d = dim();
        Mat H(d, d);
        for (int k = 0; k < d; ++k) {
            Vec p = x, m = x;
            p[k] += e;
            m[k] -= e;
            Vec gp = gradient(p), gm = gradient(m);
            for (int l = 0; l < d; ++l) H(l, k) = (gp[l] - gm[l]) / (2 * e);
        }
        return 0.5 * (H + H.transpose());
    }

    SmoothFn as_smooth() const {
        auto self = std::make_shared<WhitneyExtension>(*this);
        SmoothFn f(dim(), [self](const Vec& x) { return (*self)(x); }, beta_);
        f.grad = [self](const Vec& x) { return self->gradient(x); };
        f.hess = [self](const Vec& x) { return self->hessian(x); };
        return f;
    }

    InterpPoly poly(const Idx& anchor) const { return interp_poly_at(*u_, anchor, beta_, Padding::Zero); }

private:
    std::optional<Idx> single_anchor(const Vec& x) const {
        CubeCover cov = cubes_at(x, u_->grid().spacing());
        if (cov.on_lattice) return cov.node;
        for (const auto& c : cov.cubes)
            if (c.anchor != cov.cubes.front().anchor) return std::nullopt;
        return cov.cubes.front().anchor;
    }

    std::shared_ptr<const GridFunction> u_;
    RegularityClass beta_;
};

inline double extend(const GridFunction& u, RegularityClass beta, const Vec& x) {
    return WhitneyExtension(u, beta)(x);
}

// pi_n^beta = E_n^beta o T_n, optionally with Pr_n in between.
inline WhitneyExtension project(const SmoothFn& u, const DyadicGrid& g, RegularityClass beta,
                                bool truncated = false) {
    GridFunction t = restrict(u, g);
    if (truncated) t = truncate(t);
    return WhitneyExtension(std::move(t), beta);
}

struct HolderEstimate {
    double sup = 0;
    double grad_sup = 0;
    double hess_sup = 0;
    double seminorm = 0;
    long pairs = 0;
    std::uint64_t seed = 0;
    double total() const { return sup + grad_sup + hess_sup + seminorm; }
};

namespace holder_detail {
inline Vec fd_grad(const std::function<double(const Vec&)>& f, const Vec& x, double e) {
    Vec g(x.size());
    for (int k = 0; k < x.size(); ++k) {
        Vec p = x, m = x;
        p[k] += e;
        m[k] -= e;
        g[k] = (f(p) - f(m)) / (2 * e);
    }
    return g;
}
inline Mat fd_hess(const std::function<double(const Vec&)>& f, const Vec& x, double e) {
    int d = int(x.size());
    Mat H(d, d);
    for (int k = 0; k < d; ++k) {
        Vec p = x, m = x;
        p[k] += e;
        m[k] -= e;
        Vec gp = fd_grad(f, p, e), gm = fd_grad(f, m, e);
        for (int l = 0; l < d; ++l) H(l, k) = (gp[l] - gm[l]) / (2 * e);
    }
    return 0.5 * (H + H.transpose());
}
}  // namespace holder_detail

// Sampled lower bound of the C^beta norm over the box center +- radius.
// Pairs come from one seeded stream, so adding pairs never lowers the estimate.
inline HolderEstimate holder_norm(const std::function<double(const Vec&)>& f, int dim, RegularityClass beta,
                                  const Vec& center, double radius, long pairs, std::uint64_t seed,
                                  double fd_step = 1e-4) {
    require(pairs >= 100, "holder_norm: need at least 100 pairs");
    HolderEstimate est;
    est.pairs = pairs;
    est.seed = seed;
    Rng rng(seed);
    int reg = beta.regime();
    bool integer = beta.integer();
    double frac = beta.beta - reg;  // exponent for the top derivative
    auto check = [](double v) {
        if (!finite(v)) throw Error("holder_norm: non-finite sample");
        return v;
    };
    for (long p = 0; p < pairs; ++p) {
        Vec x = center + rng.uniform_vec(dim, -radius, radius);
        Vec y;
        if (p % 2 == 0) {
            y = center + rng.uniform_vec(dim, -radius, radius);
        } else {
            Vec dir(dim);
            for (int i = 0; i < dim; ++i) dir[i] = rng.normal();
            double r = radius * std::pow(10.0, -4.0 * rng.uniform());
            y = x + r * dir.normalized();
            for (int i = 0; i < dim; ++i) y[i] = std::clamp(y[i], center[i] - radius, center[i] + radius);
        }
        double dist = (x - y).norm();
        double fx = check(f(x)), fy = check(f(y));
        est.sup = std::max({est.sup, std::abs(fx), std::abs(fy)});
        if (dist <= 0) continue;
        if (reg == 0) {
            if (beta.beta > 0) est.seminorm = std::max(est.seminorm, std::abs(fx - fy) / std::pow(dist, beta.beta));
            continue;
        }
        Vec gx = holder_detail::fd_grad(f, x, fd_step), gy = holder_detail::fd_grad(f, y, fd_step);
        est.grad_sup = std::max({est.grad_sup, check(gx.norm()), check(gy.norm())});
        if (reg == 1) {
            if (integer) {
                if (!beta.plus) est.seminorm = std::max(est.seminorm, std::abs(fx - fy) / dist);
            } else {
                est.seminorm = std::max(est.seminorm, (gx - gy).norm() / std::pow(dist, frac));
            }
            continue;
        }
        Mat Hx = holder_detail::fd_hess(f, x, fd_step), Hy = holder_detail::fd_hess(f, y, fd_step);
        est.hess_sup = std::max({est.hess_sup, check(Hx.norm()), check(Hy.norm())});
        if (integer) {
            if (!beta.plus) est.seminorm = std::max(est.seminorm, (gx - gy).norm() / dist);
        } else {
            est.seminorm = std::max(est.seminorm, (Hx - Hy).norm() / std::pow(dist, frac));
        }
    }
    return est;
}

struct LevelStudy {
    std::vector<int> levels;
    std::vector<double> h;
    std::vector<double> value;
    LogLogFit fit;
};

// sup over sample points in B_R of |pi_n^beta u - u|.
inline LevelStudy projection_study(const SmoothFn& u, RegularityClass beta, const std::vector<int>& levels,
                                   double region, double box_radius, int samples, std::uint64_t seed) {
    require(levels.size() >= 3, "projection_study: need at least three levels");
    LevelStudy st;
    int d = u.dim;
    for (int n : levels) {
        DyadicGrid g(n, d, box_radius);
        WhitneyExtension E = project(u, g, beta);
        Rng rng(seed);
        double err = 0;
        for (int s = 0; s < samples; ++s) {
            Vec x = rng.uniform_vec(d, -region, region);
            err = std::max(err, std::abs(E(x) - u(x)));
        }
        st.levels.push_back(n);
        st.h.push_back(g.spacing());
        st.value.push_back(err);
    }
    st.fit = loglog_fit(st.h, st.value, 1e-14);
    return st;
}

struct DefectStudy {
    std::vector<int> levels;
    std::vector<double> h;
    std::vector<double> defect;
    LogLogFit fit;  // exact == defect identically zero
};

// defect_n = -min(0, inf of pi_n^beta w) over dense points near x0 and random points in B_1(x0).
inline DefectStudy order_preservation_defect(const SmoothFn& w, const Vec& x0, RegularityClass beta,
                                             const std::vector<int>& levels, double box_radius = 4.0,
                                             int random_samples = 2000, std::uint64_t seed = 7) {
    DefectStudy st;
    int d = int(x0.size());
    for (int n : levels) {
        DyadicGrid g(n, d, box_radius);
        GridFunction wn = restrict(w, g);
        auto i0 = g.lattice_index(x0);
        require(i0.has_value(), "order_preservation_defect: x0 must be a node");
        require(std::abs(wn.checked(*i0)) <= 1e-14, "order_preservation_defect: w(x0) must vanish");
        for (long L = 0; L < g.size(); ++L)
            if (wn[L] < 0) throw Error("order_preservation_defect: w is negative at node " + fmt_idx(g.node(L)));
        WhitneyExtension E(wn, beta);
        double h = g.spacing();
        double mn = 0;
        int m = d == 1 ? 400 : (d == 2 ? 40 : 12);
        long total = 1;
        for (int i = 0; i < d; ++i) total *= (m + 1);
        for (long t = 0; t < total; ++t) {
            Vec x(d);
            long r = t;
            for (int i = 0; i < d; ++i) {
                x[i] = x0[i] - 2 * h + 4 * h * double(r % (m + 1)) / m;
                r /= (m + 1);
            }
            mn = std::min(mn, E(x));
        }
        Rng rng(seed);
        for (int s = 0; s < random_samples; ++s) mn = std::min(mn, E(x0 + rng.uniform_vec(d, -1, 1)));
        st.levels.push_back(n);
        st.h.push_back(h);
        st.defect.push_back(mn < 0 ? -mn : 0.0);
    }
    st.fit = loglog_fit(st.h, st.defect, 1e-12);
    return st;
}

struct GradientBoundStudy {
    std::vector<int> levels;
    std::vector<double> gradient;  // |grad pi_n^beta w (x0)|
    std::vector<double> ratio;     // gradient / h^{min(2,beta)-1}
    double max_ratio = 0;
};

inline GradientBoundStudy discrete_min_gradient_bound(const SmoothFn& w, const Vec& x0, RegularityClass beta,
                                                      const std::vector<int>& levels, double box_radius = 4.0) {
    GradientBoundStudy st;
    int d = int(x0.size());
    for (int n : levels) {
        DyadicGrid g(n, d, box_radius);
        GridFunction wn = restrict(w, g);
        auto i0 = g.lattice_index(x0);
        require(i0.has_value(), "discrete_min_gradient_bound: x0 must be a node");
        require(std::abs(wn.checked(*i0)) <= 1e-14, "discrete_min_gradient_bound: w(x0) must vanish");
        for (long L = 0; L < g.size(); ++L)
            if (wn[L] < 0) throw Error("discrete_min_gradient_bound: w is negative at node " + fmt_idx(g.node(L)));
        WhitneyExtension E(wn, beta);
        double gn = E.gradient(x0).norm();
        double r = gn / std::pow(g.spacing(), std::min(2.0, beta.beta) - 1);
        st.levels.push_back(n);
        st.gradient.push_back(gn);
        st.ratio.push_back(r);
        st.max_ratio = std::max(st.max_ratio, r);
    }
    return st;
}

}  // namespace lmm
