#pragma once

#include "special.hpp"

namespace lmm {

// Strict: every stencil node must be inside the box. Zero: out-of-box reads are 0.
enum class Padding { Strict, Zero };

namespace calc_detail {
inline double read(const GridFunction& u, const Idx& i, Padding p) {
    return p == Padding::Strict ? u.checked(i) : u.at(i);
}
}  // namespace calc_detail

// Central difference (u(x+h e_k) - u(x-h e_k)) / 2h.
inline Vec dgrad(const GridFunction& u, const Idx& x, Padding p = Padding::Strict) {
    const auto& g = u.grid();
    int d = g.dim();
    double h = g.spacing();
    Vec out(d);
    for (int k = 0; k < d; ++k) {
        Idx a = x, b = x;
        a[k] += 1;
        b[k] -= 1;
        out[k] = (calc_detail::read(u, a, p) - calc_detail::read(u, b, p)) / (2 * h);
    }
    return out;
}

struct StencilDerivatives {
    Vec grad;
    Mat hess_raw;  // forward four-point values as defined
    Mat hess;      // (H + H^T)/2
};

// Forward second difference [u(x+he_k+he_l) - u(x+he_k) - u(x+he_l) + u(x)] / h^2.
inline Mat dhess_raw(const GridFunction& u, const Idx& x, Padding p = Padding::Strict) {
    const auto& g = u.grid();
    int d = g.dim();
    double h = g.spacing();
    Mat H(d, d);
    double u0 = calc_detail::read(u, x, p);
    for (int k = 0; k < d; ++k) {
        for (int l = 0; l < d; ++l) {
            Idx kl = x, kk = x, ll = x;
            kl[k] += 1;
            kl[l] += 1;
            kk[k] += 1;
            ll[l] += 1;
            H(k, l) = (calc_detail::read(u, kl, p) - calc_detail::read(u, kk, p) -
                       calc_detail::read(u, ll, p) + u0) /
                      (h * h);
        }
    }
    return H;
}

inline Mat dhess(const GridFunction& u, const Idx& x, Padding p = Padding::Strict) {
    Mat H = dhess_raw(u, x, p);
    return 0.5 * (H + H.transpose());
}

inline StencilDerivatives stencil_derivatives(const GridFunction& u, const Idx& x,
                                              Padding p = Padding::Strict) {
    StencilDerivatives s;
    s.grad = dgrad(u, x, p);
    s.hess_raw = dhess_raw(u, x, p);
    s.hess = 0.5 * (s.hess_raw + s.hess_raw.transpose());
    return s;
}

// P^{(n)}: the Taylor cutoff with discrete derivatives at the node x.
inline TaylorCutoff taylor_cutoff_discrete(const GridFunction& u, const Idx& x, const CutoffPair& pair,
                                           RegularityClass beta, Padding p = Padding::Strict) {
    const auto& g = u.grid();
    int d = g.dim();
    TaylorCutoff P;
    P.x = g.point(x);
    P.u0 = calc_detail::read(u, x, p);
    P.pair = pair;
    P.regime = beta.regime();
    P.g = Vec::Zero(d);
    P.H = Mat::Zero(d, d);
    if (P.regime >= 1) P.g = dgrad(u, x, p);
    if (P.regime == 2) P.H = dhess(u, x, p);
    return P;
}

enum class DerivativeKind { Grad, Hess };

struct ConvergenceStudy {
    std::vector<int> levels;
    std::vector<double> h;
    std::vector<double> error;
    LogLogFit fit;
};

// Error of the discrete derivative at x against the exact field of u, per level,
// and the log-log slope. x must be a node at every level.
inline ConvergenceStudy convergence_order(const SmoothFn& u, DerivativeKind which,
                                          const std::vector<int>& levels, const Vec& x,
                                          double exact_tol = 1e-11) {
    require(levels.size() >= 3, "convergence_order: need at least three levels");
    ConvergenceStudy st;
    int d = int(x.size());
    for (int n : levels) {
        double h = std::ldexp(1.0, -n);
        double R = (std::ceil(x.cwiseAbs().maxCoeff() / h) + 3) * h;
        DyadicGrid g(n, d, R);
        auto xi = g.lattice_index(x);
        require(xi.has_value(), "convergence_order: x is not a node at level " + std::to_string(n));
        GridFunction gu = restrict(u, g);
        double e;
        if (which == DerivativeKind::Grad)
            e = (dgrad(gu, *xi) - u.gradient(x)).cwiseAbs().maxCoeff();
        else
            e = (dhess(gu, *xi) - u.hessian(x)).cwiseAbs().maxCoeff();
        st.levels.push_back(n);
        st.h.push_back(h);
        st.error.push_back(e);
    }
    st.fit = loglog_fit(st.h, st.error, exact_tol);
    return st;
}

}  // namespace lmm
