#pragma once

#include "grid.hpp"

namespace lmm {

namespace detail {
inline double q_exp(double t) { return t > 0 ? std::exp(-1.0 / t) : 0.0; }
}  // namespace detail

// phi_0: smooth step, 0 for t <= 0 and 1 for t >= 1.
inline double phi0(double t) {
    if (t <= 0) return 0.0;
    if (t >= 1) return 1.0;
    double a = detail::q_exp(t), b = detail::q_exp(1 - t);
    return a / (a + b);
}

// psi_{r,R}(y) = 1 - phi_0((|y| - R)/r): plateau B_R, support B_{R+r}.
inline double psi(double r, double R, const Vec& y) {
    require(r > 0 && R > 0, "psi: radii must be positive");
    return phi0(1.0 - (y.norm() - R) / r);  // = 1 - phi0(.), without cancellation
}

inline void check_delta(double delta) {
    require(delta > 0 && delta < 0.25, "delta must lie in (0, 1/4), got " + std::to_string(delta));
}

inline double phi_delta(double delta, const Vec& y) {
    check_delta(delta);
    return psi(delta, 1 - 2 * delta, y);
}

inline double eta_delta(double delta, const Vec& y) {
    check_delta(delta);
    return psi(delta, delta, y);
}

// eta_0(t) = t on [0, 1/2], 1 on [1, inf), smooth monotone blend in between.
inline double eta0(double t) {
    require(t >= 0, "eta0: argument must be nonnegative");
    if (t <= 0.5) return t;
    if (t >= 1) return 1.0;
    return t + (1 - t) * phi0(2 * (t - 0.5));
}

// Member of the class S: radial cutoff with plateau B_R and support B_{R+r},
// R + r < 2 so the support sits inside B_2.
struct RadialCutoff {
    double r = 0.5;
    double R = 1.0;

    RadialCutoff() = default;
    RadialCutoff(double r_, double R_) : r(r_), R(R_) { validate(); }

    static RadialCutoff phi_d(double delta) { check_delta(delta); return {delta, 1 - 2 * delta}; }
    static RadialCutoff eta_d(double delta) { check_delta(delta); return {delta, delta}; }

    void validate() const {
        require(r > 0 && R > 0, "cutoff radii must be positive");
        require(R + r < 2, "cutoff support must lie inside B_2");
    }
    double operator()(const Vec& y) const { return psi(r, R, y); }
    double plateau() const { return R; }
    double support() const { return R + r; }
};

struct CutoffPair {
    RadialCutoff phi;
    RadialCutoff eta;
};

// P_{phi,eta,u,x} with pointwise data (value, gradient, Hessian) at x.
// Regime 0: constant. Regime 1: adds phi-cut linear term. Regime 2: adds eta-cut quadratic term.
struct TaylorCutoff {
    Vec x;
    double u0 = 0;
    Vec g;
    Mat H;
    CutoffPair pair;
    int regime = 0;

    double operator()(const Vec& z) const {
        double v = u0;
        if (regime == 0) return v;
        Vec y = z - x;
        v += pair.phi(y) * g.dot(y);
        if (regime == 2) v += 0.5 * pair.eta(y) * y.dot(H * y);
        return v;
    }

    SmoothFn as_smooth() const {
        TaylorCutoff c = *this;
        return SmoothFn(int(x.size()), [c](const Vec& z) { return c(z); }, RegularityClass(2.5));
    }
};

inline TaylorCutoff taylor_cutoff(const SmoothFn& u, const Vec& x, const CutoffPair& pair,
                                  RegularityClass beta) {
    TaylorCutoff P;
    P.x = x;
    P.u0 = u(x);
    P.pair = pair;
    P.regime = beta.regime();
    int d = int(x.size());
    P.g = Vec::Zero(d);
    P.H = Mat::Zero(d, d);
    if (P.regime >= 1) {
        P.g = u.gradient(x);
        require(P.g.size() == d && P.g.allFinite(), "taylor_cutoff: gradient data unavailable");
    }
    if (P.regime == 2) {
        P.H = u.hessian(x);
        require(P.H.rows() == d && P.H.allFinite(), "taylor_cutoff: Hessian data unavailable");
    }
    return P;
}

}  // namespace lmm
