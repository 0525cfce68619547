#pragma once

#include "levy.hpp"
#include "special.hpp"
#include "whitney.hpp"

namespace lmm {

struct KernelEntry {
    Vec y;
    double w = 0;
};

// <l, u> = sum_y K(y) u(x0 + y)
struct PointFunctional {
    Vec x0;
    std::vector<KernelEntry> kernel;

    int dim() const { return int(x0.size()); }

    // differenced form: C u(x0) + sum_{y != 0} K(y)(u(x0+y) - u(x0)), less cancellation for large weights
    double apply(const std::function<double(const Vec&)>& u) const {
        double u0 = u(x0), c = 0, s = 0;
        for (const auto& e : kernel) {
            c += e.w;
            if (e.y.norm() >= 1e-14) s += e.w * (u(x0 + e.y) - u0);
        }
        return c * u0 + s;
    }
    double apply(const SmoothFn& u) const { return apply(u.f); }

    // smallest nonzero offset length, or 0 if the kernel is a multiple of delta_0
    double min_offset() const {
        double m = 0;
        for (const auto& e : kernel) {
            double r = e.y.norm();
            if (r > 0 && (m == 0 || r < m)) m = r;
        }
        return m;
    }
};

inline bool is_center(const Vec& y) { return y.norm() < 1e-14; }

inline bool is_gcp(const PointFunctional& l, double tol = 1e-12) {
    for (const auto& e : l.kernel)
        if (!is_center(e.y) && e.w < -tol) return false;
    return true;
}

inline double c_of(const PointFunctional& l) {
    double s = 0;
    for (const auto& e : l.kernel) s += e.w;
    return s;
}

inline Vec b_of(const PointFunctional& l, const RadialCutoff& phi) {
    phi.validate();
    Vec B = Vec::Zero(l.dim());
    for (const auto& e : l.kernel) B += e.w * phi(e.y) * e.y;
    return B;
}

// tr(A M) = <l, eta (1/2)(M y, y)>  =>  A = (1/2) sum K eta y y^T
inline Mat a_of(const PointFunctional& l, const RadialCutoff& eta) {
    eta.validate();
    int d = l.dim();
    Mat A = Mat::Zero(d, d);
    for (const auto& e : l.kernel) A += 0.5 * e.w * eta(e.y) * e.y * e.y.transpose();
    return A;
}

inline DiscreteMeasure mu_of(const PointFunctional& l) {
    DiscreteMeasure mu;
    for (const auto& e : l.kernel)
        if (!is_center(e.y)) mu.add(e.y, e.w);
    mu.nonneg = is_gcp(l);
    return mu;
}

struct DecomposeOptions {
    std::vector<double> deltas;  // A schedule; empty = default 2^{-k}, k = 3..ceil(log2(1/h))-1
    double delta_floor = 0;      // if > 0, default schedule stops at this delta
    double tol = 1e-10;
    bool require_convergence = false;
};

struct CourregeDecomposition {
    Mat A;
    Vec B;  // chi_{B_1} convention
    double C = 0;
    DiscreteMeasure mu;
    bool gcp = false;
    double delta_A = 0;  // eta_{delta_A} used for A and the reconstruction
    double delta_B = 0;  // phi_{delta_B} agrees with 1_{|y|<1} on the support
    bool a_converged = false;
    std::vector<double> a_deltas;
    std::vector<Mat> a_schedule;
    std::vector<double> b_deltas;
    std::vector<Vec> b_schedule;
    double residual = 0;

    // C u(x0) + B.grad u + tr(A D^2u) + sum_{y != 0} K(y) (u(x0+y) - P(x0+y)),
    // P the Taylor cutoff with phi_{delta_B}, eta_{delta_A}
    double represent(const Vec& x0, const SmoothFn& u) const {
        int d = int(x0.size());
        double u0 = u(x0);
        Vec g = u.gradient(x0);
        Mat H = u.hessian(x0);
        RadialCutoff phi = RadialCutoff::phi_d(delta_B), eta = RadialCutoff::eta_d(delta_A);
        double v = C * u0 + B.dot(g) + (A * H).trace();
        for (const auto& a : mu.atoms) {
            double dP = phi(a.y) * g.dot(a.y) + 0.5 * eta(a.y) * a.y.dot(H * a.y);
            v += a.mass * ((u(x0 + a.y) - u0) - dP);
        }
        (void)d;
        return v;
    }
};

namespace courrege_detail {
inline bool phi_is_indicator(const PointFunctional& l, double delta) {
    for (const auto& e : l.kernel) {
        double r = e.y.norm();
        if (r > 1 - 2 * delta && r < 1 - delta) return false;
    }
    return true;
}
}  // namespace courrege_detail

// Standard probe family: constants, coordinate-linear, quadratic monomials,
// bumps supported away from 0 at kernel offsets, and a few smooth nonpolynomial functions.
inline std::vector<SmoothFn> uniqueness_probes(const PointFunctional& l, std::uint64_t seed = 1) {
    int d = l.dim();
    Vec x0 = l.x0;
    std::vector<SmoothFn> P;
    P.emplace_back(d, [](const Vec&) { return 1.0; });
    for (int i = 0; i < d; ++i) {
        SmoothFn f(d, [i, x0](const Vec& x) { return x[i] - x0[i]; });
        f.grad = [i, d](const Vec&) { Vec g = Vec::Zero(d); g[i] = 1; return g; };
        f.hess = [d](const Vec&) { return Mat(Mat::Zero(d, d)); };
        P.push_back(f);
    }
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) {
            SmoothFn f(d, [i, j, x0](const Vec& x) { return (x[i] - x0[i]) * (x[j] - x0[j]); });
            f.grad = [i, j, d, x0](const Vec& x) {
                Vec g = Vec::Zero(d);
                g[i] += x[j] - x0[j];
                g[j] += x[i] - x0[i];
                return g;
            };
            f.hess = [i, j, d](const Vec&) {
                Mat H = Mat::Zero(d, d);
                H(i, j) += 1;
                H(j, i) += 1;
                return H;
            };
            P.push_back(f);
        }
    double h = l.min_offset();
    int bumps = 0;
    for (const auto& e : l.kernel) {
        if (is_center(e.y) || bumps >= 6) continue;
        double rad = 0.4 * std::min(h, e.y.norm());
        Vec c = x0 + e.y;
        SmoothFn f(d, [c, rad](const Vec& x) { return psi(rad / 2, rad / 2, x - c); });
        f.grad = [d](const Vec&) { return Vec(Vec::Zero(d)); };  // vanishes near x0
        f.hess = [d](const Vec&) { return Mat(Mat::Zero(d, d)); };
        P.push_back(f);
        ++bumps;
    }
    Rng rng(seed);
    for (int k = 0; k < 3; ++k) {
        Vec w = rng.uniform_vec(d, -2, 2);
        double ph = rng.uniform(0, 2 * M_PI);
        SmoothFn f(d, [w, ph, x0](const Vec& x) { return std::sin(w.dot(x - x0) + ph) * std::exp(-(x - x0).squaredNorm()); });
        P.push_back(f);
    }
    return P;
}

inline double reconstruct_residual(const CourregeDecomposition& dec, const PointFunctional& l,
                                   const std::vector<SmoothFn>& probes) {
    double r = 0;
    for (const auto& u : probes) r = std::max(r, std::abs(l.apply(u) - dec.represent(l.x0, u)));
    return r;
}

inline CourregeDecomposition decompose(const PointFunctional& l, const DecomposeOptions& opt = {}) {
    CourregeDecomposition dec;
    int d = l.dim();
    dec.gcp = is_gcp(l);
    dec.C = c_of(l);
    dec.mu = mu_of(l);

    std::vector<double> deltas = opt.deltas;
    if (deltas.empty()) {
        double h = l.min_offset();
        int kmax = h > 0 ? int(std::ceil(std::log2(1.0 / h))) - 1 : 3;
        kmax = std::max(kmax, 3);
        for (int k = 3; k <= kmax; ++k) {
            double del = std::ldexp(1.0, -k);
            if (opt.delta_floor > 0 && del < opt.delta_floor) break;
            deltas.push_back(del);
        }
        if (deltas.empty()) deltas.push_back(0.125);
    }
    for (double del : deltas) check_delta(del);

    dec.a_converged = false;
    for (double del : deltas) {
        Mat A = a_of(l, RadialCutoff::eta_d(del));
        dec.a_deltas.push_back(del);
        dec.a_schedule.push_back(A);
        dec.A = A;
        dec.delta_A = del;
        if (dec.a_schedule.size() >= 2 &&
            (A - dec.a_schedule[dec.a_schedule.size() - 2]).cwiseAbs().maxCoeff() < opt.tol) {
            dec.a_converged = true;
            break;
        }
    }
    if (dec.a_schedule.size() == 1) dec.a_converged = true;  // a single scale is its own limit
    if (!dec.a_converged && opt.require_convergence) {
        std::string msg = "decompose: A schedule did not settle; last differences:";
        for (std::size_t i = 1; i < dec.a_schedule.size(); ++i)
            msg += " " + std::to_string((dec.a_schedule[i] - dec.a_schedule[i - 1]).cwiseAbs().maxCoeff());
        throw Error(msg);
    }

    // B: shrink delta until phi_delta is the indicator of B_1 on the support
    for (int j = 3; j <= 60; ++j) {
        double del = std::ldexp(1.0, -j);
        Vec B = b_of(l, RadialCutoff::phi_d(del));
        dec.b_deltas.push_back(del);
        dec.b_schedule.push_back(B);
        dec.B = B;
        dec.delta_B = del;
        if (courrege_detail::phi_is_indicator(l, del)) break;
    }
    if (!courrege_detail::phi_is_indicator(l, dec.delta_B))
        throw Error("decompose: B schedule did not reach the indicator convention");

    dec.residual = reconstruct_residual(dec, l, uniqueness_probes(l));
    (void)d;
    return dec;
}

// |<l,u> - <l,v>| r^beta / (||u-v||_{C^beta(B_{R+r})} + sup_{outside B_R} |u - v|): bounded for GCP l.
inline double weak_localization_ratio(const PointFunctional& l, const SmoothFn& u, const SmoothFn& v, double R,
                                      double r, RegularityClass beta, long pairs = 400, std::uint64_t seed = 3) {
    auto diff = [&](const Vec& x) { return u(x) - v(x); };
    HolderEstimate near = holder_norm(diff, l.dim(), beta, l.x0, R + r, pairs, seed);
    double far = 0;
    for (const auto& e : l.kernel)
        if (e.y.norm() >= R) far = std::max(far, std::abs(diff(l.x0 + e.y)));
    double den = near.total() + far;
    if (den <= 0) return 0;
    return std::abs(l.apply(u) - l.apply(v)) * std::pow(r, beta.beta) / den;
}

}  // namespace lmm
