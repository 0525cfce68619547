#pragma once

#include "clarke.hpp"
#include "levy.hpp"
#include "whitney.hpp"

namespace lmm {

// Nonlocal oracles discretize their integrals on the lattice of this level.
struct QuadratureControl {
    int level = 6;
};

struct OperatorOracle {
    std::string name;
    std::function<double(const SmoothFn&, const Vec&, const QuadratureControl&)> eval;
    RegularityClass beta_in{2.5};
    bool translation_invariant = false;
    bool gcp = false;

    double operator()(const SmoothFn& u, const Vec& x, const QuadratureControl& q = {}) const {
        double v = eval(u, x, q);
        if (!finite(v)) throw Error("oracle " + name + ": non-finite value at " + fmt_vec(x));
        return v;
    }
};

struct SurrogatePair {
    OperatorOracle oracle;
    DyadicGrid grid;
    RegularityClass beta;
    FiniteLipschitzMap i_n;

    // i_n o Pr_n o T_n, the node values of I_n(u)
    GridFunction on_nodes(const SmoothFn& u) const { return i_n(truncate(restrict(u, grid))); }

    // I_n = E^0 o i_n o Pr_n o T_n
    double I_n(const SmoothFn& u, const Vec& x) const { return WhitneyExtension(on_nodes(u), RegularityClass(0))(x); }
};

inline SurrogatePair build_surrogate(const OperatorOracle& I, const DyadicGrid& g, RegularityClass beta) {
    require(g.level() >= 2, "build_surrogate: level must be at least 2");
    SurrogatePair s{I, g, beta, FiniteLipschitzMap{g, {}}};
    QuadratureControl q{g.level()};
    s.i_n.map = [I, g, beta, q](const GridFunction& u) {
        SmoothFn Eu = WhitneyExtension(u, beta).as_smooth();
        GridFunction out(g);
        for (long L = 0; L < g.size(); ++L) {
            Idx i = g.node(L);
            try {
                out[L] = I(Eu, g.point(i), q);
            } catch (const std::exception& e) {
                throw Error("surrogate: oracle failed at node " + fmt_idx(i) + ": " + e.what());
            }
        }
        return truncate(out);
    };
    return s;
}

// Exact matrix of an affine map, column j = T(e_j) - T(0).
inline LinearSample linear_matrix(const FiniteLipschitzMap& T) {
    LinearSample L(T.grid);
    GridFunction e(T.grid);
    Eigen::VectorXd t0 = T(e).vec();
    for (long j = 0; j < T.grid.size(); ++j) {
        e[j] = 1;
        L.M.col(j) = T(e).vec() - t0;
        e[j] = 0;
    }
    return L;
}

struct ConvergenceResult {
    std::vector<int> levels;
    std::vector<double> h;
    std::vector<double> error;
    LogLogFit fit;  // slope is gamma
};

// e_n = max over nodes in B_R of |I_n(u,x) - I(u,x)|; the reference uses quadrature level ref.
inline ConvergenceResult convergence_study(const OperatorOracle& I, const SmoothFn& u, const std::vector<int>& levels,
                                           double R, RegularityClass beta, double box_radius,
                                           QuadratureControl ref = {10}) {
    require(levels.size() >= 3, "convergence_study: need at least three levels");
    ConvergenceResult res;
    for (int n : levels) {
        DyadicGrid g(n, u.dim, box_radius);
        SurrogatePair s = build_surrogate(I, g, beta);
        GridFunction vals = s.on_nodes(u);
        double e = 0;
        for (long L = 0; L < g.size(); ++L) {
            Vec x = g.point(g.node(L));
            if (x.norm() > R) continue;
            e = std::max(e, std::abs(vals[L] - I(u, x, ref)));
        }
        res.levels.push_back(n);
        res.h.push_back(g.spacing());
        res.error.push_back(e);
    }
    res.fit = loglog_fit(res.h, res.error, 1e-14);
    return res;
}

// Smooth random test function with analytic derivatives: sum of waves under a Gaussian.
inline SmoothFn random_test_function(int d, Rng& rng, double scale = 1.0) {
    struct Wave { Vec w; double ph, a; };
    std::vector<Wave> waves;
    for (int k = 0; k < 3; ++k) waves.push_back({rng.uniform_vec(d, -2, 2), rng.uniform(0, 2 * M_PI), scale * rng.uniform(-1, 1)});
    Vec c = rng.uniform_vec(d, -0.5, 0.5);
    auto parts = [waves, c](const Vec& x, double& s, Vec& ds, Mat& dds, double& e, Vec& de, Mat& dde) {
        int d = int(x.size());
        s = 0;
        ds = Vec::Zero(d);
        dds = Mat::Zero(d, d);
        for (const auto& w : waves) {
            double t = w.w.dot(x) + w.ph;
            s += w.a * std::sin(t);
            ds += w.a * std::cos(t) * w.w;
            dds -= w.a * std::sin(t) * w.w * w.w.transpose();
        }
        Vec z = x - c;
        e = std::exp(-0.5 * z.squaredNorm());
        de = -e * z;
        dde = e * (z * z.transpose() - Mat::Identity(d, d));
    };
    SmoothFn f(d, [parts](const Vec& x) {
        double s, e; Vec ds, de; Mat dds, dde;
        parts(x, s, ds, dds, e, de, dde);
        return s * e;
    });
    f.grad = [parts](const Vec& x) {
        double s, e; Vec ds, de; Mat dds, dde;
        parts(x, s, ds, dds, e, de, dde);
        return Vec(ds * e + s * de);
    };
    f.hess = [parts](const Vec& x) {
        double s, e; Vec ds, de; Mat dds, dde;
        parts(x, s, ds, dds, e, de, dde);
        return Mat(dds * e + ds * de.transpose() + de * ds.transpose() + s * dde);
    };
    return f;
}

inline SmoothFn add(const SmoothFn& a, const SmoothFn& b, double sb = 1.0) {
    SmoothFn f(a.dim, [a, b, sb](const Vec& x) { return a(x) + sb * b(x); }, a.cls);
    f.grad = [a, b, sb](const Vec& x) { return Vec(a.gradient(x) + sb * b.gradient(x)); };
    f.hess = [a, b, sb](const Vec& x) { return Mat(a.hessian(x) + sb * b.hessian(x)); };
    return f;
}

// x -> u(x - z)
inline SmoothFn shifted(const SmoothFn& u, const Vec& z) {
    SmoothFn f(u.dim, [u, z](const Vec& x) { return u(x - z); }, u.cls);
    f.grad = [u, z](const Vec& x) { return u.gradient(x - z); };
    f.hess = [u, z](const Vec& x) { return u.hessian(x - z); };
    return f;
}

struct LipschitzEstimate {
    double estimate = 0;
    long used = 0;
    long skipped = 0;
};

// max ||I(u) - I(v)||_inf / ||u - v||_{C^beta}, sampled on random smooth pairs.
inline LipschitzEstimate probe_lipschitz(const OperatorOracle& I, int dim, long pairs, std::uint64_t seed,
                                         RegularityClass beta, QuadratureControl q = {}, int points = 16) {
    require(pairs >= 10, "probe_lipschitz: need at least 10 pairs");
    Rng rng(seed);
    LipschitzEstimate est;
    for (long p = 0; p < pairs; ++p) {
        SmoothFn u = random_test_function(dim, rng), v = random_test_function(dim, rng);
        SmoothFn diff = add(u, v, -1.0);
        double den = holder_norm(diff.f, dim, beta, Vec::Zero(dim), 2.0, 200, rng.raw()).total();
        if (!(den > 1e-12)) {
            ++est.skipped;
            continue;
        }
        double num = 0;
        for (int k = 0; k < points; ++k) {
            Vec x = rng.uniform_vec(dim, -1, 1);
            num = std::max(num, std::abs(I(u, x, q) - I(v, x, q)));
        }
        est.estimate = std::max(est.estimate, num / den);
        ++est.used;
    }
    return est;
}

struct FarField {
    SmoothFn w;
    double sup = 1;  // ||w||_inf
};

struct TightnessTable {
    std::vector<double> R;
    std::vector<double> rho_hat;
    LogLogFit fit;
    bool non_increasing = true;
};

// rho_hat(R) = max_{x in B_R} |I(u + w, x) - I(u, x)| / ||w||, w = far(R) vanishing on B_{3R}.
inline TightnessTable probe_tightness(const OperatorOracle& I, const std::vector<double>& R_list, const SmoothFn& u,
                                      const std::function<FarField(double)>& far, QuadratureControl q = {},
                                      int points = 9, std::uint64_t seed = 11) {
    TightnessTable t;
    Rng rng(seed);
    int d = u.dim;
    for (double R : R_list) {
        FarField w = far(R);
        for (int k = 0; k < 64; ++k) {
            Vec z = rng.uniform_vec(d, -1, 1);
            z *= 3 * R * rng.uniform() / std::max(z.norm(), 1e-300);
            if (w.w(z) != 0) throw Error("probe_tightness: far field does not vanish on B_3R at " + fmt_vec(z));
        }
        SmoothFn uw = add(u, w.w);
        double m = 0;
        for (int k = 0; k < points; ++k) {
            Vec x = Vec::Zero(d);
            if (k) {
                x = rng.uniform_vec(d, -1, 1);
                x *= R * (k == 1 ? 1.0 : rng.uniform()) / std::max(x.norm(), 1e-300);
            }
            m = std::max(m, std::abs(I(uw, x, q) - I(u, x, q)));
        }
        t.R.push_back(R);
        t.rho_hat.push_back(m / w.sup);
    }
    for (std::size_t i = 1; i < t.rho_hat.size(); ++i)
        if (t.rho_hat[i] > t.rho_hat[i - 1] * (1 + 1e-6) + 1e-14) t.non_increasing = false;
    if (t.R.size() >= 2) t.fit = loglog_fit(t.R, t.rho_hat, 1e-300);
    return t;
}

struct ShiftTable {
    std::vector<double> z;
    std::vector<double> omega;
    LogLogFit fit;
};

// Omega(|z|) = sup_x |I(v + u(. - z), x + z) - I(v, x + z) - (I(v + u, x) - I(v, x))| / (||u||_{C^beta(B_2r)} + ||u||_{L^inf outside B_r})
inline ShiftTable probe_shift_regularity(const OperatorOracle& I, const SmoothFn& v, const SmoothFn& u,
                                         const std::vector<Vec>& z_list, double r, RegularityClass beta,
                                         const std::vector<Vec>& xs, QuadratureControl q = {},
                                         std::uint64_t seed = 5) {
    int d = u.dim;
    double local = holder_norm(u.f, d, beta, Vec::Zero(d), 2 * r, 400, seed).total();
    Rng rng(seed + 1);
    double outside = 0;
    for (int k = 0; k < 2000; ++k) {
        Vec y = rng.uniform_vec(d, -1, 1);
        y *= (r + rng.uniform() * 8 * r) / std::max(y.norm(), 1e-300);
        outside = std::max(outside, std::abs(u(y)));
    }
    double den = local + outside;
    require(den > 0, "probe_shift_regularity: u vanishes");
    SmoothFn vu = add(v, u);
    ShiftTable t;
    for (const Vec& z : z_list) {
        SmoothFn vs = add(v, shifted(u, z));
        double m = 0;
        for (const Vec& x : xs) {
            Vec xz = x + z;
            double lhs = (I(vs, xz, q) - I(v, xz, q)) - (I(vu, x, q) - I(v, x, q));
            m = std::max(m, std::abs(lhs));
        }
        t.z.push_back(z.norm());
        t.omega.push_back(m / den);
    }
    std::vector<double> zz, oo;
    for (std::size_t i = 0; i < t.z.size(); ++i)
        if (t.z[i] > 0) {
            zz.push_back(t.z[i]);
            oo.push_back(t.omega[i]);
        }
    if (zz.size() >= 2) t.fit = loglog_fit(zz, oo, 1e-13);
    return t;
}

struct MinMaxStudy {
    SurrogatePair surrogate;
    GridFunction u;
    ClarkeSet clarke;
    std::vector<MinMaxValue> values;  // per node
    double max_gap = 0;
    double lipschitz = 0;  // largest row-sum norm over the sampled matrices
};

// i_n on a box grid; probes = u plus random_smooth draws. The Clarke set holds Jacobians at
// `samples` random points and at `segment_points` interior points of every segment [v, u],
// v a probe: by the mean value theorem those are the matrices the envelope needs.
inline MinMaxStudy minmax_study(const OperatorOracle& I, const DyadicGrid& g, RegularityClass beta, int samples,
                                int probes, std::uint64_t seed, int segment_points = 8) {
    require(probes >= 1, "minmax_study: need at least one probe");
    require(segment_points >= 0, "minmax_study: segment_points must be nonnegative");
    MinMaxStudy st{build_surrogate(I, g, beta), GridFunction(g), {}, {}, 0, 0};
    Rng rng(seed ^ 0x5bd1e995ULL);
    st.u = random_smooth(g, rng);
    std::vector<GridFunction> pr{st.u};
    for (int k = 1; k < probes; ++k) pr.push_back(random_smooth(g, rng));
    st.clarke = sample_differential(st.surrogate.i_n, samples, seed);
    for (std::size_t p = 1; p < pr.size(); ++p)
        for (int k = 1; k <= segment_points; ++k) {
            double t = double(k) / (segment_points + 1);
            LinearSample L = jacobian_at(st.surrogate.i_n, pr[p] + t * (st.u - pr[p]));
            L.seed = seed;
            if (L.kink) ++st.clarke.discarded;
            else merge_into(st.clarke, std::move(L));
        }
    st.values = minmax_all(st.surrogate.i_n, st.u, st.clarke, pr);
    for (const auto& v : st.values) st.max_gap = std::max(st.max_gap, std::abs(v.gap));
    for (const auto& L : st.clarke.samples)
        st.lipschitz = std::max(st.lipschitz, L.M.cwiseAbs().rowwise().sum().maxCoeff());
    return st;
}

}  // namespace lmm
