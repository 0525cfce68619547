#pragma once

#include "calculus.hpp"
#include "courrege.hpp"

namespace lmm {

// A Lipschitz map C_*(G) -> C_*(G) on a fixed grid.
struct FiniteLipschitzMap {
    DyadicGrid grid;
    std::function<GridFunction(const GridFunction&)> map;
    double lipschitz = std::numeric_limits<double>::quiet_NaN();  // sampled, filled by estimate_lipschitz

    GridFunction operator()(const GridFunction& u) const {
        GridFunction out = map(u);
        require(out.grid() == grid, "map output lives on a different grid");
        return out;
    }
};

// A sampled generalized derivative: a dense matrix over the in-box nodes.
struct LinearSample {
    DyadicGrid grid;
    Eigen::MatrixXd M;
    // provenance
    std::optional<GridFunction> base;
    double step = 0;
    std::uint64_t seed = 0;
    double defect = 0;  // ||J(s) - J(s/2)||_inf
    double noise = 0;   // rounding floor of the central differences
    bool kink = false;

    explicit LinearSample(DyadicGrid g) : grid(g), M(Eigen::MatrixXd::Zero(g.size(), g.size())) {}

    GridFunction apply(const GridFunction& u) const {
        GridFunction out(grid);
        out.vec() = M * u.vec();
        return out;
    }
    double apply_at(const GridFunction& u, long row) const { return M.row(row).dot(u.vec()); }

    // row kernel in offset form, center always present
    PointFunctional row_kernel(long row, double drop = 0.0) const {
        Idx xi = grid.node(row);
        PointFunctional l{grid.point(xi), {}};
        l.kernel.push_back({Vec::Zero(grid.dim()), M(row, row)});
        for (long j = 0; j < grid.size(); ++j) {
            if (j == row || std::abs(M(row, j)) <= drop) continue;
            l.kernel.push_back({grid.point(grid.node(j)) - l.x0, M(row, j)});
        }
        return l;
    }
};

struct ClarkeSet {
    std::vector<LinearSample> samples;
    bool convex_closure = true;  // generators only; hulls are taken lazily
    long discarded = 0;          // kink-flagged base points
    long merged = 0;

    std::size_t size() const { return samples.size(); }
    bool empty() const { return samples.empty(); }
};

inline double default_step(const GridFunction& v) { return 1e-5 * (1 + v.sup_norm()); }

namespace clarke_detail {
inline Eigen::MatrixXd central_jacobian(const FiniteLipschitzMap& T, const GridFunction& v, double s, double& noise) {
    long N = v.size();
    Eigen::MatrixXd J(N, N);
    GridFunction p = v, m = v;
    double big = 0;
    for (long j = 0; j < N; ++j) {
        p[j] = v[j] + s;
        m[j] = v[j] - s;
        GridFunction tp = T(p), tm = T(m);
        J.col(j) = (tp.vec() - tm.vec()) / (2 * s);
        big = std::max({big, tp.sup_norm(), tm.sup_norm()});
        p[j] = v[j];
        m[j] = v[j];
    }
    noise = 64 * std::numeric_limits<double>::epsilon() * (1 + big) / s;
    return J;
}
}  // namespace clarke_detail

inline LinearSample jacobian_at(const FiniteLipschitzMap& T, const GridFunction& v, double step = 0) {
    require(v.grid() == T.grid, "jacobian_at: base point on a different grid");
    require(step >= 0 && finite(step), "jacobian_at: step must be positive (0 selects the default)");
    double s = step > 0 ? step : default_step(v);
    LinearSample L(T.grid);
    double n1 = 0, n2 = 0;
    L.M = clarke_detail::central_jacobian(T, v, s, n1);
    Eigen::MatrixXd half = clarke_detail::central_jacobian(T, v, s / 2, n2);
    if (!L.M.allFinite()) throw Error("jacobian_at: non-finite Jacobian entry");
    L.base = v;
    L.step = s;
    L.noise = std::max(n1, n2);
    L.defect = (L.M - half).cwiseAbs().maxCoeff();
    L.kink = L.defect > 10 * s;
    return L;
}

// Smooth random grid data: a few low-frequency waves under a broad envelope.
inline GridFunction random_smooth(const DyadicGrid& g, Rng& rng, double amplitude = 1.0) {
    int d = g.dim();
    struct Wave { Vec w; double ph, a; };
    std::vector<Wave> waves;
    for (int k = 0; k < 4; ++k) waves.push_back({rng.uniform_vec(d, -3, 3), rng.uniform(0, 2 * M_PI), rng.uniform(-1, 1)});
    Vec c = rng.uniform_vec(d, -0.5, 0.5);
    double off = rng.uniform(-1, 1);
    GridFunction u(g);
    for (long L = 0; L < g.size(); ++L) {
        Vec x = g.point(g.node(L));
        double s = off;
        for (const auto& w : waves) s += w.a * std::sin(w.w.dot(x) + w.ph);
        u[L] = amplitude * s / (1 + 0.25 * (x - c).squaredNorm());
    }
    return u;
}

inline double sample_distance(const LinearSample& a, const LinearSample& b) {
    return (a.M - b.M).cwiseAbs().maxCoeff();
}

// Add L unless it duplicates a stored generator. Tolerance is 1e-10 or the
// rounding floor of the two central differences, whichever is larger.
inline void merge_into(ClarkeSet& S, LinearSample L) {
    for (const auto& s : S.samples) {
        double tol = std::max({1e-10, 2 * s.noise, 2 * L.noise});
        if (sample_distance(s, L) < tol) {
            ++S.merged;
            return;
        }
    }
    S.samples.push_back(std::move(L));
}

inline ClarkeSet sample_differential(const FiniteLipschitzMap& T, int num_points, std::uint64_t seed, double step = 0,
                                     double amplitude = 1.0) {
    require(num_points >= 1, "sample_differential: need at least one base point");
    Rng rng(seed);
    ClarkeSet S;
    for (int k = 0; k < num_points; ++k) {
        GridFunction v = random_smooth(T.grid, rng, amplitude);
        LinearSample L = jacobian_at(T, v, step);
        L.seed = seed;
        if (L.kink) {
            ++S.discarded;
            continue;
        }
        merge_into(S, std::move(L));
    }
    if (S.empty())
        throw Error("sample_differential: all " + std::to_string(num_points) +
                    " base points were flagged near a kink; try a smaller step or more points");
    return S;
}

// Euclidean projection onto the probability simplex.
inline Eigen::VectorXd project_simplex(const Eigen::VectorXd& v) {
    long m = v.size();
    Eigen::VectorXd u = v;
    std::sort(u.data(), u.data() + m, std::greater<double>());
    double css = 0, theta = 0;
    for (long i = 0; i < m; ++i) {
        css += u[i];
        double t = (css - 1) / double(i + 1);
        if (u[i] - t > 0) theta = t;
    }
    return (v.array() - theta).max(0.0).matrix();
}

struct MeanValueFit {
    double residual = 0;  // sup norm
    Eigen::VectorXd weights;
    int iterations = 0;
};

// min over the simplex of ||T(u) - T(v) - (sum l_i L_i)(u - v)||, least squares by projected gradient.
inline MeanValueFit mean_value_fit(const FiniteLipschitzMap& T, const GridFunction& u, const GridFunction& v,
                                   const ClarkeSet& S, int iterations = 500, double tol = 1e-10) {
    require(!S.empty(), "mean_value_residual: empty Clarke set");
    Eigen::VectorXd b = T(u).vec() - T(v).vec();
    Eigen::VectorXd w = u.vec() - v.vec();
    long m = long(S.size());
    Eigen::MatrixXd G(b.size(), m);
    for (long i = 0; i < m; ++i) G.col(i) = S.samples[i].M * w;
    Eigen::MatrixXd Q = G.transpose() * G;
    Eigen::VectorXd c = G.transpose() * b;
    double Lip = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(Q, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
    MeanValueFit fit;
    fit.weights = Eigen::VectorXd::Constant(m, 1.0 / m);
    if (Lip > 0) {
        // accelerated projected gradient with adaptive restart
        Eigen::VectorXd y = fit.weights, prev = fit.weights;
        double t = 1;
        for (int it = 0; it < iterations; ++it) {
            Eigen::VectorXd nxt = project_simplex(y - (Q * y - c) / Lip);
            double ch = (nxt - fit.weights).cwiseAbs().maxCoeff();
            double tn = 0.5 * (1 + std::sqrt(1 + 4 * t * t));
            if ((y - nxt).dot(nxt - fit.weights) > 0) tn = 1;  // restart
            prev = fit.weights;
            fit.weights = nxt;
            y = nxt + ((t - 1) / tn) * (nxt - prev);
            t = tn;
            fit.iterations = it + 1;
            if (ch < tol) break;
        }
        // exact least squares on the detected support, kept if feasible and no worse
        std::vector<long> sup;
        for (long i = 0; i < m; ++i)
            if (fit.weights[i] > 1e-9) sup.push_back(i);
        if (!sup.empty()) {
            long k = long(sup.size());
            Eigen::VectorXd lam = Eigen::VectorXd::Zero(m);
            if (k == 1) {
                lam[sup[0]] = 1;
            } else {
                Eigen::MatrixXd Z(b.size(), k - 1);
                for (long i = 1; i < k; ++i) Z.col(i - 1) = G.col(sup[i]) - G.col(sup[0]);
                Eigen::VectorXd z = Z.colPivHouseholderQr().solve(b - G.col(sup[0]));
                lam[sup[0]] = 1 - z.sum();
                for (long i = 1; i < k; ++i) lam[sup[i]] = z[i - 1];
            }
            if (lam.allFinite() && lam.minCoeff() >= 0 &&
                (G * lam - b).squaredNorm() <= (G * fit.weights - b).squaredNorm())
                fit.weights = lam;
        }
    }
    fit.residual = (G * fit.weights - b).cwiseAbs().maxCoeff();
    return fit;
}

inline double mean_value_residual(const FiniteLipschitzMap& T, const GridFunction& u, const GridFunction& v,
                                  const ClarkeSet& S) {
    return mean_value_fit(T, u, v, S).residual;
}

struct MinMaxValue {
    double value = 0;
    double gap = 0;  // value - T(u)(x)
    long argmin_probe = -1;
};

// min over probes v of max over S of T(v)(x) + L(u - v)(x), for every in-box node.
inline std::vector<MinMaxValue> minmax_all(const FiniteLipschitzMap& T, const GridFunction& u, const ClarkeSet& S,
                                           const std::vector<GridFunction>& probes) {
    require(!S.empty(), "minmax_eval: empty Clarke set");
    require(!probes.empty(), "minmax_eval: no probes");
    long N = u.size();
    Eigen::VectorXd Tu = T(u).vec();
    std::vector<MinMaxValue> out(N);
    for (auto& r : out) r.value = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < probes.size(); ++p) {
        const GridFunction& v = probes[p];
        Eigen::VectorXd Tv = T(v).vec();
        Eigen::VectorXd w = u.vec() - v.vec();
        Eigen::VectorXd best = Eigen::VectorXd::Constant(N, -std::numeric_limits<double>::infinity());
        for (const auto& L : S.samples) best = best.cwiseMax(L.M * w);
        for (long x = 0; x < N; ++x) {
            double val = Tv[x] + best[x];
            if (val < out[x].value) {
                out[x].value = val;
                out[x].argmin_probe = long(p);
            }
        }
    }
    for (long x = 0; x < N; ++x) out[x].gap = out[x].value - Tu[x];
    return out;
}

inline MinMaxValue minmax_eval(const FiniteLipschitzMap& T, const GridFunction& u, const Idx& x, const ClarkeSet& S,
                               const std::vector<GridFunction>& probes) {
    require(T.grid.in_box(x), "minmax_eval: node " + fmt_idx(x) + " is outside the box");
    return minmax_all(T, u, S, probes)[T.grid.linear(x)];
}

// max over t of (F(u + t w) - F(u)) / t
inline double upper_directional(const std::function<double(const GridFunction&)>& F, const GridFunction& u,
                                const GridFunction& w, const std::vector<double>& t_grid) {
    require(!t_grid.empty(), "upper_directional: empty t grid");
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        require(t_grid[i] > 0, "upper_directional: t values must be positive");
        if (i) require(t_grid[i] < t_grid[i - 1], "upper_directional: t grid must decrease");
    }
    double Fu = F(u), best = -std::numeric_limits<double>::infinity();
    for (double t : t_grid) best = std::max(best, (F(u + t * w) - Fu) / t);
    return best;
}

struct NodeCoefficients {
    Idx node;
    Mat A;
    Vec B;
    double C = 0;
    DiscreteMeasure mu;
};

inline std::vector<NodeCoefficients> coefficient_fields(const LinearSample& L, const RadialCutoff& phi,
                                                        const RadialCutoff& eta) {
    std::vector<NodeCoefficients> out;
    for (long r = 0; r < L.grid.size(); ++r) {
        PointFunctional k = L.row_kernel(r);
        out.push_back({L.grid.node(r), a_of(k, eta), b_of(k, phi), c_of(k), mu_of(k)});
    }
    return out;
}

// |L(u)(x) - [C u + B.grad_n u + tr(A hess_n u) + sum K (u(x+y) - P^{(n)}(x+y))]|
inline double representation_residual(const LinearSample& L, const GridFunction& u, const Idx& x,
                                      const RadialCutoff& phi, const RadialCutoff& eta, RegularityClass beta) {
    const auto& g = L.grid;
    require(g.in_box(x), "representation_residual: node " + fmt_idx(x) + " is outside the box");
    long row = g.linear(x);
    PointFunctional k = L.row_kernel(row);
    TaylorCutoff P = taylor_cutoff_discrete(u, x, CutoffPair{phi, eta}, beta, Padding::Strict);
    int reg = beta.regime();
    double C = c_of(k);
    // long double accumulation keeps rounding below the identity's own scale
    long double rep = (long double)C * P.u0;
    if (reg >= 1) rep += b_of(k, phi).dot(P.g);
    if (reg == 2) rep += (a_of(k, eta) * P.H).trace();
    long double lhs = 0;
    for (const auto& e : k.kernel) {
        if (is_center(e.y)) continue;
        long double du = (long double)u.at(*g.lattice_index(k.x0 + e.y)) - P.u0;
        long double dp = (long double)P(k.x0 + e.y) - P.u0;
        lhs += e.w * du;
        rep += e.w * (du - dp);
    }
    lhs += (long double)C * P.u0;
    return double(std::abs(lhs - rep));
}

}  // namespace lmm
