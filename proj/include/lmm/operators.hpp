#pragma once

#include "approx.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/IterativeLinearSolvers>

#include <array>
#include <map>
#include <mutex>

namespace lmm {

// ---------- linear Levy stencils ----------

enum class DriftScheme { Upwind, Central };
enum class SecondOrderScheme { Centered, Forward };

struct LevyStencil {
    PointFunctional kernel;  // offsets relative to the node, x0 = 0
    bool gcp = false;
    double h = 0;

    // zero-padded action on a grid function of the same spacing
    GridFunction apply(const GridFunction& u) const {
        const auto& g = u.grid();
        require(std::abs(g.spacing() - h) < 1e-15, "stencil spacing differs from the grid");
        std::vector<std::pair<Idx, double>> offs;
        for (const auto& e : kernel.kernel) offs.push_back({*g.lattice_index(e.y), e.w});
        GridFunction out(g);
        for (long L = 0; L < g.size(); ++L) {
            Idx i = g.node(L);
            double s = 0;
            for (const auto& [z, w] : offs) s += w * u.at(i + z);
            out[L] = s;
        }
        return out;
    }

    Eigen::MatrixXd matrix(const DyadicGrid& g) const {
        GridFunction e(g);
        Eigen::MatrixXd M(g.size(), g.size());
        for (long j = 0; j < g.size(); ++j) {
            e[j] = 1;
            M.col(j) = apply(e).vec();
            e[j] = 0;
        }
        return M;
    }
};

namespace ops_detail {
struct KernelBuilder {
    int d;
    double h;
    std::map<std::vector<long>, double> w;

    void add(const Idx& z, double v) {
        std::vector<long> k(z.data(), z.data() + z.size());
        w[k] += v;
    }
    Idx unit(int k, long s = 1) const { Idx z = Idx::Zero(d); z[k] = s; return z; }

    PointFunctional finish() const {
        PointFunctional l{Vec::Zero(d), {}};
        l.kernel.push_back({Vec::Zero(d), 0.0});
        for (const auto& [k, v] : w) {
            Idx z(d);
            for (int i = 0; i < d; ++i) z[i] = k[i];
            if (z.isZero()) {
                l.kernel[0].w += v;
                continue;
            }
            if (v != 0) l.kernel.push_back({z.cast<double>() * h, v});
        }
        return l;
    }
};
}  // namespace ops_detail

// tr(A D^2) + B.grad + C + jumps, on the lattice of spacing h. Atoms must sit on the lattice;
// their compensation -1_{|y|<1} m y is folded into the drift.
inline LevyStencil levy_stencil(const Mat& A, const Vec& B, double C, const DiscreteMeasure& mu, double h,
                                DriftScheme drift = DriftScheme::Upwind,
                                SecondOrderScheme second = SecondOrderScheme::Centered, bool require_gcp = false) {
    int d = int(B.size());
    require(A.rows() == d && A.cols() == d, "levy_stencil: dimension mismatch");
    require(h > 0, "levy_stencil: spacing must be positive");
    mu.validate();
    if (require_gcp) {
        require(is_psd(A), "levy_stencil: A is not positive semidefinite");
        require(mu.all_nonneg(), "levy_stencil: measure has negative mass");
    }
    ops_detail::KernelBuilder kb{d, h, {}};
    Idx o = Idx::Zero(d);
    double h2 = h * h;
    Mat As = 0.5 * (A + A.transpose());
    if (second == SecondOrderScheme::Centered) {
        for (int k = 0; k < d; ++k) {
            double diag = As(k, k);
            for (int l = 0; l < d; ++l)
                if (l != k) diag -= std::abs(As(k, l));
            kb.add(kb.unit(k), diag / h2);
            kb.add(kb.unit(k, -1), diag / h2);
            kb.add(o, -2 * diag / h2);
            for (int l = k + 1; l < d; ++l) {
                double a = As(k, l);
                if (a == 0) continue;
                long s = a > 0 ? 1 : -1;
                Idx p = kb.unit(k) + kb.unit(l, s);
                double c = std::abs(a) / h2;
                // a [u(x+p) + u(x-p) - u(x+-e_k) - u(x+-e_l) + 2u(x)] / h^2; the axis part sits in diag above
                kb.add(p, c);
                kb.add(Idx(-p), c);
                kb.add(o, -2 * c);
            }
        }
    } else {
        // tr(A H) with H the symmetrized forward Hessian
        for (int k = 0; k < d; ++k)
            for (int l = 0; l < d; ++l) {
                double a = As(k, l) / h2;
                if (a == 0) continue;
                if (k == l) {
                    kb.add(kb.unit(k, 2), a);
                    kb.add(kb.unit(k), -2 * a);
                    kb.add(o, a);
                } else {
                    kb.add(Idx(kb.unit(k) + kb.unit(l)), a);
                    kb.add(kb.unit(k), -a);
                    kb.add(kb.unit(l), -a);
                    kb.add(o, a);
                }
            }
    }
    Vec Beff = B;
    for (const auto& a : mu.atoms) {
        Vec q = a.y / h;
        Idx z(d);
        for (int i = 0; i < d; ++i) {
            z[i] = std::lround(q[i]);
            require(std::abs(q[i] - double(z[i])) < 1e-9, "levy_stencil: atom " + fmt_vec(a.y) + " is not on the lattice");
        }
        kb.add(z, a.mass);
        kb.add(o, -a.mass);
        if (a.y.norm() < 1) Beff -= a.mass * a.y;
    }
    for (int k = 0; k < d; ++k) {
        double b = Beff[k];
        if (b == 0) continue;
        if (drift == DriftScheme::Central) {
            kb.add(kb.unit(k), b / (2 * h));
            kb.add(kb.unit(k, -1), -b / (2 * h));
        } else if (b > 0) {
            kb.add(kb.unit(k), b / h);
            kb.add(o, -b / h);
        } else {
            kb.add(o, b / h);
            kb.add(kb.unit(k, -1), -b / h);
        }
    }
    kb.add(o, C);
    LevyStencil s;
    s.kernel = kb.finish();
    s.gcp = is_gcp(s.kernel, 0.0);
    s.h = h;
    return s;
}

// I(u, x) = f(x) + L(u, x), evaluated exactly with the derivatives carried by u.
inline OperatorOracle levy_oracle(const LevyOperator& L, std::function<double(const Vec&)> f = {},
                                  std::string name = "levy") {
    OperatorOracle o;
    o.name = std::move(name);
    o.eval = [L, f](const SmoothFn& u, const Vec& x, const QuadratureControl&) {
        return (f ? f(x) : 0.0) + evaluate(L, u, x);
    };
    o.beta_in = RegularityClass(2.5);
    o.translation_invariant = L.constant && !f;
    o.gcp = L.constant && L.gcp_at(Vec::Zero(L.dim));
    return o;
}

// ---------- fractional Laplacian ----------

namespace frac_detail {
// Gauss-Legendre, 16 points on [-1, 1]
inline const std::array<std::pair<double, double>, 8>& gl16() {
    static const std::array<std::pair<double, double>, 8> t = {{
        {0.0950125098376374, 0.1894506104550685}, {0.2816035507792589, 0.1826034150449236},
        {0.4580167776572274, 0.1691565193950025}, {0.6178762444026438, 0.1495959888165767},
        {0.7554044083550030, 0.1246289712555339}, {0.8656312023878318, 0.0951585116824928},
        {0.9445750230732326, 0.0622535239386479}, {0.9894009349916499, 0.0271524594117541},
    }};
    return t;
}
inline double integrate(const std::function<double(double)>& f, double a, double b) {
    double m = 0.5 * (a + b), r = 0.5 * (b - a), s = 0;
    for (const auto& [x, w] : gl16()) s += w * (f(m + r * x) + f(m - r * x));
    return r * s;
}
inline double sphere_area(int d) { return d == 1 ? 2.0 : (d == 2 ? 2 * M_PI : 4 * M_PI); }
inline double ball_volume(int d) { return d == 1 ? 2.0 : (d == 2 ? M_PI : 4 * M_PI / 3); }
}  // namespace frac_detail

// c_{d,alpha} from c * int (1 - cos y_1) |y|^{-d-alpha} dy = 1, by radial quadrature.
inline double fractional_constant(int d, double alpha) {
    require(d >= 1 && d <= 3, "fractional_constant: dimension must be 1, 2 or 3");
    require(alpha > 0 && alpha < 2, "fractional_constant: alpha must lie in (0,2)");
    // angular average of 1 - cos(r e.theta), times the sphere area
    std::function<double(double)> S;
    if (d == 1) S = [](double r) { return 2 * (1 - std::cos(r)); };
    else if (d == 2) S = [](double r) { return 2 * M_PI * (1 - std::cyl_bessel_j(0.0, r)); };
    else S = [](double r) { return 4 * M_PI * (1 - std::sin(r) / r); };
    // [0, 1]: power series integrated termwise
    double head = 0;
    for (int k = 1; k <= 30; ++k) {
        double coef;
        if (d == 1) coef = 2 * std::pow(-1.0, k + 1) / std::tgamma(2 * k + 1.0);
        else if (d == 2) coef = 2 * M_PI * std::pow(-1.0, k + 1) * std::pow(0.5, 2 * k) / std::pow(std::tgamma(k + 1.0), 2);
        else coef = 4 * M_PI * std::pow(-1.0, k + 1) / std::tgamma(2 * k + 2.0);
        head += coef / (2 * k - alpha);
    }
    // [1, Rmax]: panels of length pi/2; beyond Rmax the constant part exactly, the oscillatory part dropped
    const double Rmax = 4000 * M_PI;
    double body = 0;
    auto g = [&](double r) { return S(r) * std::pow(r, -1 - alpha); };
    body += frac_detail::integrate(g, 1.0, M_PI);
    for (int k = 2; k < 8000; ++k) body += frac_detail::integrate(g, k * M_PI / 2, (k + 1) * M_PI / 2);
    double tail = frac_detail::sphere_area(d) * std::pow(Rmax, -alpha) / alpha;
    return 1.0 / (head + body + tail);
}

struct FractionalLaplacian {
    int d = 1;
    double alpha = 1;
    double c = 0;  // normalization, from fractional_constant
    double cutoff = 4;

    // c h^d |y|^{-d-alpha} on lattice offsets 0 < |y| <= cutoff
    DiscreteMeasure measure(double h) const {
        require(cutoff >= 2 * h, "fractional_laplacian: cutoff must be at least 2h");
        long m = long(std::floor(cutoff / h + 1e-9));
        DiscreteMeasure mu;
        mu.nonneg = true;
        Idx z = Idx::Constant(d, -m);
        while (true) {
            if (!z.isZero()) {
                Vec y = z.cast<double>() * h;
                double r = y.norm();
                if (r <= cutoff + 1e-12) mu.add(y, c * std::pow(h, d) * std::pow(r, -d - alpha));
            }
            int k = 0;
            while (k < d && z[k] == m) z[k++] = -m;
            if (k == d) break;
            ++z[k];
        }
        return mu;
    }

    // radius of the ball with the volume of one cell, and the effective outer radius of the quadrature
    double inner_radius(double h) const { return h * std::pow(1.0 / frac_detail::ball_volume(d), 1.0 / d); }
    double outer_radius(double h) const {
        double vol = double(measure(h).size() + 1) * std::pow(h, d);
        return std::pow(vol / frac_detail::ball_volume(d), 1.0 / d);
    }
};

inline FractionalLaplacian fractional_laplacian(int d, double alpha, double cutoff) {
    FractionalLaplacian F{d, alpha, fractional_constant(d, alpha), cutoff};
    return F;
}

// -(-Delta)^{alpha/2} u(x): lattice sum at the quadrature level, a second-order term for the
// cell around 0, and the far field against u(x) alone.
inline OperatorOracle fractional_oracle(const FractionalLaplacian& F) {
    OperatorOracle o;
    o.name = "fractional";
    o.translation_invariant = true;
    o.gcp = true;
    o.beta_in = RegularityClass(std::min(2.5, F.alpha + 0.5));
    auto cache = std::make_shared<std::map<int, std::pair<DiscreteMeasure, std::array<double, 2>>>>();
    auto mtx = std::make_shared<std::mutex>();
    o.eval = [F, cache, mtx](const SmoothFn& u, const Vec& x, const QuadratureControl& q) {
        const DiscreteMeasure* mu;
        double rin, rout;
        {
            std::lock_guard<std::mutex> lk(*mtx);
            auto it = cache->find(q.level);
            if (it == cache->end()) {
                double h = std::ldexp(1.0, -q.level);
                it = cache->emplace(q.level, std::make_pair(F.measure(h), std::array<double, 2>{F.inner_radius(h), F.outer_radius(h)})).first;
            }
            mu = &it->second.first;
            rin = it->second.second[0];
            rout = it->second.second[1];
        }
        double ux = u(x), s = 0;
        for (const auto& a : mu->atoms) s += a.mass * (u(x + a.y) - ux);
        double area = frac_detail::sphere_area(F.d);
        if (u.cls.regime() == 2 || F.alpha >= 1) {
            double lap = u.hessian(x).trace();
            s += 0.5 * lap / F.d * F.c * area * std::pow(rin, 2 - F.alpha) / (2 - F.alpha);
        }
        s -= ux * F.c * area * std::pow(rout, -F.alpha) / F.alpha;
        return s;
    };
    return o;
}

// ---------- envelopes ----------

inline OperatorOracle bellman(const std::vector<OperatorOracle>& ops) {
    require(!ops.empty(), "bellman: empty operator list");
    OperatorOracle o;
    o.name = "bellman";
    o.translation_invariant = true;
    o.gcp = true;
    for (const auto& m : ops) {
        o.translation_invariant = o.translation_invariant && m.translation_invariant;
        o.gcp = o.gcp && m.gcp;
    }
    o.eval = [ops](const SmoothFn& u, const Vec& x, const QuadratureControl& q) {
        double v = -std::numeric_limits<double>::infinity();
        for (const auto& m : ops) v = std::max(v, m(u, x, q));
        return v;
    };
    return o;
}

// min over rows a of max over columns b
inline OperatorOracle isaacs(const std::vector<std::vector<OperatorOracle>>& ops) {
    require(!ops.empty(), "isaacs: empty operator matrix");
    std::vector<OperatorOracle> rows;
    for (const auto& r : ops) rows.push_back(bellman(r));
    OperatorOracle o;
    o.name = "isaacs";
    o.translation_invariant = true;
    o.gcp = true;
    for (const auto& m : rows) {
        o.translation_invariant = o.translation_invariant && m.translation_invariant;
        o.gcp = o.gcp && m.gcp;
    }
    o.eval = [rows](const SmoothFn& u, const Vec& x, const QuadratureControl& q) {
        double v = std::numeric_limits<double>::infinity();
        for (const auto& m : rows) v = std::min(v, m(u, x, q));
        return v;
    };
    return o;
}

struct PucciPair {
    double minus = 0;
    double plus = 0;
};

inline PucciPair pucci(double lambda, double Lambda, const Mat& H) {
    require(lambda > 0 && lambda <= Lambda, "pucci: need 0 < lambda <= Lambda");
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (H + H.transpose()));
    if (es.info() != Eigen::Success) throw Error("pucci: eigen-decomposition failed");
    PucciPair p;
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
        double e = es.eigenvalues()[i];
        p.plus += e > 0 ? Lambda * e : lambda * e;
        p.minus += e > 0 ? lambda * e : Lambda * e;
    }
    return p;
}

inline PucciPair pucci(double lambda, double Lambda, const SmoothFn& u, const Vec& x) {
    return pucci(lambda, Lambda, u.hessian(x));
}

inline OperatorOracle pucci_oracle(double lambda, double Lambda, bool upper = true) {
    OperatorOracle o;
    o.name = upper ? "pucci_plus" : "pucci_minus";
    o.translation_invariant = true;
    o.gcp = true;
    o.eval = [lambda, Lambda, upper](const SmoothFn& u, const Vec& x, const QuadratureControl&) {
        PucciPair p = pucci(lambda, Lambda, u, x);
        return upper ? p.plus : p.minus;
    };
    return o;
}

inline void require_spd(const Mat& D, const std::string& who) {
    require((D - D.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, D.norm()), who + ": matrix is not symmetric");
    Eigen::SelfAdjointEigenSolver<Mat> es(D);
    require(es.eigenvalues().minCoeff() > 0, who + ": matrix is not positive definite");
}

inline double monge_ampere(const Mat& H) {
    require_spd(H, "monge_ampere");
    return H.determinant();
}
inline double monge_ampere(const SmoothFn& u, const Vec& x) { return monge_ampere(u.hessian(x)); }

// det(D)^{1/d} D^{-1}: the minimizer of tr(A D) over det A = 1
inline Mat ma_minimizer(const Mat& D) {
    require_spd(D, "ma_minimizer");
    int d = int(D.rows());
    return std::pow(D.determinant(), 1.0 / d) * D.inverse();
}

struct MaInfimum {
    double value = 0;
    double lower = 0;  // d det(D)^{1/d}
    Mat argmin;
};

// inf of tr(A D) over sampled A >= 0 with det A = 1
inline MaInfimum ma_infimum(const Mat& D, int samples, std::uint64_t seed, bool include_minimizer = true) {
    require_spd(D, "ma_infimum");
    int d = int(D.rows());
    Rng rng(seed);
    MaInfimum r;
    r.lower = d * std::pow(D.determinant(), 1.0 / d);
    r.value = std::numeric_limits<double>::infinity();
    auto consider = [&](const Mat& A) {
        double t = (A * D).trace();
        if (t < r.value) {
            r.value = t;
            r.argmin = A;
        }
    };
    for (int k = 0; k < samples; ++k) {
        Mat G(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) G(i, j) = rng.normal();
        Eigen::HouseholderQR<Mat> qr(G);
        Mat Q = qr.householderQ();
        Vec s(d);
        for (int i = 0; i < d; ++i) s[i] = rng.uniform(-1.5, 1.5);
        s.array() -= s.mean();
        consider(Q * s.array().exp().matrix().asDiagonal() * Q.transpose());
    }
    if (include_minimizer) consider(ma_minimizer(D));
    return r;
}

// ---------- Dirichlet-to-Neumann on a strip ----------

enum class Lateral { Periodic, Dirichlet };
enum class StripSolver { Auto, Direct, CG };

// Laplace on [0, W) x (0, H): bottom data u, top 0. The vertical mesh is geometric,
// first cell dy0, so the boundary layer of high frequencies is resolved.
struct StripProblem {
    double H = 10;
    double W = 2 * M_PI;
    int nx = 256;
    int ny = 128;
    double dy0 = 0.01;
    Lateral lateral = Lateral::Periodic;
    std::vector<double> bottom;  // nx values at x_i = i W / nx

    double dx() const { return W / nx; }
    double x(int i) const { return i * dx(); }

    // node heights y_0 = 0 < ... < y_ny = H
    std::vector<double> heights() const {
        require(H > 0, "strip: height must be positive");
        require(nx >= 16 && ny >= 16, "strip: resolution must be at least 16 x 16");
        double target = H / dy0;
        double lo = 1.0, hi = 2.0;
        auto total = [&](double r) { return std::abs(r - 1) < 1e-14 ? double(ny) : (std::pow(r, ny) - 1) / (r - 1); };
        std::vector<double> y(ny + 1, 0.0);
        if (total(1.0) >= target) {
            for (int j = 0; j <= ny; ++j) y[j] = H * j / ny;  // uniform is already fine enough
            return y;
        }
        while (total(hi) < target) hi *= 2;
        for (int it = 0; it < 200; ++it) {
            double m = 0.5 * (lo + hi);
            (total(m) < target ? lo : hi) = m;
        }
        double r = 0.5 * (lo + hi), step = dy0;
        for (int j = 1; j <= ny; ++j) {
            y[j] = y[j - 1] + step;
            step *= r;
        }
        y[ny] = H;
        return y;
    }
};

class DtnSolver {
public:
    explicit DtnSolver(const StripProblem& p, StripSolver kind = StripSolver::Auto)
        : p_(p), y_(p.heights()) {
        int nx = p.nx, nyi = p.ny - 1;
        long N = long(nx) * nyi;
        double dx2 = p.dx() * p.dx();
        std::vector<Eigen::Triplet<double>> t;
        // symmetric form: row (i,j) scaled by the dual cell height w_j
        for (int j = 1; j <= nyi; ++j) {
            double hm = y_[j] - y_[j - 1], hp = y_[j + 1] - y_[j], w = 0.5 * (hm + hp);
            for (int i = 0; i < nx; ++i) {
                long r = id(i, j);
                double diag = 1 / hm + 1 / hp + 2 * w / dx2;
                t.emplace_back(r, r, diag);
                if (j > 1) t.emplace_back(r, id(i, j - 1), -1 / hm);
                if (j < nyi) t.emplace_back(r, id(i, j + 1), -1 / hp);
                for (int s : {-1, 1}) {
                    int k = i + s;
                    if (p.lateral == Lateral::Periodic) k = (k + nx) % nx;
                    else if (k < 0 || k >= nx) continue;
                    t.emplace_back(r, id(k, j), -w / dx2);
                }
            }
        }
        A_.resize(N, N);
        A_.setFromTriplets(t.begin(), t.end());
        direct_ = kind == StripSolver::Direct || (kind == StripSolver::Auto && N <= 65536);
        if (direct_) {
            ldlt_.compute(A_);
            if (ldlt_.info() != Eigen::Success) throw Error("dtn: factorization failed");
        } else {
            cg_.setTolerance(1e-12);
            cg_.setMaxIterations(20 * int(N));
            cg_.compute(A_);
        }
    }

    const StripProblem& problem() const { return p_; }
    const std::vector<double>& heights() const { return y_; }
    bool direct() const { return direct_; }

    // every off-diagonal entry nonpositive and the diagonal dominant: the assembled system is an M-matrix
    bool m_matrix() const {
        for (int k = 0; k < A_.outerSize(); ++k) {
            double diag = 0, off = 0;
            for (Eigen::SparseMatrix<double>::InnerIterator it(A_, k); it; ++it) {
                if (it.row() == it.col()) diag = it.value();
                else if (it.value() > 0) return false;
                else off += -it.value();
            }
            if (diag < off - 1e-12 * diag) return false;
        }
        return true;
    }

    // d/dy U at y = 0+, one-sided second order on the nonuniform mesh
    std::vector<double> solve(const std::vector<double>& u, double* residual = nullptr) const {
        int nx = p_.nx, nyi = p_.ny - 1;
        require(int(u.size()) == nx, "dtn: bottom data must have nx values");
        Eigen::VectorXd b = Eigen::VectorXd::Zero(long(nx) * nyi);
        double h1 = y_[1] - y_[0];
        for (int i = 0; i < nx; ++i) b[id(i, 1)] += u[i] / h1;
        Eigen::VectorXd U = direct_ ? Eigen::VectorXd(ldlt_.solve(b)) : Eigen::VectorXd(cg_.solve(b));
        double bn = b.norm();
        double res = bn > 0 ? (A_ * U - b).norm() / bn : (A_ * U).norm();
        if (residual) *residual = res;
        if (!(res <= 1e-10))
            throw Error("dtn: linear solve did not converge, relative residual " + std::to_string(res));
        double h2 = y_[2] - y_[1];
        double c0 = -(2 * h1 + h2) / (h1 * (h1 + h2)), c1 = (h1 + h2) / (h1 * h2), c2 = -h1 / (h2 * (h1 + h2));
        std::vector<double> out(nx);
        for (int i = 0; i < nx; ++i) out[i] = c0 * u[i] + c1 * U[id(i, 1)] + c2 * (p_.ny > 2 ? U[id(i, 2)] : 0.0);
        return out;
    }

private:
    long id(int i, int j) const { return long(j - 1) * p_.nx + i; }

    StripProblem p_;
    std::vector<double> y_;
    Eigen::SparseMatrix<double> A_;
    bool direct_ = true;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg_;
};

struct DtnResult {
    std::vector<double> x;
    std::vector<double> value;
    double residual = 0;
};

inline DtnResult dtn_solve(const StripProblem& p, StripSolver kind = StripSolver::Auto) {
    DtnSolver s(p, kind);
    DtnResult r;
    r.value = s.solve(p.bottom, &r.residual);
    for (int i = 0; i < p.nx; ++i) r.x.push_back(p.x(i));
    return r;
}

struct DtnKernel {
    double center = 0;
    DiscreteMeasure mu;  // offsets y = k dx, |k| <= nx/2
};

// K(y) = response at x0 to a unit value at x0 + y; by translation invariance one solve suffices.
inline DtnKernel dtn_kernel(const DtnSolver& s, int i0 = 0) {
    const auto& p = s.problem();
    require(p.lateral == Lateral::Periodic, "dtn_kernel: needs the translation-invariant (periodic) problem");
    int nx = p.nx;
    std::vector<double> e(nx, 0.0);
    e[i0] = 1;
    std::vector<double> R = s.solve(e);
    DtnKernel k;
    k.center = R[i0];
    for (int m = -nx / 2 + 1; m <= nx / 2; ++m) {
        if (m == 0) continue;
        // unit at i0 + m seen from i0 equals unit at i0 seen from i0 - m
        int idx = ((i0 - m) % nx + nx) % nx;
        Vec y(1);
        y << m * p.dx();
        k.mu.add(y, R[idx]);
    }
    return k;
}

// Rayleigh quotient of the discrete map on cos(xi x); xi = 0 is the constant mode
inline double dtn_eigenvalue(const DtnSolver& s, double xi, double* residual = nullptr) {
    const auto& p = s.problem();
    std::vector<double> b(p.nx);
    for (int i = 0; i < p.nx; ++i) b[i] = std::cos(xi * p.x(i));
    std::vector<double> o = s.solve(b, residual);
    double num = 0, den = 0;
    for (int i = 0; i < p.nx; ++i) {
        num += o[i] * b[i];
        den += b[i] * b[i];
    }
    return num / den;
}

// slope of log K(y) against log y over lo <= y <= hi, y > 0
inline LogLogFit dtn_kernel_slope(const DtnKernel& K, double lo, double hi) {
    std::vector<double> ys, ks;
    for (const auto& a : K.mu.atoms)
        if (a.y[0] >= lo && a.y[0] <= hi) {
            ys.push_back(a.y[0]);
            ks.push_back(a.mass);
        }
    require(ys.size() >= 2, "dtn_kernel_slope: fewer than two offsets in the window");
    return loglog_fit(ys, ks);
}

}  // namespace lmm
