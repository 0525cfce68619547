#include <gtest/gtest.h>

#include "lmm/zoo.hpp"

using namespace lmm;

namespace {
double weight(const LevyStencil& s, const Vec& y) {
    for (const auto& e : s.kernel.kernel)
        if ((e.y - y).norm() < 1e-12) return e.w;
    return 0.0;
}
}  // namespace

TEST(Operators, LaplacianStencil) {
    double h = 0.125;
    for (int d = 1; d <= 3; ++d) {
        auto s = levy_stencil(Mat::Identity(d, d), Vec::Zero(d), 0, {}, h);
        EXPECT_TRUE(s.gcp);
        EXPECT_EQ(s.kernel.kernel.size(), std::size_t(2 * d + 1));
        EXPECT_DOUBLE_EQ(weight(s, Vec::Zero(d)), -2.0 * d / (h * h));
    }
}

TEST(Operators, DriftSchemes) {
    double h = 0.25;
    auto c = levy_stencil(Mat::Zero(1, 1), zoo::vec1(1), 0, {}, h, DriftScheme::Central);
    auto u = levy_stencil(Mat::Zero(1, 1), zoo::vec1(1), 0, {}, h, DriftScheme::Upwind);
    auto ub = levy_stencil(Mat::Zero(1, 1), zoo::vec1(-1), 0, {}, h, DriftScheme::Upwind);
    EXPECT_FALSE(c.gcp);
    EXPECT_TRUE(u.gcp);
    EXPECT_TRUE(ub.gcp);
    EXPECT_DOUBLE_EQ(weight(u, zoo::vec1(h)), 4.0);
    EXPECT_DOUBLE_EQ(weight(ub, zoo::vec1(-h)), 4.0);
}

TEST(Operators, JumpStencilAndValidation) {
    DiscreteMeasure mu;
    mu.add(zoo::vec1(1.5), 2);  // |y| >= 1: no compensation
    auto s = levy_stencil(Mat::Zero(1, 1), zoo::vec1(0), 0, mu, 0.25);
    EXPECT_EQ(s.kernel.kernel.size(), 2u);
    EXPECT_DOUBLE_EQ(weight(s, zoo::vec1(1.5)), 2.0);
    EXPECT_DOUBLE_EQ(weight(s, zoo::vec1(0)), -2.0);
    DiscreteMeasure off;
    off.add(zoo::vec1(0.3), 1);
    EXPECT_THROW(levy_stencil(Mat::Zero(1, 1), zoo::vec1(0), 0, off, 0.25), Error);
    EXPECT_THROW(levy_stencil(-Mat::Identity(1, 1), zoo::vec1(0), 0, {}, 0.25, DriftScheme::Upwind,
                              SecondOrderScheme::Centered, true),
                 Error);
}

TEST(Operators, MixedSecondOrderExactOnQuadratics) {
    double h = 0.125;
    DyadicGrid g(3, 2, 1.0);
    Mat A(2, 2);
    A << 1.0, 0.4, 0.4, 0.7;
    for (auto scheme : {SecondOrderScheme::Centered, SecondOrderScheme::Forward}) {
        auto s = levy_stencil(A, Vec::Zero(2), 0, {}, h, DriftScheme::Upwind, scheme);
        Mat Q(2, 2);
        Q << 0.5, -1.0, 0.0, 2.0;
        SmoothFn q(2, [Q](const Vec& x) { return x.dot(Q * x) + x[0]; });
        GridFunction out = s.apply(restrict(q, g));
        Idx c(2);
        c << 1, -2;
        EXPECT_NEAR(out.checked(c), (A * (Q + Q.transpose())).trace(), 1e-10);
    }
    EXPECT_TRUE(levy_stencil(A, Vec::Zero(2), 0, {}, h).gcp);
    Mat Abad(2, 2);
    Abad << 1.0, 0.9, 0.9, 0.2;  // not diagonally dominant
    EXPECT_FALSE(levy_stencil(Abad, Vec::Zero(2), 0, {}, h).gcp);
}

TEST(Operators, FractionalConstantMatchesClosedForm) {
    for (int d = 1; d <= 3; ++d)
        for (double a : {0.3, 0.5, 1.0, 1.5, 1.9}) {
            double closed = std::pow(2, a) * std::tgamma((d + a) / 2) / (std::pow(M_PI, d / 2.0) * std::abs(std::tgamma(-a / 2)));
            EXPECT_NEAR(fractional_constant(d, a) / closed, 1.0, 1e-6) << d << " " << a;
        }
    EXPECT_THROW(fractional_constant(1, 2.0), Error);
}

TEST(Operators, FractionalSymmetryAndCosine) {
    auto F = fractional_laplacian(1, 1.0, 16);
    PointFunctional l{Vec::Zero(1), {}};
    for (const auto& a : F.measure(1.0 / 64).atoms) l.kernel.push_back({a.y, a.mass});
    EXPECT_LE(b_of(l, RadialCutoff()).norm(), 1e-12);
    auto O = fractional_oracle(F);
    for (double xi : {1.0, 2.0}) {
        SmoothFn u(1, [xi](const Vec& x) { return std::cos(xi * x[0]); });
        for (double x : {0.0, 0.3, 1.1}) {
            double want = -std::pow(xi, 1.0) * std::cos(xi * x);
            EXPECT_NEAR(O(u, zoo::vec1(x), {6}), want, 0.03 * std::abs(want) + 1e-12);
        }
    }
    EXPECT_THROW(fractional_laplacian(1, 1.0, 0.01).measure(1.0 / 64), Error);
}

TEST(Operators, FractionalMomentTrend) {
    auto F = fractional_laplacian(1, 0.5, 2.0);
    std::vector<double> prev;
    for (int n = 2; n <= 6; ++n) {
        auto mu = F.measure(std::ldexp(1.0, -n));
        double m1 = levy_moment(mu, 1.5), m2 = levy_moment(mu, 0.6), m3 = levy_moment(mu, 0.5);
        EXPECT_TRUE(std::isfinite(m1));
        EXPECT_LT(m1, m2);
        EXPECT_LT(m2, m3);
        if (!prev.empty()) {
            EXPECT_NEAR(m1, prev[0], 0.1 * prev[0]);  // stable above alpha
            EXPECT_GT(m3, prev[2]);                    // grows at alpha
        }
        prev = {m1, m2, m3};
    }
}

TEST(Operators, BellmanIsaacsExamples) {
    SmoothFn u(1, [](const Vec& x) { return x[0]; });
    auto c1 = levy_oracle(LevyOperator::make_constant(Mat::Zero(1, 1), zoo::vec1(0), 1), {}, "one");
    auto c3 = levy_oracle(LevyOperator::make_constant(Mat::Zero(1, 1), zoo::vec1(0), 3), {}, "three");
    Vec x = zoo::vec1(1);
    EXPECT_EQ(bellman({c1})(u, x), 1.0);
    EXPECT_EQ(bellman({c1, c3})(u, x), 3.0);
    EXPECT_EQ(isaacs({{c3}})(u, x), 3.0);
    EXPECT_EQ(isaacs({{c1, c3}, {c1}})(u, x), 1.0);
    EXPECT_THROW(bellman({}), Error);
}

TEST(Operators, BellmanLipschitzEnvelope) {
    auto members = zoo::bellman2_members(1);
    auto B = bellman(members);
    Rng rng(3);
    for (int t = 0; t < 20; ++t) {
        SmoothFn u = random_test_function(1, rng), v = random_test_function(1, rng);
        Vec x = rng.uniform_vec(1, -1, 1);
        double m = 0;
        for (const auto& o : members) m = std::max(m, std::abs(o(u, x) - o(v, x)));
        EXPECT_LE(std::abs(B(u, x) - B(v, x)), m + 1e-12);
    }
}

TEST(Operators, Pucci) {
    auto p = pucci(1, 2, Mat(Mat::Identity(2, 2)));
    EXPECT_DOUBLE_EQ(p.plus, 4);
    EXPECT_DOUBLE_EQ(p.minus, 2);
    Mat D(2, 2);
    D << 1, 0, 0, -1;
    p = pucci(1, 2, D);
    EXPECT_DOUBLE_EQ(p.plus, 1);
    EXPECT_DOUBLE_EQ(p.minus, -1);
    EXPECT_THROW(pucci(2, 1, D), Error);
    Rng rng(5);
    for (int t = 0; t < 100; ++t) {
        int d = 2 + t % 2;
        Mat G = Mat::Random(d, d), H = G + G.transpose();
        Eigen::HouseholderQR<Mat> qr(Mat(Mat::Random(d, d)));
        Mat Q = qr.householderQ();
        Vec s(d);
        for (int i = 0; i < d; ++i) s[i] = rng.uniform(0.5, 3.0);
        Mat A = Q * s.asDiagonal() * Q.transpose();
        auto e = pucci(0.5, 3.0, H);
        double tr = (A * H).trace();
        EXPECT_GE(tr, e.minus - 1e-12);
        EXPECT_LE(tr, e.plus + 1e-12);
    }
}

TEST(Operators, MongeAmpere) {
    EXPECT_DOUBLE_EQ(monge_ampere(Mat(Mat::Identity(2, 2))), 1.0);
    auto r = ma_infimum(Mat::Identity(2, 2), 50, 1);
    EXPECT_NEAR(r.value, 2.0, 1e-12);
    EXPECT_NEAR(r.lower, 2.0, 1e-15);
    Mat D(2, 2);
    D << 1, 0, 0, 4;
    Mat Astar = ma_minimizer(D);
    EXPECT_NEAR(Astar(0, 0), 2.0, 1e-14);
    EXPECT_NEAR(Astar(1, 1), 0.5, 1e-14);
    EXPECT_NEAR((Astar * D).trace(), 4.0, 1e-14);
    Mat N(2, 2);
    N << 1, 0, 0, -1;
    EXPECT_THROW(monge_ampere(N), Error);
    EXPECT_THROW(ma_infimum(N, 5, 1), Error);
    Rng rng(8);
    for (int t = 0; t < 40; ++t) {
        int d = 2 + t % 2;
        Mat G = Mat::Random(d, d);
        Mat S = G * G.transpose() + 0.1 * Mat::Identity(d, d);
        auto s = ma_infimum(S, 200, rng.raw(), false);
        auto w = ma_infimum(S, 200, rng.raw(), true);
        EXPECT_GE(s.value, s.lower - 1e-10);
        EXPECT_NEAR(w.value, w.lower, 1e-10 * std::max(1.0, w.lower));
    }
}

TEST(Operators, TouchingPairsForGcpOracles) {
    Rng rng(17);
    for (const std::string name : {"laplacian", "linear", "bellman2", "isaacs22", "pucci", "fractional"}) {
        int d = name == "pucci" ? 2 : 1;
        auto O = zoo::oracle(name, d);
        ASSERT_TRUE(O.gcp) << name;
        for (int t = 0; t < 50; ++t) {
            SmoothFn u = random_test_function(d, rng);
            Vec x = rng.uniform_vec(d, -0.5, 0.5);
            double k = rng.uniform(0.1, 2);
            SmoothFn v(d, [u, x, k](const Vec& z) { return u(z) + k * (z - x).squaredNorm(); });
            v.grad = [u, x, k](const Vec& z) { return Vec(u.gradient(z) + 2 * k * (z - x)); };
            v.hess = [u, k, d](const Vec& z) { return Mat(u.hessian(z) + 2 * k * Mat::Identity(d, d)); };
            double a = O(v, x, {5}), b = O(u, x, {5});
            EXPECT_GE(a, b - 1e-9 * (1 + std::abs(b))) << name;
        }
    }
}

TEST(Operators, DtnEigenvaluesAndConstants) {
    StripProblem p;
    DtnSolver s(p);
    EXPECT_TRUE(s.m_matrix());
    std::vector<double> one(p.nx, 1.0);
    for (double v : s.solve(one)) EXPECT_NEAR(v, -1 / p.H, 1e-8);
    for (double xi : {1.0, 2.0, 4.0}) {
        std::vector<double> b(p.nx);
        for (int i = 0; i < p.nx; ++i) b[i] = std::cos(xi * p.x(i));
        auto o = s.solve(b);
        double want = -xi / std::tanh(xi * p.H);
        EXPECT_NEAR(o[0] / want, 1.0, 0.02);
        EXPECT_NEAR(o[p.nx / 4] / (want * b[p.nx / 4] + 1e-300), 1.0, 0.02 + 1e-6 / std::abs(b[p.nx / 4] + 1e-300));
    }
    StripProblem bad = p;
    bad.nx = 8;
    EXPECT_THROW(DtnSolver{bad}, Error);
}

TEST(Operators, DtnKernel) {
    StripProblem p;
    DtnSolver s(p);
    auto K = dtn_kernel(s);
    double sum = K.center;
    std::vector<double> ys, ks;
    for (const auto& a : K.mu.atoms) {
        EXPECT_GE(a.mass, -1e-8);
        sum += a.mass;
        if (a.y[0] >= 0.1 && a.y[0] <= 1.0) {
            ys.push_back(a.y[0]);
            ks.push_back(a.mass);
        }
    }
    EXPECT_NEAR(sum, -1 / p.H, 1e-8);
    EXPECT_NEAR(loglog_fit(ys, ks).slope, -2.0, 0.3);
}

TEST(Operators, DtnComparisonAndShifts) {
    StripProblem p;
    p.nx = 64;
    p.ny = 48;
    DtnSolver s(p);
    Rng rng(2);
    for (int t = 0; t < 10; ++t) {
        std::vector<double> u(p.nx), v(p.nx);
        int i0 = int(rng.integer(0, p.nx - 1));
        for (int i = 0; i < p.nx; ++i) {
            u[i] = std::sin(p.x(i) + rng.uniform(0, 0.1));
            v[i] = u[i] + (i == i0 ? 0.0 : rng.uniform(0, 1));
        }
        EXPECT_GE(s.solve(v)[i0], s.solve(u)[i0] - 1e-12);
    }
    std::vector<double> u(p.nx), su(p.nx);
    for (int i = 0; i < p.nx; ++i) u[i] = std::exp(std::sin(p.x(i))) + 0.3 * std::cos(3 * p.x(i));
    for (int i = 0; i < p.nx; ++i) su[i] = u[(i + 5) % p.nx];
    auto a = s.solve(u), b = s.solve(su);
    for (int i = 0; i < p.nx; ++i) EXPECT_NEAR(b[i], a[(i + 5) % p.nx], 1e-10);
    DtnSolver cg(p, StripSolver::CG);
    auto c = cg.solve(u);
    for (int i = 0; i < p.nx; ++i) EXPECT_NEAR(c[i], a[i], 1e-8);
}

TEST(Operators, DtnRayleighQuotientAndSlope) {
    StripProblem p;
    p.nx = 64;
    p.ny = 64;
    DtnSolver s(p);
    EXPECT_NEAR(dtn_eigenvalue(s, 0.0), -1 / p.H, 1e-8);
    EXPECT_NEAR(dtn_eigenvalue(s, 1.0), -1 / std::tanh(p.H), 0.02);
    auto K = dtn_kernel(s);
    EXPECT_NEAR(dtn_kernel_slope(K, 0.1, 1.0).slope, -2.0, 0.4);
    EXPECT_THROW(dtn_kernel_slope(K, 0.5, 0.51), Error);
}
