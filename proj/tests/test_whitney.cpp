#include <gtest/gtest.h>

#include "lmm/whitney.hpp"

using namespace lmm;

TEST(Whitney, InterpPolyCases) {
    DyadicGrid g(2, 2, 1.0);
    auto aff = [](const Vec& x) { return 0.5 + 2 * x[0] - 3 * x[1]; };
    auto quad = [](const Vec& x) { return 1 - x[0] + x[0] * x[0] - 2 * x[0] * x[1] + 0.5 * x[1] * x[1]; };
    GridFunction ua = restrict(SmoothFn(2, aff), g), uq = restrict(SmoothFn(2, quad), g);
    CubeCover cov = cubes_at(Vec::Constant(2, 0.1), g);
    const auto& c = cov.cubes.front();
    Rng rng(1);
    for (int i = 0; i < 20; ++i) {
        Vec y = rng.uniform_vec(2, -2, 2);
        EXPECT_NEAR(interp_poly(ua, c, RegularityClass(1.5))(y), aff(y), 1e-12);
        EXPECT_NEAR(interp_poly(uq, c, RegularityClass(2.5))(y), quad(y), 1e-12);
        EXPECT_EQ(interp_poly(uq, c, RegularityClass(0.5))(y), uq.at(c.anchor));
    }
}

TEST(Whitney, LatticeBranchAndReproduction) {
    for (int d = 1; d <= 2; ++d) {
        DyadicGrid g(3, d, 1.0);
        Rng rng(2);
        GridFunction u(g);
        for (long L = 0; L < g.size(); ++L) u[L] = rng.uniform(-1, 1);
        for (double b : {0.5, 1.5, 2.5}) {
            WhitneyExtension E(u, RegularityClass(b));
            for (long L = 0; L < g.size(); ++L) EXPECT_EQ(E(g.point(g.node(L))), u[L]);
        }
        auto aff = [](const Vec& x) { return 0.3 - x[0] + (x.size() > 1 ? 2 * x[1] : 0.0); };
        auto quad = [aff](const Vec& x) { return aff(x) + x.squaredNorm() - (x.size() > 1 ? x[0] * x[1] : 0.0); };
        WhitneyExtension Ea(restrict(SmoothFn(d, aff), g), RegularityClass(1.5));
        WhitneyExtension Eq(restrict(SmoothFn(d, quad), g), RegularityClass(2.5));
        WhitneyExtension Ec(GridFunction(g, 2.0), RegularityClass(0.5));
        for (int s = 0; s < 300; ++s) {
            Vec x = rng.uniform_vec(d, -0.7, 0.7);
            EXPECT_NEAR(Ea(x), aff(x), 1e-12);
            EXPECT_NEAR(Eq(x), quad(x), 1e-12);
            EXPECT_NEAR(Ec(x), 2.0, 1e-12);
        }
    }
}

TEST(Whitney, IndicatorStaysInUnitInterval) {
    DyadicGrid g(2, 1, 1.0);
    GridFunction u(g);
    u.ref(Idx::Zero(1)) = 1.0;
    WhitneyExtension E(u, RegularityClass(0.5));
    Rng rng(3);
    for (int s = 0; s < 500; ++s) {
        double v = E(rng.uniform_vec(1, -1, 1));
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
    }
}

TEST(Whitney, TranslationEquivariance) {
    DyadicGrid g(3, 2, 2.0);
    Rng rng(4);
    GridFunction u(g);
    for (long L = 0; L < g.size(); ++L) u[L] = rng.uniform(-1, 1);
    Idx z(2);
    z << 3, -2;
    Vec zp = g.point(z);
    for (double b : {0.5, 1.5, 2.5}) {
        WhitneyExtension E(u, RegularityClass(b)), Et(translate(u, z), RegularityClass(b));
        for (int s = 0; s < 200; ++s) {
            Vec x = rng.uniform_vec(2, -1, 1);
            EXPECT_NEAR(Et(x), E(x + zp), 1e-12);
        }
    }
}

TEST(Whitney, DerivativesNearNodesAreStencilValues) {
    DyadicGrid g(3, 2, 1.0);
    Rng rng(6);
    GridFunction u(g);
    for (long L = 0; L < g.size(); ++L) u[L] = rng.uniform(-1, 1);
    WhitneyExtension E(u, RegularityClass(2.5));
    Idx x(2);
    x << 1, -1;
    Vec p = g.point(x);
    EXPECT_NEAR((E.gradient(p) - dgrad(u, x)).norm(), 0, 1e-14);
    EXPECT_NEAR((E.hessian(p) - dhess(u, x)).norm(), 0, 1e-14);
    // slightly off the node the same polynomial governs
    Vec q = p + Vec::Constant(2, 0.01 * g.spacing());
    Vec fd(2);
    for (int k = 0; k < 2; ++k) {
        Vec a = q, b = q;
        a[k] += 1e-7;
        b[k] -= 1e-7;
        fd[k] = (E(a) - E(b)) / 2e-7;
    }
    EXPECT_NEAR((E.gradient(q) - fd).norm(), 0, 1e-6);
}

TEST(Whitney, HolderNorm) {
    Vec c = Vec::Zero(1);
    auto est = holder_norm([](const Vec&) { return -3.0; }, 1, RegularityClass(0.5), c, 1, 200, 1);
    EXPECT_EQ(est.total(), 3.0);
    auto lin = holder_norm([](const Vec& x) { return x[0]; }, 1, RegularityClass(1.0), c, 1, 2000, 1);
    EXPECT_NEAR(lin.sup, 1.0, 1e-3);
    EXPECT_NEAR(lin.grad_sup, 1.0, 1e-8);
    auto root = [](const Vec& x) { return std::sqrt(std::abs(x[0])); };
    double prev = 0;
    for (long pairs : {100L, 1000L, 10000L, 100000L}) {
        auto e = holder_norm(root, 1, RegularityClass(0.5), c, 1, pairs, 9);
        EXPECT_GE(e.seminorm, prev);
        EXPECT_LE(e.seminorm, 1.0 + 1e-12);
        prev = e.seminorm;
    }
    EXPECT_GT(prev, 0.95);
    EXPECT_THROW(holder_norm(root, 1, RegularityClass(0.5), c, 1, 10, 9), Error);
}

TEST(Whitney, BoundednessConstantStable) {
    SmoothFn u(1, [](const Vec& x) { return std::sin(2 * x[0]) * std::exp(-x[0] * x[0]); });
    Vec c = Vec::Zero(1);
    double base = holder_norm(u.f, 1, RegularityClass(1.5), c, 1, 400, 3).total();
    std::vector<double> ratio;
    for (int n : {2, 3, 4, 5}) {
        WhitneyExtension E = project(u, DyadicGrid(n, 1, 3.0), RegularityClass(1.5));
        ratio.push_back(holder_norm([&](const Vec& x) { return E(x); }, 1, RegularityClass(1.5), c, 1, 400, 3).total() /
                        base);
    }
    // the measured constant is large at coarse levels (narrow Q* overlaps) but must not grow
    for (std::size_t i = 0; i < ratio.size(); ++i) {
        EXPECT_GT(ratio[i], 0.5);
        EXPECT_LT(ratio[i], 100.0);
        if (i) { EXPECT_LE(ratio[i], 1.2 * ratio[i - 1]); }
    }
}

TEST(Whitney, ProjectionConvergence) {
    // C^{2.5} bump, beta = 2
    SmoothFn u(1, [](const Vec& x) {
        double t = 1 - x[0] * x[0];
        return t > 0 ? std::pow(t, 2.5) : 0.0;
    });
    auto st = projection_study(u, RegularityClass(2.0), {2, 3, 4, 5}, 1.5, 3.0, 2000, 4);
    for (std::size_t i = 1; i < st.value.size(); ++i) EXPECT_LT(st.value[i], st.value[i - 1]);
    EXPECT_GT(st.fit.slope, 0.0);
    // idempotence on lattice data
    DyadicGrid g(3, 1, 2.0);
    WhitneyExtension E = project(u, g, RegularityClass(2.0));
    GridFunction back = restrict(E.as_smooth(), g);
    EXPECT_EQ(back.values(), restrict(u, g).values());
}

TEST(Whitney, DefectZeroForLowBeta) {
    SmoothFn w(1, [](const Vec& x) { return eta0(std::pow(std::abs(x[0]), 2.5)); });
    auto st = order_preservation_defect(w, Vec::Zero(1), RegularityClass(0.5), {2, 3, 4});
    for (double v : st.defect) EXPECT_LE(v, 1e-12);
    SmoothFn zero(1, [](const Vec&) { return 0.0; });
    auto z = order_preservation_defect(zero, Vec::Zero(1), RegularityClass(2.0), {2, 3, 4});
    EXPECT_TRUE(z.fit.exact);
}

TEST(Whitney, DefectDecaysForBetaTwo) {
    // asymmetric C^{2.5} family: the symmetric bump gives a vanishing defect in d = 1
    SmoothFn w(1, [](const Vec& x) {
        double a = std::abs(x[0]);
        return eta0(std::pow(a, 2.5) * (x[0] > 0 ? 1.5 : 0.5));
    });
    auto st = order_preservation_defect(w, Vec::Zero(1), RegularityClass(2.0), {2, 3, 4, 5});
    for (std::size_t i = 1; i < st.defect.size(); ++i) EXPECT_LT(st.defect[i], st.defect[i - 1]);
    EXPECT_GT(st.fit.slope, 0.0);
    SmoothFn neg(1, [](const Vec& x) { return x[0]; });
    EXPECT_THROW(order_preservation_defect(neg, Vec::Zero(1), RegularityClass(2.0), {2, 3, 4}), Error);
}

TEST(Whitney, MinGradientBound) {
    SmoothFn q(1, [](const Vec& x) { return x[0] * x[0]; });
    auto st = discrete_min_gradient_bound(q, Vec::Zero(1), RegularityClass(2.0), {2, 3, 4, 5});
    EXPECT_LT(st.max_ratio, 1e-12);  // symmetric: central gradient vanishes
    SmoothFn r(1, [](const Vec& x) {
        double a = std::abs(x[0]);
        return std::pow(a, 2.5) * (x[0] > 0 ? 1.5 : 0.5);
    });
    auto s2 = discrete_min_gradient_bound(r, Vec::Zero(1), RegularityClass(2.2), {2, 3, 4, 5, 6});
    EXPECT_TRUE(std::isfinite(s2.max_ratio));
    EXPECT_LT(s2.max_ratio, 2.0);
    SmoothFn zero(1, [](const Vec&) { return 0.0; });
    EXPECT_EQ(discrete_min_gradient_bound(zero, Vec::Zero(1), RegularityClass(2.0), {2, 3}).max_ratio, 0.0);
}
