#include <gtest/gtest.h>

#include "lmm/courrege.hpp"

using namespace lmm;

namespace {
Vec vz(int d) { return Vec::Zero(d); }
Vec e(int d, int k, double s = 1) { Vec v = Vec::Zero(d); v[k] = s; return v; }

PointFunctional laplacian(int d, double h) {
    PointFunctional l{vz(d), {}};
    l.kernel.push_back({vz(d), -2.0 * d / (h * h)});
    for (int k = 0; k < d; ++k) {
        l.kernel.push_back({e(d, k, h), 1 / (h * h)});
        l.kernel.push_back({e(d, k, -h), 1 / (h * h)});
    }
    return l;
}

PointFunctional random_gcp(int d, Rng& rng, double h) {
    PointFunctional l{rng.uniform_vec(d, -1, 1), {}};
    l.kernel.push_back({vz(d), rng.uniform(-5, 5)});
    int n = int(rng.integer(2, 10));
    for (int k = 0; k < n; ++k) {
        Idx z(d);
        do {
            for (int i = 0; i < d; ++i) z[i] = rng.integer(-12, 12);
        } while (z.isZero());
        l.kernel.push_back({z.cast<double>() * h, rng.uniform(0, 3) / (h * h)});
    }
    return l;
}
}  // namespace

TEST(Courrege, GcpClassification) {
    EXPECT_TRUE(is_gcp(laplacian(1, 0.1)));
    PointFunctional cd{vz(1), {{e(1, 0, 0.1), 1}, {e(1, 0, -0.1), -1}}};
    EXPECT_FALSE(is_gcp(cd));
    Rng rng(1);
    for (int t = 0; t < 20; ++t) EXPECT_TRUE(is_gcp(random_gcp(2, rng, 0.125)));
}

TEST(Courrege, Coefficients) {
    EXPECT_NEAR(c_of(laplacian(2, 0.1)), 0, 1e-12);
    PointFunctional delta{vz(1), {{vz(1), 1}}};
    EXPECT_EQ(c_of(delta), 1.0);
    PointFunctional jump{vz(1), {{e(1, 0, 3), 1}, {vz(1), -1}}};
    EXPECT_EQ(c_of(jump), 0.0);

    double h = 1.0 / 64;
    PointFunctional cd{vz(2), {{e(2, 0, h), 1 / (2 * h)}, {e(2, 0, -h), -1 / (2 * h)}}};
    Vec B = b_of(cd, RadialCutoff());
    EXPECT_NEAR((B - e(2, 0)).norm(), 0, 1e-15);
    Mat A = a_of(laplacian(3, h), RadialCutoff::eta_d(0.1));
    EXPECT_NEAR((A - Mat::Identity(3, 3)).norm(), 0, 1e-12);
    EXPECT_NEAR(b_of(laplacian(3, h), RadialCutoff()).norm(), 0, 1e-12);

    auto mu = mu_of(laplacian(1, 0.1));
    EXPECT_EQ(mu.size(), 2u);
    EXPECT_NEAR(mu.atoms[0].mass, 100, 1e-9);
    EXPECT_TRUE(mu.nonneg);
    EXPECT_TRUE(mu_of(delta).empty());
    EXPECT_THROW(b_of(cd, RadialCutoff{1.0, 1.5}), Error);
}

TEST(Courrege, DecomposeLaplacian) {
    for (int d = 1; d <= 3; ++d) {
        auto l = laplacian(d, 1.0 / 64);
        auto dec = decompose(l);
        EXPECT_LE((dec.A - Mat::Identity(d, d)).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LE(dec.B.norm(), 1e-12);
        EXPECT_LE(std::abs(dec.C), 1e-12);
        EXPECT_EQ(dec.mu.size(), std::size_t(2 * d));
        EXPECT_TRUE(dec.gcp);
        EXPECT_TRUE(dec.a_converged);
        EXPECT_LE(dec.residual, 1e-12);
    }
}

TEST(Courrege, DecomposeFarJump) {
    Vec y0(2);
    y0 << 1.25, -0.5;
    PointFunctional l{vz(2), {{y0, 1}, {vz(2), -1}}};
    auto dec = decompose(l);
    EXPECT_EQ(dec.C, 0.0);
    EXPECT_EQ(dec.A.norm(), 0.0);
    EXPECT_EQ(dec.B.norm(), 0.0);
    ASSERT_EQ(dec.mu.size(), 1u);
    EXPECT_EQ(dec.mu.atoms[0].mass, 1.0);
    SmoothFn u(2, [](const Vec& x) { return std::sin(3 * x[0]) + x[1] * x[1]; });
    EXPECT_NEAR(dec.represent(l.x0, u), u(y0) - u(vz(2)), 1e-14);
}

TEST(Courrege, DecomposeCentralDriftFlagged) {
    double h = 1.0 / 32;
    PointFunctional cd{vz(1), {{e(1, 0, h), 1 / (2 * h)}, {e(1, 0, -h), -1 / (2 * h)}, {vz(1), 0.0}}};
    auto dec = decompose(cd);
    EXPECT_FALSE(dec.gcp);
    EXPECT_FALSE(dec.mu.nonneg);
    EXPECT_NEAR(dec.B[0], 1.0, 1e-14);
    EXPECT_LE(dec.residual, 1e-12);
}

TEST(Courrege, ResidualDetectsPerturbations) {
    auto l = laplacian(1, 1.0 / 16);
    auto dec = decompose(l);
    auto probes = uniqueness_probes(l);
    EXPECT_LT(reconstruct_residual(dec, l, probes), 1e-12);
    auto badC = dec;
    badC.C += 1e-3;
    EXPECT_GE(reconstruct_residual(badC, l, probes), 1e-3 - 1e-15);
    auto badMu = dec;
    badMu.mu.atoms[0].mass += 0.5;
    EXPECT_GE(reconstruct_residual(badMu, l, probes), 0.5 * (1 - 1e-9));
}

TEST(Courrege, RandomGcpRoundTrip) {
    Rng rng(5);
    for (int t = 0; t < 100; ++t) {
        int d = 1 + t % 2;
        auto l = random_gcp(d, rng, 1.0 / 16);
        auto dec = decompose(l);
        EXPECT_TRUE(dec.gcp);
        EXPECT_TRUE(dec.mu.nonneg);
        EXPECT_LE(dec.residual, 1e-10);
        EXPECT_TRUE(is_psd(dec.A));
    }
}

TEST(Courrege, Linearity) {
    Rng rng(6);
    auto l1 = random_gcp(2, rng, 0.125), l2 = random_gcp(2, rng, 0.125);
    l2.x0 = l1.x0;
    PointFunctional s{l1.x0, {}};
    for (auto k : l1.kernel) s.kernel.push_back({k.y, 2.0 * k.w});
    for (auto k : l2.kernel) s.kernel.push_back(k);
    DecomposeOptions opt;
    opt.deltas = {0.125, 0.0625};
    auto d1 = decompose(l1, opt), d2 = decompose(l2, opt), ds = decompose(s, opt);
    EXPECT_NEAR((ds.A - (2 * d1.A + d2.A)).norm(), 0, 1e-9);
    EXPECT_NEAR(ds.C - (2 * d1.C + d2.C), 0, 1e-9);
    if (d1.delta_B == d2.delta_B && ds.delta_B == d1.delta_B) {
        EXPECT_NEAR((ds.B - (2 * d1.B + d2.B)).norm(), 0, 1e-9);
    }
}

TEST(Courrege, EtaMonotoneForPsdProbes) {
    Rng rng(7);
    auto l = random_gcp(2, rng, 1.0 / 64);
    Mat M(2, 2);
    M << 1.0, 0.3, 0.3, 0.5;
    double prev = -1;
    for (double del : {0.01, 0.02, 0.05, 0.1, 0.2}) {
        double v = (a_of(l, RadialCutoff::eta_d(del)) * M).trace();
        EXPECT_GE(v, prev - 1e-12);
        prev = v;
    }
}

TEST(Courrege, LaplacianScaleConsistency) {
    for (int n = 4; n <= 7; ++n) {
        double h = std::ldexp(1.0, -n);
        EXPECT_NEAR((a_of(laplacian(2, h), RadialCutoff::eta_d(0.125)) - Mat::Identity(2, 2)).norm(), 0, 1e-11);
    }
}

TEST(Courrege, NonConvergentScheduleReported) {
    // kernel with atoms at every scale: A keeps moving along the schedule
    PointFunctional l{vz(1), {}};
    double tot = 0;
    for (int k = 1; k <= 64; ++k) {
        double y = k / 64.0, m = std::pow(y, -1.5) / 64;
        l.kernel.push_back({e(1, 0, y), m});
        l.kernel.push_back({e(1, 0, -y), m});
        tot += 2 * m;
    }
    l.kernel.push_back({vz(1), -tot});
    auto dec = decompose(l);
    EXPECT_FALSE(dec.a_converged);
    EXPECT_LE(dec.residual, 1e-10);
    EXPECT_EQ(dec.mu.size(), 128u);
    DecomposeOptions strict;
    strict.require_convergence = true;
    EXPECT_THROW(decompose(l, strict), Error);
}

TEST(Courrege, WeakLocalization) {
    auto l = laplacian(1, 1.0 / 16);
    SmoothFn u(1, [](const Vec& x) { return std::sin(x[0]); });
    SmoothFn v(1, [](const Vec& x) { return std::sin(x[0]) + 0.1 * std::cos(3 * x[0]); });
    double r = weak_localization_ratio(l, u, v, 0.5, 0.5, RegularityClass(2.5));
    EXPECT_TRUE(std::isfinite(r));
    EXPECT_GT(r, 0.0);
    EXPECT_LT(r, 10.0);
}
