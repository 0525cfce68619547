#pragma once

#include "operators.hpp"

namespace lmm::zoo {

inline Vec vec1(double a) { Vec v(1); v << a; return v; }

inline Mat scaled_identity(int d, double s) { return s * Mat::Identity(d, d); }

// symmetric atoms at +-k h along each axis, k = 1..K
inline DiscreteMeasure axis_atoms(int d, double h, int K, double mass) {
    DiscreteMeasure mu;
    mu.nonneg = mass >= 0;
    for (int i = 0; i < d; ++i)
        for (int k = 1; k <= K; ++k)
            for (int s : {-1, 1}) {
                Vec y = Vec::Zero(d);
                y[i] = s * k * h;
                mu.add(y, mass / (k * k));
            }
    return mu;
}

inline LevyOperator laplacian(int d) {
    return LevyOperator::make_constant(Mat::Identity(d, d), Vec::Zero(d), 0.0);
}

// constant coefficients with a diffusion, a small drift and lattice jumps (offsets are multiples of 1/8)
inline LevyOperator linear_levy(int d) {
    return LevyOperator::make_constant(scaled_identity(d, 0.75), Vec::Constant(d, 0.25), -0.5, axis_atoms(d, 0.125, 3, 1.0));
}

// diffusion plus jumps with zeroth-order coefficient C(x) = sin(x_1)
inline LevyOperator sin_coefficient(int d) {
    LevyOperator L;
    L.dim = d;
    L.constant = false;
    DiscreteMeasure mu = axis_atoms(d, 0.25, 2, 0.5);
    L.coeffs = [d](const Vec& x) { return LevyCoefficients{0.5 * Mat::Identity(d, d), Vec::Zero(d), std::sin(x[0])}; };
    L.measure = [mu](const Vec&) { return mu; };
    return L;
}

// The two members differ in diffusion, drift and jumps; opposite sources keep each active on a large set.
inline std::vector<OperatorOracle> bellman2_members(int d) {
    DiscreteMeasure m1, m2;
    Vec e = Vec::Zero(d);
    e[0] = 1;
    m1.add(0.25 * e, 2);
    m1.add(-0.25 * e, 2);
    m2.add(0.5 * e, 1);
    m2.add(-0.375 * e, 1.5);
    m1.nonneg = m2.nonneg = true;
    auto L1 = LevyOperator::make_constant(scaled_identity(d, 1.0), Vec::Zero(d), 0.0, m1);
    auto L2 = LevyOperator::make_constant(scaled_identity(d, 0.5), e, -0.5, m2);
    return {levy_oracle(L1, [](const Vec& x) { return 0.3 * std::sin(2 * x[0]); }, "bellman2.a"),
            levy_oracle(L2, [](const Vec& x) { return -0.3 * std::sin(2 * x[0]); }, "bellman2.b")};
}

inline std::vector<std::vector<OperatorOracle>> isaacs22_members(int d) {
    std::vector<std::vector<OperatorOracle>> rows(2);
    Vec e = Vec::Zero(d);
    e[0] = 1;
    const double diff[2][2] = {{1.0, 0.5}, {0.75, 0.25}};
    const double drift[2][2] = {{0.0, 0.5}, {-0.5, 0.0}};
    const double jump[2][2] = {{0.25, 0.5}, {0.375, 0.125}};
    const double phase[2][2] = {{0.0, 1.6}, {3.1, 4.7}};
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            DiscreteMeasure mu;
            mu.nonneg = true;
            mu.add(jump[a][b] * e, 1.0);
            mu.add(-jump[a][b] * e, 1.0);
            auto L = LevyOperator::make_constant(scaled_identity(d, diff[a][b]), drift[a][b] * e, 0.0, mu);
            double ph = phase[a][b];
            rows[a].push_back(levy_oracle(L, [ph](const Vec& x) { return 0.4 * std::sin(2 * x[0] + ph); },
                                          "isaacs22." + std::to_string(a) + std::to_string(b)));
        }
    return rows;
}

inline FractionalLaplacian fractional_fixture(int d) { return fractional_laplacian(d, 0.5, 2.0); }

// ---------- test functions for the rate studies (d = 1) ----------

inline SmoothFn sine() {
    SmoothFn s(1, [](const Vec& x) { return std::sin(x[0]); });
    s.grad = [](const Vec& x) { return vec1(std::cos(x[0])); };
    s.hess = [](const Vec& x) { Mat H(1, 1); H << -std::sin(x[0]); return H; };
    return s;
}

// (x^2 + eps^2)^{5/4}: smooth, but its Hessian has the modulus of |x|^{2.5} down to eps
inline SmoothFn mollified_power(double eps = std::ldexp(1.0, -12)) {
    SmoothFn m(1, [eps](const Vec& y) { return std::pow(y[0] * y[0] + eps * eps, 1.25); });
    m.grad = [eps](const Vec& y) { return vec1(2.5 * y[0] * std::pow(y[0] * y[0] + eps * eps, 0.25)); };
    m.hess = [eps](const Vec& y) {
        double r = y[0] * y[0] + eps * eps;
        Mat H(1, 1);
        H << 2.5 * std::pow(r, 0.25) + 1.25 * y[0] * y[0] * std::pow(r, -0.75);
        return H;
    };
    return m;
}

// (1 - x^2)_+^{5/2}, a C^{2.5} bump
inline SmoothFn holder_bump() {
    return SmoothFn(1, [](const Vec& x) {
        double t = 1 - x[0] * x[0];
        return t > 0 ? std::pow(t, 2.5) : 0.0;
    });
}

// nonnegative, vanishes at 0, asymmetric so the order defect does not cancel
inline SmoothFn defect_family() {
    return SmoothFn(1, [](const Vec& x) {
        double a = std::abs(x[0]);
        return eta0(std::pow(a, 2.5) * (x[0] > 0 ? 1.5 : 0.5));
    });
}

inline std::vector<std::string> names() {
    return {"laplacian", "linear", "sin_coefficient", "bellman2", "isaacs22", "fractional", "pucci"};
}

inline OperatorOracle oracle(const std::string& name, int d) {
    if (name == "laplacian") return levy_oracle(laplacian(d), {}, name);
    if (name == "linear") return levy_oracle(linear_levy(d), {}, name);
    if (name == "sin_coefficient") return levy_oracle(sin_coefficient(d), {}, name);
    if (name == "bellman2") {
        auto o = bellman(bellman2_members(d));
        o.name = name;
        return o;
    }
    if (name == "isaacs22") {
        auto o = isaacs(isaacs22_members(d));
        o.name = name;
        return o;
    }
    if (name == "fractional") return fractional_oracle(fractional_fixture(d));
    if (name == "pucci") return pucci_oracle(1.0, 2.0);
    std::string known;
    for (const auto& n : names()) known += " " + n;
    throw Error("unknown operator '" + name + "'; known:" + known);
}

}  // namespace lmm::zoo
