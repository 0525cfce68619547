#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace lmm {

// Small fixed-capacity types: d <= 3 everywhere, so nothing here allocates.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;
using Idx = Eigen::Matrix<long, Eigen::Dynamic, 1, 0, 3, 1>;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what) {
    if (!ok) throw Error(what);
}

inline std::string fmt_vec(const Vec& v) {
    std::string s = "(";
    for (int i = 0; i < v.size(); ++i) {
        if (i) s += ", ";
        s += std::to_string(v[i]);
    }
    return s + ")";
}

inline std::string fmt_idx(const Idx& v) {
    std::string s = "[";
    for (int i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(v[i]);
    }
    return s + "]";
}

inline Vec zeros(int d) { return Vec::Zero(d); }
inline Mat zeros2(int d) { return Mat::Zero(d, d); }

// Seeded generator. Distributions are done by hand so that streams are
// identical across standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double uniform() { return double(eng_() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
    long integer(long lo, long hi) {  // inclusive
        return lo + long(eng_() % std::uint64_t(hi - lo + 1));
    }
    double normal() {
        if (spare_) {
            double v = *spare_;
            spare_.reset();
            return v;
        }
        double u1 = 0;
        while (u1 <= 0) u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2 * M_PI * u2);
        return r * std::cos(2 * M_PI * u2);
    }
    Vec uniform_vec(int d, double a, double b) {
        Vec v(d);
        for (int i = 0; i < d; ++i) v[i] = uniform(a, b);
        return v;
    }
    std::uint64_t raw() { return eng_(); }

private:
    std::mt19937_64 eng_;
    std::optional<double> spare_;
};

struct LogLogFit {
    bool exact = false;  // every error was zero
    double slope = 0;
    double intercept = 0;
    int points = 0;
};

// Least-squares slope of log(y) against log(x). Zero entries are dropped;
// if all are zero the fit is flagged exact.
inline LogLogFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y,
                            double zero_tol = 0.0) {
    require(x.size() == y.size(), "loglog_fit: size mismatch");
    LogLogFit f;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(std::abs(y[i]) > zero_tol)) continue;
        double lx = std::log(x[i]), ly = std::log(std::abs(y[i]));
        sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
        ++m;
    }
    f.points = m;
    if (m == 0) {
        f.exact = true;
        return f;
    }
    require(m >= 2, "loglog_fit: fewer than two nonzero points");
    double den = m * sxx - sx * sx;
    f.slope = (m * sxy - sx * sy) / den;
    f.intercept = (sy - f.slope * sx) / m;
    return f;
}

inline bool finite(double v) { return std::isfinite(v); }

}  // namespace lmm
