#pragma once

#include "core.hpp"

#include <functional>

namespace lmm {

// Regularity class C^beta with the k / k^+ distinction at integers.
// beta = 0 is allowed and means plain continuity (used by E_n^0).
struct RegularityClass {
    double beta = 0.5;
    bool plus = false;  // only meaningful when beta is an integer

    RegularityClass() = default;
    RegularityClass(double b, bool p = false) : beta(b), plus(p) {
        require(b >= 0 && b < 3, "regularity exponent must lie in [0,3), got " + std::to_string(b));
    }
    // 0: values only, 1: values + gradient, 2: values + gradient + Hessian
    int regime() const { return beta < 1 ? 0 : (beta < 2 ? 1 : 2); }
    bool integer() const { return beta == std::floor(beta); }
};

// A function on R^d with optional analytic derivatives. Missing derivatives
// fall back to central finite differences.
struct SmoothFn {
    int dim = 1;
    std::function<double(const Vec&)> f;
    std::function<Vec(const Vec&)> grad;
    std::function<Mat(const Vec&)> hess;
    RegularityClass cls{2.5};
    double fd_step = 1e-5;

    SmoothFn() = default;
    SmoothFn(int d, std::function<double(const Vec&)> fn, RegularityClass c = RegularityClass(2.5))
        : dim(d), f(std::move(fn)), cls(c) {}

    double operator()(const Vec& x) const { return f(x); }

    Vec gradient(const Vec& x) const {
        if (grad) return grad(x);
        Vec g(dim);
        for (int k = 0; k < dim; ++k) {
            double s = fd_step * (1 + std::abs(x[k]));
            Vec a = x, b = x;
            a[k] += s;
            b[k] -= s;
            g[k] = (f(a) - f(b)) / (2 * s);
        }
        return g;
    }

    Mat hessian(const Vec& x) const {
        if (hess) return hess(x);
        Mat H(dim, dim);
        double s = std::cbrt(fd_step) * 0.1;
        for (int k = 0; k < dim; ++k) {
            for (int l = k; l < dim; ++l) {
                Vec pp = x, pm = x, mp = x, mm = x;
                pp[k] += s; pp[l] += s;
                pm[k] += s; pm[l] -= s;
                mp[k] -= s; mp[l] += s;
                mm[k] -= s; mm[l] -= s;
                H(k, l) = H(l, k) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4 * s * s);
            }
        }
        return H;
    }
};

// G_n = 2^{-n} Z^d restricted to the box [-R, R]^d, R = box_radius.
class DyadicGrid {
public:
    DyadicGrid(int level, int dim, std::optional<double> box_radius = std::nullopt)
        : level_(level), dim_(dim) {
        require(dim >= 1 && dim <= 3, "grid dimension must be 1, 2 or 3");
        require(level >= 0 && level <= 30, "grid level out of range");
        h_ = std::ldexp(1.0, -level);
        double R = box_radius.value_or(std::ldexp(1.0, level));
        require(R > 0, "box radius must be positive");
        double m = R / h_;
        require(std::abs(m - std::round(m)) < 1e-9, "box radius must be a multiple of the spacing");
        half_ = long(std::round(m));
        side_ = 2 * half_ + 1;
        count_ = 1;
        for (int i = 0; i < dim; ++i) count_ *= side_;
    }

    int level() const { return level_; }
    int dim() const { return dim_; }
    double spacing() const { return h_; }
    double box_radius() const { return half_ * h_; }
    long half_width() const { return half_; }
    long side() const { return side_; }
    long size() const { return count_; }

    bool in_box(const Idx& i) const {
        for (int k = 0; k < dim_; ++k)
            if (i[k] < -half_ || i[k] > half_) return false;
        return true;
    }

    long linear(const Idx& i) const {
        long L = 0;
        for (int k = dim_ - 1; k >= 0; --k) L = L * side_ + (i[k] + half_);
        return L;
    }

    Idx node(long L) const {
        Idx i(dim_);
        for (int k = 0; k < dim_; ++k) {
            i[k] = L % side_ - half_;
            L /= side_;
        }
        return i;
    }

    Vec point(const Idx& i) const { return i.cast<double>() * h_; }

    // Index of x if x is (within tol) a lattice point.
    std::optional<Idx> lattice_index(const Vec& x, double tol = 1e-13) const {
        Idx i(dim_);
        for (int k = 0; k < dim_; ++k) {
            double r = std::round(x[k] / h_);
            if (std::abs(x[k] - r * h_) > tol) return std::nullopt;
            i[k] = long(r);
        }
        return i;
    }

    bool operator==(const DyadicGrid& o) const {
        return level_ == o.level_ && dim_ == o.dim_ && half_ == o.half_;
    }

private:
    int level_;
    int dim_;
    double h_;
    long half_, side_, count_;
};

// Element of C_*(G_n): values on the box, zero everywhere else on the lattice.
class GridFunction {
public:
    explicit GridFunction(DyadicGrid g, double fill = 0.0)
        : grid_(g), vals_(std::size_t(g.size()), fill) {}

    const DyadicGrid& grid() const { return grid_; }
    long size() const { return grid_.size(); }

    // Zero-padded read: nodes outside the box carry the value 0.
    double at(const Idx& i) const { return grid_.in_box(i) ? vals_[grid_.linear(i)] : 0.0; }

    double& ref(const Idx& i) {
        require(grid_.in_box(i), "node " + fmt_idx(i) + " is outside the box");
        return vals_[grid_.linear(i)];
    }
    double checked(const Idx& i) const {
        require(grid_.in_box(i), "node " + fmt_idx(i) + " is outside the box");
        return vals_[grid_.linear(i)];
    }

    double& operator[](long L) { return vals_[L]; }
    double operator[](long L) const { return vals_[L]; }
    const std::vector<double>& values() const { return vals_; }
    std::vector<double>& values() { return vals_; }

    Eigen::Map<const Eigen::VectorXd> vec() const { return {vals_.data(), long(vals_.size())}; }
    Eigen::Map<Eigen::VectorXd> vec() { return {vals_.data(), long(vals_.size())}; }

    double sup_norm() const {
        double m = 0;
        for (double v : vals_) m = std::max(m, std::abs(v));
        return m;
    }

    GridFunction& operator+=(const GridFunction& o) { vec() += o.vec(); return *this; }
    GridFunction& operator-=(const GridFunction& o) { vec() -= o.vec(); return *this; }
    GridFunction& operator*=(double a) { vec() *= a; return *this; }
    friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
    friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
    friend GridFunction operator*(double s, GridFunction a) { return a *= s; }

private:
    DyadicGrid grid_;
    std::vector<double> vals_;
};

// T_n: sample u at every node of the box.
inline GridFunction restrict(const SmoothFn& u, const DyadicGrid& g) {
    GridFunction out(g);
    for (long L = 0; L < g.size(); ++L) {
        Idx i = g.node(L);
        double v = u(g.point(i));
        if (!finite(v)) throw Error("restrict: non-finite value at node " + fmt_idx(i));
        out[L] = v;
    }
    return out;
}

// Pr_n: zero outside [-2^n, 2^n]^d.
inline GridFunction truncate(const GridFunction& u) {
    const auto& g = u.grid();
    long lim = long(std::ldexp(1.0, 2 * g.level()));  // 2^n / h_n
    GridFunction out(u);
    for (long L = 0; L < g.size(); ++L) {
        Idx i = g.node(L);
        for (int k = 0; k < g.dim(); ++k)
            if (std::abs(i[k]) > lim) {
                out[L] = 0;
                break;
            }
    }
    return out;
}

// (tau_z u)(x) = u(x + z), zero padding outside the box.
inline GridFunction translate(const GridFunction& u, const Idx& z) {
    const auto& g = u.grid();
    require(z.size() == g.dim(), "translate: shift has wrong dimension");
    GridFunction out(g);
    for (long L = 0; L < g.size(); ++L) out[L] = u.at(g.node(L) + z);
    return out;
}

inline GridFunction translate(const GridFunction& u, const Vec& z) {
    auto zi = u.grid().lattice_index(z);
    if (!zi) throw Error("translate: shift " + fmt_vec(z) + " is not a lattice vector");
    return translate(u, *zi);
}

struct NearestNode {
    Idx node;
    double distance = 0;
    bool tie = false;
};

// Coordinate-wise rounding gives the Euclidean nearest lattice point.
inline NearestNode nearest_node(const Vec& x, const DyadicGrid& g, double tie_tol = 1e-13) {
    NearestNode r;
    r.node.resize(g.dim());
    double h = g.spacing();
    for (int k = 0; k < g.dim(); ++k) {
        double t = x[k] / h;
        double fl = std::floor(t);
        r.node[k] = long(t - fl < 0.5 ? fl : fl + 1);
        if (std::abs((t - fl) - 0.5) * h < tie_tol) r.tie = true;
    }
    r.distance = (x - g.point(r.node)).norm();
    return r;
}

}  // namespace lmm
