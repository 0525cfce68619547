#pragma once

#include "special.hpp"

#include <ostream>

namespace lmm {

// Whitney cubes of R^d \ Z^d are built in the cell Q_0 = [-1/2,1/2]^d around 0
// and repeated periodically; on G_n everything is scaled by h_n.
//
// A generation-k cube of Q_0 has side s = 2^{-k} and lower corner a*s with
// a_i in [-2^{k-1}, 2^{k-1}). Ring R_k = { rho_k <= |x| <= rho_{k-1} },
// rho_k = 2 sqrt(d) 2^{-k}. A cube is "marked" if it meets its ring and
// selected if marked with no marked ancestor.

struct WhitneyCube {
    int generation = 0;
    Idx anchor;  // lattice index of y-hat
    Idx corner;  // a, in units of 2^{-k} relative to the anchor
    Vec center;  // absolute coordinates
    double side = 0;
    double h = 1;

    Vec anchor_point() const { return anchor.cast<double>() * h; }
    double diam() const { return side * std::sqrt(double(center.size())); }
    bool same_as(const WhitneyCube& o) const {
        return generation == o.generation && anchor == o.anchor && corner == o.corner;
    }
    // distance from the cube to the lattice (attained at the anchor)
    double lattice_distance() const;
};

namespace cube_detail {

constexpr int max_generation = 60;

// min and max of |x|^2 over the generation-k cube with corner a (unit cell units,
// exact for dyadic coordinates at the scales in use)
inline void norm2_range(const Idx& a, int k, double& mn, double& mx) {
    double s = std::ldexp(1.0, -k);
    mn = mx = 0;
    for (int i = 0; i < a.size(); ++i) {
        double lo = double(a[i]) * s, hi = double(a[i] + 1) * s;
        double l2 = lo * lo, h2 = hi * hi;
        if (lo > 0 || hi < 0) mn += std::min(l2, h2);
        mx += std::max(l2, h2);
    }
}

inline bool marked(const Idx& a, int k) {
    int d = int(a.size());
    double mn, mx;
    norm2_range(a, k, mn, mx);
    // rho_k^2 = 4 d 4^{-k}
    double rk2 = 4.0 * d * std::ldexp(1.0, -2 * k);
    double rk1 = 4.0 * d * std::ldexp(1.0, -2 * (k - 1));
    return mn <= rk1 && mx >= rk2;
}

inline bool selected(const Idx& a, int k) {
    if (!marked(a, k)) return false;
    for (int m = 1; m < k; ++m) {
        Idx p(a.size());
        for (int i = 0; i < a.size(); ++i) p[i] = a[i] >> (k - m);  // floor division
        if (marked(p, m)) return false;
    }
    return true;
}

// product bump: 1 on |t| <= 1/2, 0 on |t| >= 9/16
inline double bump1(double t) {
    double u = std::abs(t);
    if (u <= 0.5) return 1.0;
    if (u >= 0.5625) return 0.0;
    return phi0(1.0 - (u - 0.5) * 16.0);
}

}  // namespace cube_detail

inline double WhitneyCube::lattice_distance() const {
    double mn, mx;
    cube_detail::norm2_range(corner, generation, mn, mx);
    return std::sqrt(mn) * h;
}

// Selected cubes of Q_0 up to generation K, unit scale (h = 1, anchor 0).
inline std::vector<WhitneyCube> base_family(int d, int K) {
    require(d >= 1 && d <= 3, "base_family: dimension must be 1..3");
    require(K >= 1, "base_family: need at least one generation");
    require(K <= 30, "base_family: generations beyond 30 are refused");
    std::vector<WhitneyCube> out;
    std::vector<Idx> level;
    {
        long n = 1L << d;
        for (long m = 0; m < n; ++m) {
            Idx a(d);
            for (int i = 0; i < d; ++i) a[i] = ((m >> i) & 1) ? 0 : -1;
            level.push_back(a);
        }
    }
    for (int k = 1; k <= K && !level.empty(); ++k) {
        std::vector<Idx> next;
        double s = std::ldexp(1.0, -k);
        for (const Idx& a : level) {
            if (cube_detail::marked(a, k)) {
                WhitneyCube c;
                c.generation = k;
                c.anchor = Idx::Zero(d);
                c.corner = a;
                c.center = (a.cast<double>().array() + 0.5).matrix() * s;
                c.side = s;
                c.h = 1;
                out.push_back(c);
            } else if (k < K) {
                long n = 1L << d;
                for (long m = 0; m < n; ++m) {
                    Idx b(d);
                    for (int i = 0; i < d; ++i) b[i] = 2 * a[i] + ((m >> i) & 1);
                    next.push_back(b);
                }
            }
        }
        level.swap(next);
    }
    return out;
}

struct CubeCover {
    bool on_lattice = false;
    Idx node;  // set when on_lattice
    std::vector<WhitneyCube> cubes;
    std::vector<double> weights;
};

// All cubes whose inflated copy Q* contains x, with partition weights.
inline CubeCover cubes_at(const Vec& x, double h, double tol = 1e-13) {
    using namespace cube_detail;
    int d = int(x.size());
    CubeCover cov;
    Vec xi = x / h;
    Idx base(d);
    for (int i = 0; i < d; ++i) base[i] = long(std::llround(xi[i]));
    if ((x - base.cast<double>() * h).norm() < tol) {
        cov.on_lattice = true;
        cov.node = base;
        return cov;
    }
    const double reach = 0.5 + 1.0 / 64.0;
    const double sqd = std::sqrt(double(d));
    long nanch = 1;
    for (int i = 0; i < d; ++i) nanch *= 3;
    double total = 0;
    for (long m = 0; m < nanch; ++m) {
        Idx z(d);
        long t = m;
        for (int i = 0; i < d; ++i) {
            z[i] = base[i] + (t % 3) - 1;
            t /= 3;
        }
        Vec zeta = xi - z.cast<double>();
        if (zeta.cwiseAbs().maxCoeff() > reach) continue;
        double r = zeta.norm();
        double smin = r / (5.0625 * sqd), smax = 16.0 * r / (15.0 * sqd);
        int kmin = std::max(1, int(std::floor(-std::log2(smax))) - 1);
        int kmax = int(std::ceil(-std::log2(smin))) + 1;
        if (kmax > max_generation)
            throw Error("cubes_at: point " + fmt_vec(x) + " is too close to the lattice");
        for (int k = kmin; k <= kmax; ++k) {
            double s = std::ldexp(1.0, -k);
            long half = 1L << (k - 1);
            Idx lo(d), hi(d);
            bool empty = false;
            for (int i = 0; i < d; ++i) {
                double c = zeta[i] / s - 0.5;
                lo[i] = std::max(-half, long(std::ceil(c - 0.5625)));
                hi[i] = std::min(half - 1, long(std::floor(c + 0.5625)));
                if (lo[i] > hi[i]) empty = true;
            }
            if (empty) continue;
            Idx a = lo;
            while (true) {
                if (selected(a, k)) {
                    double w = 1;
                    for (int i = 0; i < d && w > 0; ++i) w *= bump1((zeta[i] - (a[i] + 0.5) * s) / s);
                    if (w > 0) {
                        WhitneyCube c;
                        c.generation = k;
                        c.anchor = z;
                        c.corner = a;
                        c.side = s * h;
                        c.h = h;
                        c.center = (z.cast<double>() + (a.cast<double>().array() + 0.5).matrix() * s) * h;
                        cov.cubes.push_back(c);
                        cov.weights.push_back(w);
                        total += w;
                    }
                }
                int i = 0;
                while (i < d && a[i] == hi[i]) {
                    a[i] = lo[i];
                    ++i;
                }
                if (i == d) break;
                ++a[i];
            }
        }
    }
    if (!(total > 0)) throw Error("cubes_at: empty cover at " + fmt_vec(x));
    for (double& w : cov.weights) w /= total;
    return cov;
}

inline CubeCover cubes_at(const Vec& x, const DyadicGrid& g) { return cubes_at(x, g.spacing()); }

// Weight of one particular cube at x (0 if it is not active there).
inline double partition_weight(const WhitneyCube& c, const Vec& x) {
    CubeCover cov = cubes_at(x, c.h);
    if (cov.on_lattice) return 0.0;
    for (std::size_t i = 0; i < cov.cubes.size(); ++i)
        if (cov.cubes[i].same_as(c)) return cov.weights[i];
    return 0.0;
}

// max over samples and active cubes of |grad^i phi_k(x)| * diam(Q_k)^i, by finite differences
inline double partition_gradient_bound(const DyadicGrid& g, int order, int samples, std::uint64_t seed = 1) {
    require(order == 1 || order == 2, "partition_gradient_bound: order must be 1 or 2");
    require(samples >= 1, "partition_gradient_bound: need samples");
    Rng rng(seed);
    int d = g.dim();
    double h = g.spacing();
    double best = 0;
    for (int s = 0; s < samples; ++s) {
        Vec x = rng.uniform_vec(d, -h, h);
        CubeCover cov = cubes_at(x, h);
        if (cov.on_lattice) continue;
        for (const auto& c : cov.cubes) {
            double e = c.side * 1e-4;
            double val = 0;
            if (order == 1) {
                double n2 = 0;
                for (int k = 0; k < d; ++k) {
                    Vec a = x, b = x;
                    a[k] += e;
                    b[k] -= e;
                    double gk = (partition_weight(c, a) - partition_weight(c, b)) / (2 * e);
                    n2 += gk * gk;
                }
                val = std::sqrt(n2) * c.diam();
            } else {
                double n2 = 0;
                for (int k = 0; k < d; ++k) {
                    for (int l = 0; l < d; ++l) {
                        Vec pp = x, pm = x, mp = x, mm = x;
                        pp[k] += e; pp[l] += e;
                        pm[k] += e; pm[l] -= e;
                        mp[k] -= e; mp[l] += e;
                        mm[k] -= e; mm[l] -= e;
                        double hk = (partition_weight(c, pp) - partition_weight(c, pm) -
                                     partition_weight(c, mp) + partition_weight(c, mm)) /
                                    (4 * e * e);
                        n2 += hk * hk;
                    }
                }
                val = std::sqrt(n2) * c.diam() * c.diam();
            }
            best = std::max(best, val);
        }
    }
    return best;
}

// CSV dump: generation, center..., side, yhat...
inline void write_cubes_csv(std::ostream& os, const std::vector<WhitneyCube>& cubes) {
    if (cubes.empty()) return;
    int d = int(cubes.front().center.size());
    os << "generation";
    for (int i = 0; i < d; ++i) os << ",c" << i + 1;
    os << ",side";
    for (int i = 0; i < d; ++i) os << ",yhat" << i + 1;
    os << "\n";
    os.precision(17);
    for (const auto& c : cubes) {
        os << c.generation;
        for (int i = 0; i < d; ++i) os << "," << c.center[i];
        os << "," << c.side;
        Vec y = c.anchor_point();
        for (int i = 0; i < d; ++i) os << "," << y[i];
        os << "\n";
    }
}

}  // namespace lmm
