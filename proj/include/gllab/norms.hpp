#pragma once

// Discrete Lebesgue, Sobolev and Hoelder norms on the staggered grid.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "gllab/grid.hpp"

namespace gllab {

/**
 * Real samples on a regular lattice inside [0, lx] x [0, ly]. Along each axis
 * the samples either include both ends (node aligned, trapezoid weights) or
 * sit at cell midpoints (midpoint weights).
 */
struct Lattice {
    int ni = 0;
    int nj = 0;
    double x0 = 0.0;
    double y0 = 0.0;
    double hx = 1.0;
    double hy = 1.0;
    double lx = 1.0;
    double ly = 1.0;
    bool node_x = true;
    bool node_y = true;
    std::vector<double> v;

    double& operator()(int i, int j) { return v[static_cast<std::size_t>(i) + static_cast<std::size_t>(ni) * j]; }
    double operator()(int i, int j) const { return v[static_cast<std::size_t>(i) + static_cast<std::size_t>(ni) * j]; }
    Point pos(int i, int j) const { return {x0 + i * hx, y0 + j * hy}; }

    double weight(int i, int j) const {
        double w = hx * hy;
        if (node_x && (i == 0 || i == ni - 1)) w *= 0.5;
        if (node_y && (j == 0 || j == nj - 1)) w *= 0.5;
        return w;
    }

    // Same placement, new values.
    Lattice like(int ni_, int nj_, double x0_, double y0_, bool nx_, bool ny_) const {
        Lattice o = *this;
        o.ni = ni_;
        o.nj = nj_;
        o.x0 = x0_;
        o.y0 = y0_;
        o.node_x = nx_;
        o.node_y = ny_;
        o.v.assign(static_cast<std::size_t>(ni_) * nj_, 0.0);
        return o;
    }
};

inline Lattice lattice_of(const Grid& g, const Array2<double>& f, double x0, double y0, bool nx, bool ny) {
    Lattice l;
    l.ni = f.ni();
    l.nj = f.nj();
    l.x0 = x0;
    l.y0 = y0;
    l.hx = g.hx();
    l.hy = g.hy();
    l.lx = g.lx();
    l.ly = g.ly();
    l.node_x = nx;
    l.node_y = ny;
    l.v = f.values();
    return l;
}

inline Lattice lattice(const Grid& g, const NodeField& f) {
    require_nodes(g, f, "lattice");
    return lattice_of(g, f, 0.0, 0.0, true, true);
}
inline Lattice lattice(const Grid& g, const CellField& f) {
    require_cells(g, f, "lattice");
    return lattice_of(g, f, 0.5 * g.hx(), 0.5 * g.hy(), false, false);
}
inline Lattice lattice(const Grid& g, const XEdgeField& f) {
    if (f.ni() != g.nx() || f.nj() != g.ny() + 1) throw DimensionError("lattice: x-edge shape");
    return lattice_of(g, f, 0.5 * g.hx(), 0.0, false, true);
}
inline Lattice lattice(const Grid& g, const YEdgeField& f) {
    if (f.ni() != g.nx() + 1 || f.nj() != g.ny()) throw DimensionError("lattice: y-edge shape");
    return lattice_of(g, f, 0.0, 0.5 * g.hy(), true, false);
}
// |psi| at the nodes.
inline Lattice modulus_lattice(const Grid& g, const ComplexField& f) {
    require_nodes(g, f, "lattice");
    NodeField m = g.node_field();
    for (std::size_t k = 0; k < f.size(); ++k) m[k] = std::abs(f[k]);
    return lattice_of(g, m, 0.0, 0.0, true, true);
}

enum class NormKind { Lp, W1p, W2p, sup, C1, C2, Cn_alpha };

struct NormSpec {
    NormKind kind = NormKind::Lp;
    double p = 2.0;  // infinity allowed
    int n = 0;
    double alpha = 0.5;
    bool corner_exclusion = false;
    // Hoelder pair scan: exhaustive up to this many lattice points, sampled above.
    std::size_t exhaustive_limit = 129 * 129;
    std::size_t sample_pairs = 1000000;
    std::uint64_t sample_seed = 12345;

    void validate() const {
        const bool needs_p = kind == NormKind::Lp || kind == NormKind::W1p || kind == NormKind::W2p;
        if (needs_p && !(p >= 1.0)) throw SpecError("NormSpec: p must lie in [1, inf]");
        if (kind == NormKind::Cn_alpha) {
            if (!(alpha > 0.0 && alpha < 1.0)) throw SpecError("NormSpec: alpha must lie in (0, 1)");
            if (n < 0 || n > 2) throw SpecError("NormSpec: n must be 0, 1 or 2");
        }
    }

    static NormSpec lp(double p) { return {NormKind::Lp, p}; }
    static NormSpec w1p(double p) { return {NormKind::W1p, p}; }
    static NormSpec w2p(double p) { return {NormKind::W2p, p}; }
    static NormSpec sup() { return {NormKind::sup}; }
    static NormSpec c1() { return {NormKind::C1}; }
    static NormSpec c2() { return {NormKind::C2}; }
    static NormSpec holder(int n, double alpha) {
        NormSpec s{NormKind::Cn_alpha};
        s.n = n;
        s.alpha = alpha;
        return s;
    }
};

namespace detail {

inline bool near_corner(const Lattice& l, Point p) {
    const double r = 4.0 * std::max(l.hx, l.hy);
    const double xs[2] = {0.0, l.lx};
    const double ys[2] = {0.0, l.ly};
    for (double cx : xs)
        for (double cy : ys)
            if (std::hypot(p.x - cx, p.y - cy) < r) return true;
    return false;
}

inline std::vector<unsigned char> mask(const Lattice& l, bool exclude) {
    std::vector<unsigned char> m(l.v.size(), 1);
    if (!exclude) return m;
    for (int j = 0; j < l.nj; ++j)
        for (int i = 0; i < l.ni; ++i)
            if (near_corner(l, l.pos(i, j))) m[static_cast<std::size_t>(i) + static_cast<std::size_t>(l.ni) * j] = 0;
    return m;
}

inline double lp(const Lattice& l, double p, bool exclude) {
    const auto m = mask(l, exclude);
    if (std::isinf(p)) {
        double s = 0.0;
        for (std::size_t k = 0; k < l.v.size(); ++k)
            if (m[k]) s = std::max(s, std::abs(l.v[k]));
        return s;
    }
    double s = 0.0;
    for (int j = 0; j < l.nj; ++j)
        for (int i = 0; i < l.ni; ++i)
            if (m[static_cast<std::size_t>(i) + static_cast<std::size_t>(l.ni) * j])
                s += l.weight(i, j) * std::pow(std::abs(l(i, j)), p);
    return std::pow(s, 1.0 / p);
}

// Forward differences; the result sits at midpoints along `axis`.
inline Lattice forward_diff(const Lattice& l, int axis) {
    if (axis == 1) {
        if (l.ni < 2) throw DimensionError("forward_diff: too few samples");
        Lattice o = l.like(l.ni - 1, l.nj, l.x0 + 0.5 * l.hx, l.y0, false, l.node_y);
        for (int j = 0; j < l.nj; ++j)
            for (int i = 0; i + 1 < l.ni; ++i) o(i, j) = (l(i + 1, j) - l(i, j)) / l.hx;
        return o;
    }
    if (l.nj < 2) throw DimensionError("forward_diff: too few samples");
    Lattice o = l.like(l.ni, l.nj - 1, l.x0, l.y0 + 0.5 * l.hy, l.node_x, false);
    for (int j = 0; j + 1 < l.nj; ++j)
        for (int i = 0; i < l.ni; ++i) o(i, j) = (l(i, j + 1) - l(i, j)) / l.hy;
    return o;
}

// Centred second differences at interior samples along `axis`.
inline Lattice second_diff(const Lattice& l, int axis) {
    if (axis == 1) {
        if (l.ni < 3) throw DimensionError("second_diff: too few samples");
        Lattice o = l.like(l.ni - 2, l.nj, l.x0 + l.hx, l.y0, false, l.node_y);
        for (int j = 0; j < l.nj; ++j)
            for (int i = 1; i + 1 < l.ni; ++i) o(i - 1, j) = (l(i + 1, j) - 2.0 * l(i, j) + l(i - 1, j)) / (l.hx * l.hx);
        return o;
    }
    if (l.nj < 3) throw DimensionError("second_diff: too few samples");
    Lattice o = l.like(l.ni, l.nj - 2, l.x0, l.y0 + l.hy, l.node_x, false);
    for (int j = 1; j + 1 < l.nj; ++j)
        for (int i = 0; i < l.ni; ++i) o(i, j - 1) = (l(i, j + 1) - 2.0 * l(i, j) + l(i, j - 1)) / (l.hy * l.hy);
    return o;
}

// Centred differences in place (same samples), one-sided at the ends.
inline Lattice centered_diff(const Lattice& l, int axis) {
    Lattice o = l;
    if (axis == 1) {
        if (l.ni < 2) throw DimensionError("centered_diff: too few samples");
        for (int j = 0; j < l.nj; ++j) {
            for (int i = 0; i < l.ni; ++i) {
                const int a = std::max(i - 1, 0);
                const int b = std::min(i + 1, l.ni - 1);
                o(i, j) = (l(b, j) - l(a, j)) / ((b - a) * l.hx);
            }
        }
    } else {
        if (l.nj < 2) throw DimensionError("centered_diff: too few samples");
        for (int j = 0; j < l.nj; ++j) {
            const int a = std::max(j - 1, 0);
            const int b = std::min(j + 1, l.nj - 1);
            for (int i = 0; i < l.ni; ++i) o(i, j) = (l(i, b) - l(i, a)) / ((b - a) * l.hy);
        }
    }
    return o;
}

// All partial derivatives of order exactly n (n <= 2), centred differences.
inline std::vector<Lattice> derivatives(const Lattice& l, int n) {
    if (n == 0) return {l};
    const Lattice d1 = centered_diff(l, 1);
    const Lattice d2 = centered_diff(l, 2);
    if (n == 1) return {d1, d2};
    return {centered_diff(d1, 1), centered_diff(d1, 2), centered_diff(d2, 2)};
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/**
 * max |f(x) - f(y)| / |x - y|^alpha over pairs of lattice samples.
 * Exhaustive scans loop over offsets with a precomputed |d|^-alpha table.
 * Sampled scans take every nearest-neighbour pair plus counter-hashed random
 * pairs, so the result does not depend on evaluation order.
 */
inline double holder_seminorm(const Lattice& l, double alpha, bool exclude, std::size_t exhaustive_limit,
                              std::size_t sample_pairs, std::uint64_t seed) {
    const auto m = mask(l, exclude);
    const int ni = l.ni;
    const int nj = l.nj;
    auto idx = [ni](int i, int j) { return static_cast<std::size_t>(i) + static_cast<std::size_t>(ni) * j; };
    double best = 0.0;
    auto consider = [&](int i1, int j1, int i2, int j2, double inv) {
        const std::size_t a = idx(i1, j1);
        const std::size_t b = idx(i2, j2);
        if (!m[a] || !m[b]) return;
        best = std::max(best, std::abs(l.v[a] - l.v[b]) * inv);
    };
    if (l.v.size() <= exhaustive_limit) {
        // Offsets (di, dj) with dj > 0, or dj == 0 and di > 0.
        for (int dj = 0; dj < nj; ++dj) {
            for (int di = (dj == 0 ? 1 : -(ni - 1)); di < ni; ++di) {
                const double inv = std::pow(std::hypot(di * l.hx, dj * l.hy), -alpha);
                const int i_lo = std::max(0, -di);
                const int i_hi = std::min(ni, ni - di);
                for (int j = 0; j + dj < nj; ++j) {
                    const double* r1 = l.v.data() + idx(0, j);
                    const double* r2 = l.v.data() + idx(0, j + dj);
                    const unsigned char* m1 = m.data() + idx(0, j);
                    const unsigned char* m2 = m.data() + idx(0, j + dj);
                    double row = 0.0;
                    for (int i = i_lo; i < i_hi; ++i)
                        if (m1[i] && m2[i + di]) row = std::max(row, std::abs(r1[i] - r2[i + di]));
                    best = std::max(best, row * inv);
                }
            }
        }
        return best;
    }
    const double ix = std::pow(l.hx, -alpha);
    const double iy = std::pow(l.hy, -alpha);
    const double idg = std::pow(std::hypot(l.hx, l.hy), -alpha);
    for (int j = 0; j < nj; ++j) {
        for (int i = 0; i < ni; ++i) {
            if (i + 1 < ni) consider(i, j, i + 1, j, ix);
            if (j + 1 < nj) consider(i, j, i, j + 1, iy);
            if (i + 1 < ni && j + 1 < nj) consider(i, j, i + 1, j + 1, idg);
            if (i > 0 && j + 1 < nj) consider(i, j, i - 1, j + 1, idg);
        }
    }
    const std::uint64_t total = static_cast<std::uint64_t>(l.v.size());
    for (std::uint64_t k = 0; k < sample_pairs; ++k) {
        const std::uint64_t r1 = splitmix64(seed ^ (2 * k));
        const std::uint64_t r2 = splitmix64(seed ^ (2 * k + 1));
        const std::size_t a = r1 % total;
        const std::size_t b = r2 % total;
        if (a == b) continue;
        const int i1 = static_cast<int>(a % ni), j1 = static_cast<int>(a / ni);
        const int i2 = static_cast<int>(b % ni), j2 = static_cast<int>(b / ni);
        consider(i1, j1, i2, j2, std::pow(std::hypot((i1 - i2) * l.hx, (j1 - j2) * l.hy), -alpha));
    }
    return best;
}

}  // namespace detail

/**
 * Norm of real lattice data.
 *   Lp     quadrature (trapezoid on node-aligned axes, midpoint otherwise)
 *   W1p    (|f|_p^p + |D1 f|_p^p + |D2 f|_p^p)^(1/p), forward differences
 *   W2p    adds D11, D22 (centred second differences) and D12 (forward)
 *   sup, C1, C2   sums of sup norms of derivatives up to order 0, 1, 2
 *   Cn_alpha      C^n part plus the Hoelder seminorms of all order-n derivatives
 */
inline double norm(const Lattice& l, const NormSpec& s) {
    s.validate();
    const bool ex = s.corner_exclusion;
    switch (s.kind) {
        case NormKind::Lp:
            return detail::lp(l, s.p, ex);
        case NormKind::sup:
            return detail::lp(l, std::numeric_limits<double>::infinity(), ex);
        case NormKind::W1p:
        case NormKind::W2p: {
            std::vector<Lattice> parts{l, detail::forward_diff(l, 1), detail::forward_diff(l, 2)};
            if (s.kind == NormKind::W2p) {
                parts.push_back(detail::second_diff(l, 1));
                parts.push_back(detail::forward_diff(detail::forward_diff(l, 1), 2));
                parts.push_back(detail::second_diff(l, 2));
            }
            if (std::isinf(s.p)) {
                double m = 0.0;
                for (const auto& q : parts) m = std::max(m, detail::lp(q, s.p, ex));
                return m;
            }
            double sum = 0.0;
            for (const auto& q : parts) sum += std::pow(detail::lp(q, s.p, ex), s.p);
            return std::pow(sum, 1.0 / s.p);
        }
        case NormKind::C1:
        case NormKind::C2:
        case NormKind::Cn_alpha: {
            const int order = s.kind == NormKind::C1 ? 1 : s.kind == NormKind::C2 ? 2 : s.n;
            double total = 0.0;
            for (int k = 0; k <= order; ++k)
                for (const auto& d : detail::derivatives(l, k))
                    total += detail::lp(d, std::numeric_limits<double>::infinity(), ex);
            if (s.kind == NormKind::Cn_alpha)
                for (const auto& d : detail::derivatives(l, order))
                    total += detail::holder_seminorm(d, s.alpha, ex, s.exhaustive_limit, s.sample_pairs, s.sample_seed);
            return total;
        }
    }
    return 0.0;
}

// Hoelder seminorm alone (no sup terms) of the order-n derivatives.
inline double holder_seminorm(const Lattice& l, const NormSpec& s) {
    s.validate();
    double total = 0.0;
    for (const auto& d : detail::derivatives(l, s.n))
        total += detail::holder_seminorm(d, s.alpha, s.corner_exclusion, s.exhaustive_limit, s.sample_pairs,
                                         s.sample_seed);
    return total;
}

inline double norm(const Grid& g, const NodeField& f, const NormSpec& s) { return norm(lattice(g, f), s); }
inline double norm(const Grid& g, const CellField& f, const NormSpec& s) { return norm(lattice(g, f), s); }
// Complex data: norms of the modulus for Lp and sup; derivative norms act on
// real and imaginary parts separately and add.
inline double norm(const Grid& g, const ComplexField& f, const NormSpec& s) {
    if (s.kind == NormKind::Lp || s.kind == NormKind::sup) return norm(modulus_lattice(g, f), s);
    NodeField re = g.node_field();
    NodeField im = g.node_field();
    for (std::size_t k = 0; k < f.size(); ++k) {
        re[k] = f[k].real();
        im[k] = f[k].imag();
    }
    return norm(lattice(g, re), s) + norm(lattice(g, im), s);
}
// Vector fields on edges: the two components add.
inline double norm(const Grid& g, const EdgeField& a, const NormSpec& s) {
    require_edges(g, a, "norm");
    return norm(lattice(g, a.x), s) + norm(lattice(g, a.y), s);
}

struct ArgmaxResult {
    int i = 0;
    int j = 0;
    Point point;
    double value = 0.0;
    double distance = 0.0;
};

// Node of largest |psi|; ties go to the lexicographically smallest (i, j).
inline ArgmaxResult argmax_distance(const Grid& g, const ComplexField& psi) {
    require_nodes(g, psi, "argmax_distance");
    ArgmaxResult r;
    double best = -1.0;
    for (int i = 0; i <= g.nx(); ++i) {
        for (int j = 0; j <= g.ny(); ++j) {
            const double v = std::abs(psi(i, j));
            if (v > best) {
                best = v;
                r.i = i;
                r.j = j;
            }
        }
    }
    if (!(best > 0.0)) throw DegenerateInputError("argmax_distance: psi vanishes identically");
    r.point = g.node(r.i, r.j);
    r.value = best;
    r.distance = g.distance_to_boundary(r.point);
    return r;
}

}  // namespace gllab
