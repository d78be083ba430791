#pragma once

#include <cmath>
#include <functional>
#include <limits>

#include "gllab/gl.hpp"
#include "gllab/norms.hpp"

namespace gllab {

// Pieces of the integration-by-parts identity for one (psi, A, B).
struct IbpTerms {
    double lhs = 0.0;         // sum_{j,k} |D_j D_k psi|_2^2
    double curl2_psi2 = 0.0;  // int (curl A)^2 |psi|^2
    double laplacian2 = 0.0;  // int |H psi|^2
    double cross = 0.0;       // int curl A Im(D_1 psi conj(D_2 psi))
    double B = 0.0;

    double rhs() const { return B * B * curl2_psi2 + laplacian2 + 2.0 * B * cross; }
};

/**
 * Discrete terms. D_jD_j and H psi live at the nodes (trapezoid weights);
 * D_1D_2, D_2D_1 and the curl terms live at the cells. The cross term
 * averages the four cell corners, each using the two cell edges leaving that
 * corner, transported into the corner's frame.
 */
inline IbpTerms ibp_terms(const Grid& g, const ComplexField& psi, const EdgeField& a, double B) {
    const CovariantHessian hs = covariant_hessian(g, psi, a, B);
    const CellField curl = discrete_curl(g, a);
    const EdgeComplexField d = covariant_diff(g, psi, a, B);
    IbpTerms t;
    t.B = B;
    for (int j = 0; j <= g.ny(); ++j) {
        for (int i = 0; i <= g.nx(); ++i) {
            const double w = g.node_weight(i, j);
            t.lhs += w * (std::norm(hs.d11(i, j)) + std::norm(hs.d22(i, j)));
            t.laplacian2 += w * std::norm(hs.d11(i, j) + hs.d22(i, j));
        }
    }
    const double area = g.cell_area();
    for (int j = 0; j < g.ny(); ++j) {
        for (int i = 0; i < g.nx(); ++i) {
            t.lhs += area * (std::norm(hs.d12(i, j)) + std::norm(hs.d21(i, j)));
            const double m2 = 0.25 * (std::norm(psi(i, j)) + std::norm(psi(i + 1, j)) + std::norm(psi(i, j + 1)) +
                                      std::norm(psi(i + 1, j + 1)));
            t.curl2_psi2 += area * curl(i, j) * curl(i, j) * m2;
            const cplx ubx = std::conj(link(B, a.x(i, j), g.hx()));
            const cplx utx = std::conj(link(B, a.x(i, j + 1), g.hx()));
            const cplx uly = std::conj(link(B, a.y(i, j), g.hy()));
            const cplx ury = std::conj(link(B, a.y(i + 1, j), g.hy()));
            const cplx bot = d.x(i, j);
            const cplx top = d.x(i, j + 1);
            const cplx lef = d.y(i, j);
            const cplx rig = d.y(i + 1, j);
            const double im = (bot * std::conj(lef)).imag() + (ubx * bot * std::conj(rig)).imag() +
                              (top * std::conj(uly * lef)).imag() + (utx * top * std::conj(ury * rig)).imag();
            t.cross += area * curl(i, j) * 0.25 * im;
        }
    }
    return t;
}

struct IbpGap {
    double gap = 0.0;
    IbpTerms terms;
    bool degenerate = false;   // psi == 0
    bool bc_gated = false;     // Neumann residual too large for a verdict
};

/**
 * |LHS - RHS| / max(LHS, RHS, eps). `bc_limit` gates the verdict on the
 * discrete magnetic Neumann residual of the state.
 */
inline IbpGap ibp_identity_gap(const GLState& s, double bc_limit = std::numeric_limits<double>::infinity()) {
    s.validate();
    IbpGap r;
    double sup = 0.0;
    for (const cplx& v : s.psi.values()) sup = std::max(sup, std::abs(v));
    if (sup == 0.0) {
        r.degenerate = true;
        return r;
    }
    r.terms = ibp_terms(s.grid, s.psi, s.a, s.B());
    const double lhs = r.terms.lhs;
    const double rhs = r.terms.rhs();
    r.gap = std::abs(lhs - rhs) / std::max({lhs, rhs, 1e-300});
    if (std::isfinite(bc_limit)) r.bc_gated = residuals(s).r_bc_psi > bc_limit;
    return r;
}

// |D psi| at cell centres from the squared edge values of the four cell edges.
inline CellField covariant_modulus(const Grid& g, const ComplexField& psi, const EdgeField& a, double B) {
    const EdgeComplexField d = covariant_diff(g, psi, a, B);
    CellField m = g.cell_field();
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i)
            m(i, j) = std::sqrt(0.5 * (std::norm(d.x(i, j)) + std::norm(d.x(i, j + 1))) +
                                0.5 * (std::norm(d.y(i, j)) + std::norm(d.y(i + 1, j))));
    return m;
}

struct LemmaRatio {
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
};

inline double conjugate_exponent(double p) {
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    if (std::isinf(p)) return 1.0;
    return p / (p - 1.0);
}

/**
 * LHS = sum |D_j D_k psi|^2,
 * RHS = 3 B^2 |psi|_2^2 + 2 |H psi|_2^2 + 2 B^2 |curl A - 1|_{2 p1}^2 |psi|_{2 q1}^2
 *       + 2 B |curl A - 1|_{p2} |D psi|_{2 q2}^2.
 */
inline LemmaRatio lemma_intparts_ratio(const GLState& s, double p1, double p2) {
    s.validate();
    if (!(p1 >= 1.0) || !(p2 >= 1.0)) throw SpecError("lemma_intparts_ratio: exponents must lie in [1, inf]");
    const Grid& g = s.grid;
    const double B = s.B();
    const IbpTerms t = ibp_terms(g, s.psi, s.a, B);
    CellField c = discrete_curl(g, s.a);
    for (auto& v : c.values()) v -= 1.0;
    const CellField dm = covariant_modulus(g, s.psi, s.a, B);
    const double q1 = conjugate_exponent(p1);
    const double q2 = conjugate_exponent(p2);
    const double psi2 = norm(g, s.psi, NormSpec::lp(2.0));
    const double c1 = norm(g, c, NormSpec::lp(2.0 * p1));
    const double psiq = norm(g, s.psi, NormSpec::lp(2.0 * q1));
    const double c2 = norm(g, c, NormSpec::lp(p2));
    const double dq = norm(g, dm, NormSpec::lp(2.0 * q2));
    LemmaRatio r;
    r.lhs = t.lhs;
    r.rhs = 3.0 * B * B * psi2 * psi2 + 2.0 * t.laplacian2 + 2.0 * B * B * c1 * c1 * psiq * psiq +
            2.0 * B * c2 * dq * dq;
    r.ratio = r.rhs > 0.0 ? r.lhs / r.rhs : 0.0;
    return r;
}

// ---------------------------------------------------------------------------
// Boundary chart and the curl transformation
// ---------------------------------------------------------------------------

using VectorFunction = std::function<Point(Point)>;

/**
 * Arc-length chart of a circle of radius r0 through the origin with
 * gamma'(0) = e1 and inward normal nu(0) = e2:
 *     gamma(s) = (r0 sin(s/r0), r0 (1 - cos(s/r0))),  Phi(s, t) = gamma(s) + t nu(s).
 * r0 = infinity gives the flat chart Phi(s, t) = (s, t).
 */
struct CircularChart {
    double r0 = std::numeric_limits<double>::infinity();

    double curvature() const { return std::isinf(r0) ? 0.0 : 1.0 / r0; }
    Point gamma_prime(double s) const {
        if (std::isinf(r0)) return {1.0, 0.0};
        return {std::cos(s / r0), std::sin(s / r0)};
    }
    Point normal(double s) const {
        if (std::isinf(r0)) return {0.0, 1.0};
        return {-std::sin(s / r0), std::cos(s / r0)};
    }
    Point map(double s, double t) const {
        if (std::isinf(r0)) return {s, t};
        const Point n = normal(s);
        return {r0 * std::sin(s / r0) + t * n.x, r0 * (1.0 - std::cos(s / r0)) + t * n.y};
    }
    // (DPhi)^T (A o Phi): tilde A_1 = (1 - t k) gamma' . A, tilde A_2 = nu . A.
    Point pullback(const VectorFunction& a, double s, double t) const {
        const Point v = a(map(s, t));
        const Point tg = gamma_prime(s);
        const Point n = normal(s);
        return {(1.0 - t * curvature()) * (tg.x * v.x + tg.y * v.y), n.x * v.x + n.y * v.y};
    }
};

struct CurlTransformResult {
    double max_deviation = 0.0;
    int samples = 0;
};

/**
 * Max over the (s, t) grid of |curl_{s,t} tilde A - (1 - t k) curl A o Phi|,
 * both curls by centred differences with step h (in (s, t) and in (x, y)).
 */
inline CurlTransformResult curl_transform_check(double r0, double t_max, const VectorFunction& a, double h,
                                                double s_extent = 1.0) {
    if (!(t_max > 0.0)) throw SpecError("curl_transform_check: t_max must be positive");
    if (!(t_max < r0)) throw ChartError("curl_transform_check: t_max must be below the boundary radius");
    if (!(h > 0.0) || !(s_extent > 0.0)) throw SpecError("curl_transform_check: h and s_extent must be positive");
    if (!std::isinf(r0) && s_extent >= M_PI * r0) throw ChartError("curl_transform_check: chart not injective");
    const CircularChart ch{r0};
    auto curl_xy = [&](Point p) {
        const double d2x = (a({p.x + h, p.y}).y - a({p.x - h, p.y}).y) / (2.0 * h);
        const double d1y = (a({p.x, p.y + h}).x - a({p.x, p.y - h}).x) / (2.0 * h);
        return d2x - d1y;
    };
    CurlTransformResult r;
    const int ns = static_cast<int>(std::lround(s_extent / h));
    const int nt = static_cast<int>(std::lround(t_max / h));
    for (int jt = 0; jt <= nt; ++jt) {
        const double t = jt * h;
        for (int is = -ns; is <= ns; ++is) {
            const double s = is * h;
            const double lhs = (ch.pullback(a, s + h, t).y - ch.pullback(a, s - h, t).y) / (2.0 * h) -
                               (ch.pullback(a, s, t + h).x - ch.pullback(a, s, t - h).x) / (2.0 * h);
            const double rhs = (1.0 - t * ch.curvature()) * curl_xy(ch.map(s, t));
            r.max_deviation = std::max(r.max_deviation, std::abs(lhs - rhs));
            ++r.samples;
        }
    }
    return r;
}

}  // namespace gllab
