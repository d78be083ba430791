#pragma once

#include <array>
#include <cmath>
#include <string>

#include "gllab/gl.hpp"
#include "gllab/norms.hpp"

namespace gllab {

enum class BlowupCase { interior, boundary };

inline const char* to_string(BlowupCase c) { return c == BlowupCase::interior ? "interior" : "boundary"; }

// Interior iff sqrt(kappa H) dist(P, boundary) >= R + 1.
inline BlowupCase classify_point(const GLState& s, Point p, double R) {
    if (!s.grid.contains(p, 1e-12)) throw DomainError("classify_point: point outside the domain");
    if (!(R >= 0.0)) throw SpecError("classify_point: R must be non-negative");
    const double d = std::max(0.0, s.grid.distance_to_boundary(p));
    return std::sqrt(s.B()) * d >= R + 1.0 ? BlowupCase::interior : BlowupCase::boundary;
}

/**
 * Flat chart of one side of the rectangle: x = origin + s tangent + t normal,
 * with {tangent, normal} positively oriented and normal pointing inwards.
 */
struct BoundaryChart {
    Point origin;
    Point tangent{1.0, 0.0};
    Point normal{0.0, 1.0};
    double s_minus = 0.0;  // room along -tangent before the side ends
    double s_plus = 0.0;   // room along +tangent
    double t_max = 0.0;    // room along the normal before the opposite side

    Point map(double s, double t) const {
        return {origin.x + s * tangent.x + t * normal.x, origin.y + s * tangent.y + t * normal.y};
    }
    // Curvature is zero on a straight side, so the chart is an isometry.
    double curvature() const { return 0.0; }
};

// Chart of the side nearest to p (ties: left, right, bottom, top), origin at
// the projection of p.
inline BoundaryChart nearest_side_chart(const Grid& g, Point p) {
    const double d[4] = {p.x, g.lx() - p.x, p.y, g.ly() - p.y};
    int side = 0;
    for (int k = 1; k < 4; ++k)
        if (d[k] < d[side]) side = k;
    BoundaryChart c;
    switch (side) {
        case 0:
            c = {{0.0, p.y}, {0.0, -1.0}, {1.0, 0.0}, g.ly() - p.y, p.y, g.lx()};
            break;
        case 1:
            c = {{g.lx(), p.y}, {0.0, 1.0}, {-1.0, 0.0}, p.y, g.ly() - p.y, g.lx()};
            break;
        case 2:
            c = {{p.x, 0.0}, {1.0, 0.0}, {0.0, 1.0}, p.x, g.lx() - p.x, g.ly()};
            break;
        default:
            c = {{p.x, g.ly()}, {-1.0, 0.0}, {0.0, -1.0}, g.lx() - p.x, p.x, g.ly()};
            break;
    }
    return c;
}

/**
 * Rescaled data around a blow-up point, in frame coordinates
 * zeta = sqrt(kappa H) (chart coordinates). Frame node (i, j) sits at
 * zeta = (sigma0 + i hx, tau0 + j hy).
 */
struct BlowupFrame {
    Point P;
    BlowupCase kind = BlowupCase::interior;
    BoundaryChart chart;           // chart origin is P in the interior case
    double S = 0.0;                // sup |psi|
    double Lambda = 0.0;           // kappa / H
    double R = 0.0;
    double B = 0.0;                // kappa H
    Point z;                       // frame coordinates of P
    Grid grid;                     // frame grid
    double sigma0 = 0.0;
    double tau0 = 0.0;
    ComplexField phi;
    EdgeField a;                   // rescaled potential on frame edges
    EdgeField f_lin;               // linearised field J zeta on frame edges
    std::array<double, 4> J{};     // D tilde A at the chart origin, row-major
    SideConditions sides;          // Neumann on frame sides lying on the domain boundary
    int center_i = 0;
    int center_j = 0;

    Point zeta(int i, int j) const { return {sigma0 + i * grid.hx(), tau0 + j * grid.hy()}; }
};

namespace detail {

// Derivative of f along direction u at p with step h; centred when both
// neighbours lie in the domain, one-sided second order otherwise.
template <class Fn>
double directional_derivative(const Grid& g, Fn f, Point p, Point u, double h) {
    auto at = [&](double s) { return f(Point{p.x + s * u.x, p.y + s * u.y}); };
    auto inside = [&](double s) { return g.contains({p.x + s * u.x, p.y + s * u.y}, 1e-12); };
    if (inside(h) && inside(-h)) return (at(h) - at(-h)) / (2.0 * h);
    if (inside(2.0 * h)) return (-3.0 * at(0.0) + 4.0 * at(h) - at(2.0 * h)) / (2.0 * h);
    if (inside(-2.0 * h)) return (3.0 * at(0.0) - 4.0 * at(-h) + at(-2.0 * h)) / (2.0 * h);
    throw ChartError("blowup: domain too small for differencing");
}

}  // namespace detail

/**
 * phi(zeta) = S^-1 exp(i B A0 . (x - Q)) psi(x),   x = Q + (zeta_1 tangent + zeta_2 normal) / sqrt(B),
 * a(zeta)   = sqrt(B) (tilde A(x) - tilde A(Q)),   tilde A = (tangent . A, normal . A),
 * where Q is the chart origin and A0 = A(Q) (its tangential part on a side).
 * psi is interpolated after removing the phase exp(-i B A0 . x), so the
 * frame sees the slowly varying part. When P is a solver node that lands on a
 * frame node, |phi| there is |psi(P)| / S exactly. The boundary frame is clipped where the
 * side ends; a clipped frame side that lands on the domain boundary is
 * Neumann in the limit residual.
 */
inline BlowupFrame rescale(const GLState& s, Point P, double R, double points_per_unit = 8.0) {
    s.validate();
    if (!(R > 0.0)) throw SpecError("rescale: R must be positive");
    if (!(points_per_unit >= 1.0)) throw SpecError("rescale: frame resolution too coarse");
    const Grid& g = s.grid;
    if (!g.contains(P, 1e-12)) throw DomainError("rescale: point outside the domain");
    double S = 0.0;
    for (const cplx& v : s.psi.values()) S = std::max(S, std::abs(v));
    if (S == 0.0) throw DegenerateInputError("rescale: psi vanishes identically");

    const double B = s.B();
    const double sb = std::sqrt(B);
    const double hf = 1.0 / points_per_unit;
    const int K = static_cast<int>(std::ceil(R * points_per_unit - 1e-9));

    BlowupFrame f{P, classify_point(s, P, R), {}, S, s.kappa / s.H, R, B, {}, Grid::square(4), 0.0, 0.0,
                  g.complex_field(), g.edge_field(), g.edge_field(), {}, SideConditions::all_dirichlet(), 0, 0};
    double hy = hf;
    int ny = 0, nx = 0;
    if (f.kind == BlowupCase::interior) {
        f.chart = {P, {1.0, 0.0}, {0.0, 1.0}, P.x, g.lx() - P.x, g.ly() - P.y};
        f.sigma0 = f.tau0 = -K * hf;
        nx = ny = 2 * K;
        f.center_i = f.center_j = K;
        if (P.x - K * hf / sb < -1e-12 || P.x + K * hf / sb > g.lx() + 1e-12 || P.y - K * hf / sb < -1e-12 ||
            P.y + K * hf / sb > g.ly() + 1e-12)
            throw ChartError("rescale: interior frame leaves the domain");
    } else {
        f.chart = nearest_side_chart(g, P);
        const BoundaryChart& c = f.chart;
        const double d = std::max(0.0, (P.x - c.origin.x) * c.normal.x + (P.y - c.origin.y) * c.normal.y);
        f.z = {0.0, sb * d};
        const int m = std::max(1, static_cast<int>(std::lround(f.z.y * points_per_unit)));
        hy = f.z.y > 0.0 ? f.z.y / m : hf;
        f.center_j = f.z.y > 0.0 ? m : 0;
        // Tangential extent, clipped at the side ends.
        const int km = std::min(K, static_cast<int>(std::floor(sb * c.s_minus / hf + 1e-9)));
        const int kp = std::min(K, static_cast<int>(std::floor(sb * c.s_plus / hf + 1e-9)));
        if (km + kp < 4) throw ChartError("rescale: side too short for the frame");
        f.sigma0 = -km * hf;
        f.center_i = km;
        nx = km + kp;
        f.tau0 = 0.0;
        const int up = static_cast<int>(std::ceil(R / hy - 1e-9));
        ny = std::min(f.center_j + up, static_cast<int>(std::floor(sb * c.t_max / hy + 1e-9)));
        if (ny < 4) throw ChartError("rescale: domain too thin for the frame");
        f.sides.bottom = Boundary::neumann;
        // Tangent of the chart runs along frame x; a frame side lies on the
        // boundary when the clip hit the side end exactly.
        auto meets = [&](double frame_len, double room) {
            return std::abs(frame_len - sb * room) <= 1e-9 * std::max(1.0, sb * room);
        };
        if (km < K && meets(km * hf, c.s_minus)) f.sides.left = Boundary::neumann;
        if (kp < K && meets(kp * hf, c.s_plus)) f.sides.right = Boundary::neumann;
        if (meets(ny * hy, c.t_max)) f.sides.top = Boundary::neumann;
    }
    f.grid = Grid(nx, ny, nx * hf, ny * hy);
    const Grid& fg = f.grid;
    const BoundaryChart& c = f.chart;
    auto phys = [&](Point z) { return c.map(z.x / sb, z.y / sb); };
    auto clamp_in = [&](Point x) {
        return Point{std::clamp(x.x, 0.0, g.lx()), std::clamp(x.y, 0.0, g.ly())};
    };

    Point a0 = interpolate(g, s.a, c.origin);
    if (f.kind == BlowupCase::boundary) {
        const double tan = a0.x * c.tangent.x + a0.y * c.tangent.y;
        a0 = {tan * c.tangent.x, tan * c.tangent.y};
    }
    auto tilde = [&](Point x) {
        const Point v = interpolate(g, s.a, clamp_in(x));
        return Point{v.x * c.tangent.x + v.y * c.tangent.y, v.x * c.normal.x + v.y * c.normal.y};
    };
    const Point t0 = tilde(c.origin);
    const Point t0n = f.kind == BlowupCase::boundary ? Point{t0.x, 0.0} : t0;

    // Demodulated bilinear interpolation of psi.
    f.phi = fg.complex_field();
    for (int j = 0; j <= fg.ny(); ++j) {
        for (int i = 0; i <= fg.nx(); ++i) {
            const Point x = clamp_in(phys(f.zeta(i, j)));
            const double u = x.x / g.hx(), v = x.y / g.hy();
            const int ci = std::min(static_cast<int>(std::floor(u)), g.nx() - 1);
            const int cj = std::min(static_cast<int>(std::floor(v)), g.ny() - 1);
            const double tx = u - ci, ty = v - cj;
            cplx acc = 0.0;
            for (int dj = 0; dj <= 1; ++dj) {
                for (int di = 0; di <= 1; ++di) {
                    const Point xn = g.node(ci + di, cj + dj);
                    const double w = (di ? tx : 1.0 - tx) * (dj ? ty : 1.0 - ty);
                    const double ph = B * (a0.x * (xn.x - c.origin.x) + a0.y * (xn.y - c.origin.y));
                    acc += w * std::polar(1.0, ph) * s.psi(ci + di, cj + dj);
                }
            }
            f.phi(i, j) = acc / S;
        }
    }
    f.a = fg.edge_field();
    for (int j = 0; j <= fg.ny(); ++j) {
        for (int i = 0; i < fg.nx(); ++i) {
            const Point zm{f.sigma0 + (i + 0.5) * fg.hx(), f.tau0 + j * fg.hy()};
            f.a.x(i, j) = sb * (tilde(phys(zm)).x - t0n.x);
        }
    }
    for (int j = 0; j < fg.ny(); ++j) {
        for (int i = 0; i <= fg.nx(); ++i) {
            const Point zm{f.sigma0 + i * fg.hx(), f.tau0 + (j + 0.5) * fg.hy()};
            f.a.y(i, j) = sb * (tilde(phys(zm)).y - t0n.y);
        }
    }

    // J = D tilde A at the chart origin (derivatives in chart coordinates).
    const double hd = std::min(g.hx(), g.hy());
    auto comp = [&](int k) { return [&, k](Point x) { const Point v = tilde(x); return k == 0 ? v.x : v.y; }; };
    f.J[0] = detail::directional_derivative(g, comp(0), c.origin, c.tangent, hd);
    f.J[1] = detail::directional_derivative(g, comp(0), c.origin, c.normal, hd);
    f.J[2] = f.kind == BlowupCase::boundary ? 0.0 : detail::directional_derivative(g, comp(1), c.origin, c.tangent, hd);
    f.J[3] = detail::directional_derivative(g, comp(1), c.origin, c.normal, hd);
    f.f_lin = fg.edge_field();
    for (int j = 0; j <= fg.ny(); ++j) {
        for (int i = 0; i < fg.nx(); ++i) {
            const Point zm{f.sigma0 + (i + 0.5) * fg.hx(), f.tau0 + j * fg.hy()};
            f.f_lin.x(i, j) = f.J[0] * zm.x + f.J[1] * zm.y;
        }
    }
    for (int j = 0; j < fg.ny(); ++j) {
        for (int i = 0; i <= fg.nx(); ++i) {
            const Point zm{f.sigma0 + i * fg.hx(), f.tau0 + (j + 0.5) * fg.hy()};
            f.f_lin.y(i, j) = f.J[2] * zm.x + f.J[3] * zm.y;
        }
    }
    return f;
}

// Mean plaquette curl of the rescaled potential on the frame.
inline double frame_mean_curl(const BlowupFrame& f) {
    const CellField c = discrete_curl(f.grid, f.a);
    double s = 0.0;
    for (double v : c.values()) s += v;
    return s / static_cast<double>(c.size());
}

/**
 * || (-i grad + F_lin)^2 phi - Lambda (1 - S^2 |phi|^2) phi ||_2 / ||phi||_2 over
 * the frame nodes not lying on an open frame side. Neumann frame sides use
 * the half-cell rule of the magnetic Laplacian.
 */
inline double limit_residual(const BlowupFrame& f) {
    const Grid& g = f.grid;
    double norm2 = 0.0;
    for (int j = 0; j <= g.ny(); ++j)
        for (int i = 0; i <= g.nx(); ++i) norm2 += g.node_weight(i, j) * std::norm(f.phi(i, j));
    if (!(norm2 > 0.0)) throw DegenerateInputError("limit_residual: phi vanishes on the frame");
    const ComplexField lap = magnetic_laplacian(g, f.phi, f.f_lin, 1.0);
    double r2 = 0.0;
    for (int j = 0; j <= g.ny(); ++j) {
        for (int i = 0; i <= g.nx(); ++i) {
            if (g.node_is_dirichlet(i, j, f.sides)) continue;
            const cplx p = f.phi(i, j);
            const cplx r = lap(i, j) - f.Lambda * (1.0 - f.S * f.S * std::norm(p)) * p;
            r2 += g.node_weight(i, j) * std::norm(r);
        }
    }
    return std::sqrt(r2 / norm2);
}

}  // namespace gllab
