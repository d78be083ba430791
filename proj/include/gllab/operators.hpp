#pragma once

// Gauge-covariant difference operators on the staggered grid.
//
// Convention: D = -i grad + B A. Covariant differences use link variables
// U_e = exp(i B A_e h_e) on each edge, with values expressed in the frame of
// the edge's tail node. Under the gauge change
//     psi -> psi exp(-i B chi),   A -> A + grad chi
// every |D psi| edge value is unchanged exactly.

#include <algorithm>
#include <cmath>

#include "gllab/grid.hpp"

namespace gllab {

inline cplx link(double b, double a, double h) { return std::polar(1.0, b * a * h); }

// Edge-indexed -i (U psi_head - psi_tail) / h along one axis (1 or 2).
inline XEdgeComplexField covariant_dx(const Grid& g, const ComplexField& psi, const EdgeField& a, double b) {
    require_nodes(g, psi, "covariant_dx");
    require_edges(g, a, "covariant_dx");
    const double h = g.hx();
    XEdgeComplexField d(g.nx(), g.ny() + 1);
    for (int j = 0; j <= g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i)
            d(i, j) = cplx(0.0, -1.0) * (link(b, a.x(i, j), h) * psi(i + 1, j) - psi(i, j)) / h;
    return d;
}

inline YEdgeComplexField covariant_dy(const Grid& g, const ComplexField& psi, const EdgeField& a, double b) {
    require_nodes(g, psi, "covariant_dy");
    require_edges(g, a, "covariant_dy");
    const double h = g.hy();
    YEdgeComplexField d(g.nx() + 1, g.ny());
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i <= g.nx(); ++i)
            d(i, j) = cplx(0.0, -1.0) * (link(b, a.y(i, j), h) * psi(i, j + 1) - psi(i, j)) / h;
    return d;
}

inline EdgeComplexField covariant_diff(const Grid& g, const ComplexField& psi, const EdgeField& a, double b) {
    return {covariant_dx(g, psi, a, b), covariant_dy(g, psi, a, b)};
}

/**
 * D_axis D_axis psi at the nodes.
 *
 * Interior nodes use the symmetric three-point stencil. On a side normal to
 * `axis` only one edge exists; the missing half-cell flux is taken as zero,
 * which is the magnetic Neumann condition nu . D psi = 0.
 */
inline ComplexField second_covariant_diag(const Grid& g, const ComplexField& psi, const EdgeField& a, double b,
                                          int axis) {
    require_nodes(g, psi, "second_covariant");
    require_edges(g, a, "second_covariant");
    ComplexField out = g.complex_field();
    if (axis == 1) {
        const double h = g.hx();
        const double c_in = 1.0 / (h * h);
        for (int j = 0; j <= g.ny(); ++j) {
            for (int i = 0; i <= g.nx(); ++i) {
                const double c = (i == 0 || i == g.nx()) ? 2.0 * c_in : c_in;
                cplx s = 0.0;
                if (i < g.nx()) s += psi(i, j) - link(b, a.x(i, j), h) * psi(i + 1, j);
                if (i > 0) s += psi(i, j) - std::conj(link(b, a.x(i - 1, j), h)) * psi(i - 1, j);
                out(i, j) = c * s;
            }
        }
    } else if (axis == 2) {
        const double h = g.hy();
        const double c_in = 1.0 / (h * h);
        for (int j = 0; j <= g.ny(); ++j) {
            const double c = (j == 0 || j == g.ny()) ? 2.0 * c_in : c_in;
            for (int i = 0; i <= g.nx(); ++i) {
                cplx s = 0.0;
                if (j < g.ny()) s += psi(i, j) - link(b, a.y(i, j), h) * psi(i, j + 1);
                if (j > 0) s += psi(i, j) - std::conj(link(b, a.y(i, j - 1), h)) * psi(i, j - 1);
                out(i, j) = c * s;
            }
        }
    } else {
        throw SpecError("second_covariant: axis must be 1 or 2");
    }
    return out;
}

/**
 * Mixed derivative D_j D_k psi (j != k) at cell centres, in the frame of the
 * cell's lower-left node. D_1 D_2 transports the right column along the bottom
 * link, D_2 D_1 transports the top row along the left link, so
 *     (D_1 D_2 - D_2 D_1) psi = -(exp(i B h^2 curl A) - 1) / h^2 * U psi_{i+1,j+1}
 * which is -i B curl(A) psi up to O(B^2 h^2).
 */
inline CellComplexField second_covariant_mixed(const Grid& g, const ComplexField& psi, const EdgeField& a, double b,
                                               int j_axis, int k_axis) {
    require_nodes(g, psi, "second_covariant");
    require_edges(g, a, "second_covariant");
    if (!((j_axis == 1 && k_axis == 2) || (j_axis == 2 && k_axis == 1)))
        throw SpecError("second_covariant_mixed: need {j, k} = {1, 2}");
    const double hx = g.hx();
    const double hy = g.hy();
    CellComplexField out(g.nx(), g.ny());
    for (int j = 0; j < g.ny(); ++j) {
        for (int i = 0; i < g.nx(); ++i) {
            const cplx ux0 = link(b, a.x(i, j), hx);
            const cplx ux1 = link(b, a.x(i, j + 1), hx);
            const cplx uy0 = link(b, a.y(i, j), hy);
            const cplx uy1 = link(b, a.y(i + 1, j), hy);
            if (j_axis == 1) {
                // -(U_x [U_y1 psi_11 - psi_10] - [U_y0 psi_01 - psi_00]) / (hx hy)
                const cplx right = uy1 * psi(i + 1, j + 1) - psi(i + 1, j);
                const cplx left = uy0 * psi(i, j + 1) - psi(i, j);
                out(i, j) = -(ux0 * right - left) / (hx * hy);
            } else {
                const cplx top = ux1 * psi(i + 1, j + 1) - psi(i, j + 1);
                const cplx bottom = ux0 * psi(i + 1, j) - psi(i, j);
                out(i, j) = -(uy0 * top - bottom) / (hx * hy);
            }
        }
    }
    return out;
}

struct CovariantHessian {
    ComplexField d11;
    ComplexField d22;
    CellComplexField d12;
    CellComplexField d21;
};

inline CovariantHessian covariant_hessian(const Grid& g, const ComplexField& psi, const EdgeField& a, double b) {
    return {second_covariant_diag(g, psi, a, b, 1), second_covariant_diag(g, psi, a, b, 2),
            second_covariant_mixed(g, psi, a, b, 1, 2), second_covariant_mixed(g, psi, a, b, 2, 1)};
}

// Magnetic Laplacian H psi = D_1^2 psi + D_2^2 psi at nodes (Neumann half-cells).
inline ComplexField magnetic_laplacian(const Grid& g, const ComplexField& psi, const EdgeField& a, double b) {
    ComplexField out = second_covariant_diag(g, psi, a, b, 1);
    const ComplexField d22 = second_covariant_diag(g, psi, a, b, 2);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += d22[k];
    return out;
}

// Plaquette circulation divided by the cell area.
inline CellField discrete_curl(const Grid& g, const EdgeField& a) {
    require_edges(g, a, "discrete_curl");
    const double hx = g.hx();
    const double hy = g.hy();
    CellField c = g.cell_field();
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i)
            c(i, j) = ((a.x(i, j) - a.x(i, j + 1)) * hx + (a.y(i + 1, j) - a.y(i, j)) * hy) / (hx * hy);
    return c;
}

inline EdgeField discrete_grad(const Grid& g, const NodeField& chi) {
    require_nodes(g, chi, "discrete_grad");
    EdgeField a = g.edge_field();
    for (int j = 0; j <= g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) a.x(i, j) = (chi(i + 1, j) - chi(i, j)) / g.hx();
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i <= g.nx(); ++i) a.y(i, j) = (chi(i, j + 1) - chi(i, j)) / g.hy();
    return a;
}

/**
 * Node divergence as the negative weighted adjoint of discrete_grad:
 *     sum_n w_n chi_n div(A)_n = -sum_e W_e A_e grad(chi)_e
 * for every chi. This is the dual-cell flux balance with zero normal flux
 * through the outer boundary.
 */
inline NodeField discrete_div(const Grid& g, const EdgeField& a) {
    require_edges(g, a, "discrete_div");
    NodeField flux = g.node_field();
    for (int j = 0; j <= g.ny(); ++j) {
        for (int i = 0; i < g.nx(); ++i) {
            const double q = g.xedge_weight(i, j) * a.x(i, j) / g.hx();
            flux(i, j) += q;
            flux(i + 1, j) -= q;
        }
    }
    for (int j = 0; j < g.ny(); ++j) {
        for (int i = 0; i <= g.nx(); ++i) {
            const double q = g.yedge_weight(i, j) * a.y(i, j) / g.hy();
            flux(i, j) += q;
            flux(i, j + 1) -= q;
        }
    }
    for (int j = 0; j <= g.ny(); ++j)
        for (int i = 0; i <= g.nx(); ++i) flux(i, j) /= g.node_weight(i, j);
    return flux;
}

// Transpose of discrete_curl with respect to the plain (unweighted) sums:
// returns e -> sum_c c_c * d(curl_c)/d(A_e).
inline EdgeField curl_transpose(const Grid& g, const CellField& c) {
    require_cells(g, c, "curl_transpose");
    EdgeField a = g.edge_field();
    const double ihx = 1.0 / g.hx();
    const double ihy = 1.0 / g.hy();
    for (int j = 0; j < g.ny(); ++j) {
        for (int i = 0; i < g.nx(); ++i) {
            const double v = c(i, j);
            a.x(i, j) += v * ihy;
            a.x(i, j + 1) -= v * ihy;
            a.y(i + 1, j) += v * ihx;
            a.y(i, j) -= v * ihx;
        }
    }
    return a;
}

// (psi, A) -> (psi exp(-i B chi), A + grad chi).
inline void gauge_transform(const Grid& g, ComplexField& psi, EdgeField& a, const NodeField& chi, double b) {
    require_nodes(g, psi, "gauge_transform");
    require_nodes(g, chi, "gauge_transform");
    require_edges(g, a, "gauge_transform");
    for (std::size_t k = 0; k < psi.size(); ++k) psi[k] *= std::polar(1.0, -b * chi[k]);
    const EdgeField gr = discrete_grad(g, chi);
    for (std::size_t k = 0; k < a.x.size(); ++k) a.x[k] += gr.x[k];
    for (std::size_t k = 0; k < a.y.size(); ++k) a.y[k] += gr.y[k];
}

namespace detail {

// Bilinear weights on a lattice with origin (x0, y0), spacing (hx, hy) and
// ni x nj points; coordinates outside the lattice hull are clamped to it.
struct Bilinear {
    int i = 0, j = 0;
    double tx = 0.0, ty = 0.0;
};

inline Bilinear bilinear_cell(double x, double y, double x0, double y0, double hx, double hy, int ni, int nj) {
    auto axis = [](double u, double u0, double h, int n, int& k, double& t) {
        double s = std::clamp((u - u0) / h, 0.0, static_cast<double>(n - 1));
        k = std::min(static_cast<int>(s), n - 2);
        t = s - k;
    };
    Bilinear b;
    axis(x, x0, hx, ni, b.i, b.tx);
    axis(y, y0, hy, nj, b.j, b.ty);
    return b;
}

template <class T>
T bilinear(const Array2<T>& f, const Bilinear& b) {
    return (1.0 - b.ty) * ((1.0 - b.tx) * f(b.i, b.j) + b.tx * f(b.i + 1, b.j)) +
           b.ty * ((1.0 - b.tx) * f(b.i, b.j + 1) + b.tx * f(b.i + 1, b.j + 1));
}

inline void require_inside(const Grid& g, Point p) {
    const double slack = 1e-12 * std::max(g.lx(), g.ly());
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !g.contains(p, slack))
        throw DomainError("interpolate: point outside the domain");
}

}  // namespace detail

// Bilinear interpolation of a node field; exact on bilinear data.
template <class T>
T interpolate(const Grid& g, const Field<T, NodeTag>& f, Point p) {
    require_nodes(g, f, "interpolate");
    detail::require_inside(g, p);
    return detail::bilinear(f, detail::bilinear_cell(p.x, p.y, 0.0, 0.0, g.hx(), g.hy(), g.nx() + 1, g.ny() + 1));
}

// Both components of an edge field, each interpolated from its own edge
// midpoints (constant extension in the half cell next to the sides).
inline Point interpolate(const Grid& g, const EdgeField& a, Point p) {
    require_edges(g, a, "interpolate");
    detail::require_inside(g, p);
    const auto bx = detail::bilinear_cell(p.x, p.y, 0.5 * g.hx(), 0.0, g.hx(), g.hy(), g.nx(), g.ny() + 1);
    const auto by = detail::bilinear_cell(p.x, p.y, 0.0, 0.5 * g.hy(), g.hx(), g.hy(), g.nx() + 1, g.ny());
    return {detail::bilinear(a.x, bx), detail::bilinear(a.y, by)};
}

}  // namespace gllab
