#pragma once

#include <algorithm>

#include "gllab/poisson.hpp"

namespace gllab {

/**
 * Reference potential F with curl F = 1, div F = 0 and F . nu = 0.
 *
 * The stream function u solves Lap u = 1 at cell centres with u = 0 on the
 * boundary (odd ghost reflection), and F = (-d_y u, d_x u) on the edges. The
 * node divergence then telescopes to zero exactly, and curl F - 1 equals the
 * Poisson residual.
 */
inline EdgeField reference_potential(const Grid& g, const PoissonOptions& opts = {}) {
    const CellField u = poisson_dirichlet_cells(g, g.cell_field(1.0), opts);
    auto cell = [&](int i, int j) {
        // Odd reflection across each side; corners reflect twice.
        double s = 1.0;
        if (i < 0) { i = 0; s = -s; }
        if (i >= g.nx()) { i = g.nx() - 1; s = -s; }
        if (j < 0) { j = 0; s = -s; }
        if (j >= g.ny()) { j = g.ny() - 1; s = -s; }
        return s * u(i, j);
    };
    EdgeField f = g.edge_field();
    for (int j = 0; j <= g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) f.x(i, j) = -(cell(i, j) - cell(i, j - 1)) / g.hy();
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i <= g.nx(); ++i) f.y(i, j) = (cell(i, j) - cell(i - 1, j)) / g.hx();
    return f;
}

struct LondonProjection {
    EdgeField a;    // A - grad chi
    NodeField chi;  // zero weighted mean
};

/**
 * Remove the gradient part of A: chi solves the Neumann problem
 * Lap chi = div A with zero boundary flux (the normal component of A on the
 * boundary is identically zero in this representation), so the system is
 * always compatible. A state (psi, A) must follow with psi exp(+i B chi).
 */
inline LondonProjection london_gauge(const Grid& g, const EdgeField& a, const PoissonOptions& opts = {1e-11, 20000}) {
    require_edges(g, a, "london_project");
    opts.validate();
    // K chi = G^T W_e A, the weighted form of Lap chi = div A.
    const NodeField d = discrete_div(g, a);
    const int ni = g.nx() + 1;
    std::vector<double> b(d.size());
    for (int j = 0; j <= g.ny(); ++j)
        for (int i = 0; i <= g.nx(); ++i) b[static_cast<std::size_t>(i) + ni * j] = -g.node_weight(i, j) * d(i, j);
    const double m = std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(b.size());
    for (auto& v : b) v -= m;
    // Stop on the divergence itself: max |div(A - grad chi)| relative to
    // max(1, max |A|).
    double amax = 1.0;
    for (double v : a.x.values()) amax = std::max(amax, std::abs(v));
    for (double v : a.y.values()) amax = std::max(amax, std::abs(v));
    std::vector<double> inv_w(b.size());
    for (int j = 0; j <= g.ny(); ++j)
        for (int i = 0; i <= g.nx(); ++i) inv_w[static_cast<std::size_t>(i) + ni * j] = 1.0 / g.node_weight(i, j);
    auto div_size = [&](const std::vector<double>& r) {
        double m = 0.0;
        for (std::size_t k = 0; k < r.size(); ++k) m = std::max(m, std::abs(r[k]) * inv_w[k]);
        return m / amax;
    };
    std::vector<double> x;
    conjugate_gradient([&](const std::vector<double>& in, std::vector<double>& out) { neumann_apply(g, in, out); },
                       neumann_diagonal(g), b, x, opts, true, div_size);
    LondonProjection out{a, g.node_field()};
    double mean = 0.0;
    for (int j = 0; j <= g.ny(); ++j)
        for (int i = 0; i <= g.nx(); ++i) mean += g.node_weight(i, j) * x[static_cast<std::size_t>(i) + ni * j];
    mean /= g.area();
    for (std::size_t k = 0; k < x.size(); ++k) out.chi[k] = x[k] - mean;
    const EdgeField gr = discrete_grad(g, out.chi);
    for (std::size_t k = 0; k < out.a.x.size(); ++k) out.a.x[k] -= gr.x[k];
    for (std::size_t k = 0; k < out.a.y.size(); ++k) out.a.y[k] -= gr.y[k];
    return out;
}

inline EdgeField london_project(const Grid& g, const EdgeField& a, const PoissonOptions& opts = {1e-11, 20000}) {
    return london_gauge(g, a, opts).a;
}

}  // namespace gllab
