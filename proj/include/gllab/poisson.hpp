#pragma once

#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "gllab/operators.hpp"

namespace gllab {

struct PoissonOptions {
    double tol = 1e-10;
    int max_iter = 20000;

    void validate() const {
        if (!(tol > 0.0) || tol > 1e-4) throw SpecError("PoissonOptions: tol must lie in (0, 1e-4]");
        if (max_iter < 1) throw SpecError("PoissonOptions: max_iter must be >= 1");
    }
};

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

/**
 * Jacobi-preconditioned conjugate gradients for a symmetric positive
 * (semi)definite operator. `apply(x, y)` writes y = K x. When `project` is
 * set, iterates are kept orthogonal to the constant vector (singular
 * Neumann systems). Convergence is |r| <= tol |b| unless `measure` is given,
 * in which case measure(r) <= tol. Returns the final residual measure;
 * throws SolverError if the target is not reached.
 */
template <class Apply>
double conjugate_gradient(Apply&& apply, const std::vector<double>& diag, const std::vector<double>& b,
                          std::vector<double>& x, const PoissonOptions& opts, bool project = false,
                          const std::function<double(const std::vector<double>&)>& measure = {}) {
    opts.validate();
    const std::size_t n = b.size();
    auto remove_mean = [&](std::vector<double>& v) {
        if (!project) return;
        const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(n);
        for (auto& e : v) e -= m;
    };
    const double bnorm = std::sqrt(dot(b, b));
    auto size_of = [&](const std::vector<double>& r) {
        return measure ? measure(r) : std::sqrt(dot(r, r)) / bnorm;
    };
    x.assign(n, 0.0);
    if (bnorm == 0.0) return 0.0;
    std::vector<double> r(n), z(n), p(n), q(n);
    auto true_residual = [&] {
        apply(x, q);
        for (std::size_t k = 0; k < n; ++k) r[k] = b[k] - q[k];
        remove_mean(r);
        return size_of(r);
    };
    double rel = true_residual();
    // The recurrence residual drifts from the true one near roundoff, so the
    // iteration restarts from the current iterate until the true residual
    // meets the target or stops improving.
    int it = 0;
    for (int restart = 0; restart < 8 && rel > opts.tol && it < opts.max_iter; ++restart) {
        const double start = rel;
        for (std::size_t k = 0; k < n; ++k) z[k] = r[k] / diag[k];
        remove_mean(z);
        p = z;
        double rz = dot(r, z);
        for (; it < opts.max_iter && rel > opts.tol; ++it) {
            apply(p, q);
            const double pq = dot(p, q);
            if (!(pq > 0.0)) break;
            const double alpha = rz / pq;
            for (std::size_t k = 0; k < n; ++k) {
                x[k] += alpha * p[k];
                r[k] -= alpha * q[k];
            }
            remove_mean(r);
            rel = size_of(r);
            for (std::size_t k = 0; k < n; ++k) z[k] = r[k] / diag[k];
            remove_mean(z);
            const double rz_new = dot(r, z);
            const double beta = rz_new / rz;
            rz = rz_new;
            for (std::size_t k = 0; k < n; ++k) p[k] = z[k] + beta * p[k];
        }
        rel = true_residual();
        if (!(rel < 0.5 * start)) break;
    }
    if (rel > opts.tol) throw SolverError("conjugate_gradient: no convergence", rel);
    return rel;
}

/**
 * Solve the 5-point problem Lap u = rhs at interior nodes, u = boundary
 * values (taken from `bc`, zero by default) on the outer ring.
 */
inline NodeField poisson_dirichlet(const Grid& g, const NodeField& rhs, const PoissonOptions& opts = {},
                                   const NodeField* bc = nullptr) {
    require_nodes(g, rhs, "poisson_dirichlet");
    if (bc) require_nodes(g, *bc, "poisson_dirichlet");
    opts.validate();
    const int mx = g.nx() - 1;
    const int my = g.ny() - 1;
    const double ax = 1.0 / (g.hx() * g.hx());
    const double ay = 1.0 / (g.hy() * g.hy());
    auto at = [mx](int i, int j) { return static_cast<std::size_t>(i) + static_cast<std::size_t>(mx) * j; };
    auto boundary = [&](int i, int j) { return bc ? (*bc)(i, j) : 0.0; };

    // K = -Lap on interior unknowns; b = -rhs + boundary couplings.
    std::vector<double> b(static_cast<std::size_t>(mx) * my), diag(b.size(), 2.0 * (ax + ay));
    for (int j = 1; j <= my; ++j) {
        for (int i = 1; i <= mx; ++i) {
            double v = -rhs(i, j);
            if (i == 1) v += ax * boundary(0, j);
            if (i == mx) v += ax * boundary(g.nx(), j);
            if (j == 1) v += ay * boundary(i, 0);
            if (j == my) v += ay * boundary(i, g.ny());
            b[at(i - 1, j - 1)] = v;
        }
    }
    auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
        y.assign(x.size(), 0.0);
        for (int j = 0; j < my; ++j) {
            for (int i = 0; i < mx; ++i) {
                double s = 2.0 * (ax + ay) * x[at(i, j)];
                if (i > 0) s -= ax * x[at(i - 1, j)];
                if (i + 1 < mx) s -= ax * x[at(i + 1, j)];
                if (j > 0) s -= ay * x[at(i, j - 1)];
                if (j + 1 < my) s -= ay * x[at(i, j + 1)];
                y[at(i, j)] = s;
            }
        }
    };
    std::vector<double> x;
    conjugate_gradient(apply, diag, b, x, opts);
    NodeField u = g.node_field();
    for (int j = 0; j <= g.ny(); ++j)
        for (int i = 0; i <= g.nx(); ++i)
            u(i, j) = g.on_boundary(i, j) ? boundary(i, j) : x[at(i - 1, j - 1)];
    return u;
}

/**
 * Cell-centred Lap u = rhs with u = 0 on the boundary, imposed by odd
 * reflection into ghost cells.
 */
inline CellField poisson_dirichlet_cells(const Grid& g, const CellField& rhs, const PoissonOptions& opts = {}) {
    require_cells(g, rhs, "poisson_dirichlet_cells");
    opts.validate();
    const int nx = g.nx();
    const int ny = g.ny();
    const double ax = 1.0 / (g.hx() * g.hx());
    const double ay = 1.0 / (g.hy() * g.hy());
    auto at = [nx](int i, int j) { return static_cast<std::size_t>(i) + static_cast<std::size_t>(nx) * j; };
    std::vector<double> diag(static_cast<std::size_t>(nx) * ny), b(diag.size());
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            double d = 2.0 * (ax + ay);
            if (i == 0 || i == nx - 1) d += ax;
            if (j == 0 || j == ny - 1) d += ay;
            diag[at(i, j)] = d;
            b[at(i, j)] = -rhs(i, j);
        }
    }
    auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
        y.resize(x.size());
        for (int j = 0; j < ny; ++j) {
            for (int i = 0; i < nx; ++i) {
                double s = diag[at(i, j)] * x[at(i, j)];
                if (i > 0) s -= ax * x[at(i - 1, j)];
                if (i + 1 < nx) s -= ax * x[at(i + 1, j)];
                if (j > 0) s -= ay * x[at(i, j - 1)];
                if (j + 1 < ny) s -= ay * x[at(i, j + 1)];
                y[at(i, j)] = s;
            }
        }
    };
    std::vector<double> x;
    conjugate_gradient(apply, diag, b, x, opts);
    CellField u = g.cell_field();
    for (std::size_t k = 0; k < x.size(); ++k) u[k] = x[k];
    return u;
}

// Length of the outer boundary inside the dual cell of a boundary node.
inline double boundary_dual_length(const Grid& g, int i, int j) {
    double len = 0.0;
    if (i == 0 || i == g.nx()) len += (j == 0 || j == g.ny()) ? 0.5 * g.hy() : g.hy();
    if (j == 0 || j == g.ny()) len += (i == 0 || i == g.nx()) ? 0.5 * g.hx() : g.hx();
    return len;
}

// y = K x with K = G^T W_e G, so that discrete_div(discrete_grad(x)) = -W_n^{-1} K x.
inline void neumann_apply(const Grid& g, const std::vector<double>& x, std::vector<double>& y) {
    const int ni = g.nx() + 1;
    y.assign(x.size(), 0.0);
    for (int j = 0; j <= g.ny(); ++j) {
        for (int i = 0; i < g.nx(); ++i) {
            const std::size_t a = static_cast<std::size_t>(i) + ni * j;
            const double c = g.xedge_weight(i, j) / (g.hx() * g.hx());
            const double d = c * (x[a + 1] - x[a]);
            y[a] -= d;
            y[a + 1] += d;
        }
    }
    for (int j = 0; j < g.ny(); ++j) {
        for (int i = 0; i <= g.nx(); ++i) {
            const std::size_t a = static_cast<std::size_t>(i) + ni * j;
            const double c = g.yedge_weight(i, j) / (g.hy() * g.hy());
            const double d = c * (x[a + ni] - x[a]);
            y[a] -= d;
            y[a + ni] += d;
        }
    }
}

inline std::vector<double> neumann_diagonal(const Grid& g) {
    std::vector<double> e(static_cast<std::size_t>(g.nx() + 1) * (g.ny() + 1), 0.0), d(e.size());
    const int ni = g.nx() + 1;
    for (int j = 0; j <= g.ny(); ++j) {
        for (int i = 0; i <= g.nx(); ++i) {
            double s = 0.0;
            if (i < g.nx()) s += g.xedge_weight(i, j) / (g.hx() * g.hx());
            if (i > 0) s += g.xedge_weight(i - 1, j) / (g.hx() * g.hx());
            if (j < g.ny()) s += g.yedge_weight(i, j) / (g.hy() * g.hy());
            if (j > 0) s += g.yedge_weight(i, j - 1) / (g.hy() * g.hy());
            d[static_cast<std::size_t>(i) + ni * j] = s;
        }
    }
    return d;
}

/**
 * Lap u = rhs with du/dnu = flux on the boundary (outward normal; `flux` is
 * read at boundary nodes only), in the finite-volume form
 *     w_n div(grad u)_n + |dual boundary|_n flux_n = w_n rhs_n.
 * Compatibility: sum w rhs = sum |dual boundary| flux. The solution has zero
 * weighted mean.
 */
inline NodeField poisson_neumann(const Grid& g, const NodeField& rhs, const NodeField& flux,
                                 const PoissonOptions& opts = {}) {
    require_nodes(g, rhs, "poisson_neumann");
    require_nodes(g, flux, "poisson_neumann");
    opts.validate();
    double src = 0.0;
    double bdy = 0.0;
    double scale = 0.0;
    const int ni = g.nx() + 1;
    std::vector<double> b(rhs.size());
    for (int j = 0; j <= g.ny(); ++j) {
        for (int i = 0; i <= g.nx(); ++i) {
            const double w = g.node_weight(i, j);
            const double l = g.on_boundary(i, j) ? boundary_dual_length(g, i, j) : 0.0;
            src += w * rhs(i, j);
            bdy += l * flux(i, j);
            scale += std::abs(w * rhs(i, j)) + std::abs(l * flux(i, j));
            // K u = -(w rhs - l flux)
            b[static_cast<std::size_t>(i) + ni * j] = l * flux(i, j) - w * rhs(i, j);
        }
    }
    if (std::abs(src - bdy) > 1e-10 * std::max(scale, 1e-300))
        throw CompatibilityError("poisson_neumann: sum of sources differs from boundary flux");
    const double m = std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(b.size());
    for (auto& v : b) v -= m;
    std::vector<double> x;
    conjugate_gradient([&](const std::vector<double>& in, std::vector<double>& out) { neumann_apply(g, in, out); },
                       neumann_diagonal(g), b, x, opts, true);
    NodeField u = g.node_field();
    double mean = 0.0;
    for (int j = 0; j <= g.ny(); ++j)
        for (int i = 0; i <= g.nx(); ++i) mean += g.node_weight(i, j) * x[static_cast<std::size_t>(i) + ni * j];
    mean /= g.area();
    for (std::size_t k = 0; k < x.size(); ++k) u[k] = x[k] - mean;
    return u;
}

}  // namespace gllab
