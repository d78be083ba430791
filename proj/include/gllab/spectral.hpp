#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <utility>
#include <vector>

#include "gllab/gl.hpp"

namespace gllab {

// ---------------------------------------------------------------------------
// Symmetric tridiagonal eigenvalues by Sturm-sequence bisection
// ---------------------------------------------------------------------------

struct SymTridiag {
    std::vector<double> d;  // diagonal
    std::vector<double> e;  // off-diagonal, size d.size() - 1

    // Number of eigenvalues strictly below x.
    int count_below(double x) const {
        int c = 0;
        double q = 1.0;
        for (std::size_t k = 0; k < d.size(); ++k) {
            const double off = k == 0 ? 0.0 : e[k - 1] * e[k - 1] / q;
            q = d[k] - x - off;
            if (q == 0.0) q = -1e-300;
            if (q < 0.0) ++c;
        }
        return c;
    }

    std::pair<double, double> gershgorin() const {
        double lo = INFINITY, hi = -INFINITY;
        for (std::size_t k = 0; k < d.size(); ++k) {
            double r = 0.0;
            if (k > 0) r += std::abs(e[k - 1]);
            if (k + 1 < d.size()) r += std::abs(e[k]);
            lo = std::min(lo, d[k] - r);
            hi = std::max(hi, d[k] + r);
        }
        return {lo, hi};
    }

    // k-th smallest eigenvalue (k = 0, 1, ...), to absolute width tol * max(1, |lambda|).
    double eigenvalue(int k, double tol = 1e-10) const {
        if (k < 0 || static_cast<std::size_t>(k) >= d.size()) throw SpecError("SymTridiag: eigenvalue index out of range");
        auto [lo, hi] = gershgorin();
        while (hi - lo > tol * std::max({1.0, std::abs(lo), std::abs(hi)})) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            if (count_below(mid) > k)
                hi = mid;
            else
                lo = mid;
        }
        return 0.5 * (lo + hi);
    }
};

// ---------------------------------------------------------------------------
// Fiber operators of the half-plane and the plane
// ---------------------------------------------------------------------------

/**
 * -u'' + (t - xi)^2 u on (0, T), u'(0) = 0, u(T) = 0, on n cells. The Neumann
 * end uses a half-weight node, symmetrised by the mass scaling.
 */
struct FiberProblem {
    double xi = 0.0;
    double T = 12.0;
    int n = 2000;

    void validate() const {
        if (!(T >= 8.0) || !std::isfinite(T)) throw SpecError("FiberProblem: T must be at least 8");
        if (n < 200) throw SpecError("FiberProblem: n must be at least 200");
        if (!std::isfinite(xi)) throw SpecError("FiberProblem: xi must be finite");
    }

    SymTridiag matrix() const {
        const double h = T / n;
        const double ih2 = 1.0 / (h * h);
        SymTridiag m;
        m.d.resize(n);
        m.e.assign(n - 1, -ih2);
        for (int k = 0; k < n; ++k) {
            const double t = k * h - xi;
            m.d[k] = 2.0 * ih2 + t * t;
        }
        m.e[0] = -std::sqrt(2.0) * ih2;
        return m;
    }
};

inline double mu_of_xi(const FiberProblem& fp, double tol = 1e-10) {
    fp.validate();
    return fp.matrix().eigenvalue(0, tol);
}

struct SpectralResult {
    double theta0 = 0.0;
    double xi_opt = 0.0;
    std::vector<std::pair<double, double>> mu_samples;  // (xi, mu) at the fine resolution
    double T = 0.0;
    int n_coarse = 0;
    int n_fine = 0;
    double theta_coarse = 0.0;
    double theta_fine = 0.0;
};

struct Theta0Options {
    double T = 12.0;
    int n = 2000;            // coarse resolution; the fine one doubles it
    double xi_lo = 0.0;
    double xi_hi = 2.0;
    double sample_step = 0.05;
};

/**
 * Golden-section minimisation of mu over [xi_lo, xi_hi] at n and 2n cells,
 * combined by Richardson extrapolation for the second-order scheme.
 */
inline SpectralResult theta0(double tol = 1e-6, const Theta0Options& o = {}) {
    if (!(tol >= 1e-8 && tol <= 1e-3)) throw SpecError("theta0: tol must lie in [1e-8, 1e-3]");
    if (!(o.xi_hi > o.xi_lo)) throw SpecError("theta0: empty xi bracket");
    const double eig_tol = std::min(1e-10, 1e-3 * tol);
    auto minimise = [&](int n) {
        auto mu = [&](double xi) { return mu_of_xi({xi, o.T, n}, eig_tol); };
        const double r = 0.5 * (std::sqrt(5.0) - 1.0);
        double a = o.xi_lo, b = o.xi_hi;
        double c = b - r * (b - a), d = a + r * (b - a);
        double fc = mu(c), fd = mu(d);
        const double width = std::max(1e-7, 0.1 * std::sqrt(tol));
        while (b - a > width) {
            if (fc < fd) {
                b = d;
                d = c;
                fd = fc;
                c = b - r * (b - a);
                fc = mu(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + r * (b - a);
                fd = mu(d);
            }
        }
        const double xi = 0.5 * (a + b);
        const double edge = 10.0 * width;
        if (xi - o.xi_lo < edge || o.xi_hi - xi < edge)
            throw BracketError("theta0: minimum of mu(xi) sits on the bracket end");
        return std::pair{xi, mu(xi)};
    };
    SpectralResult r;
    r.T = o.T;
    r.n_coarse = o.n;
    r.n_fine = 2 * o.n;
    const auto [xc, mc] = minimise(r.n_coarse);
    const auto [xf, mf] = minimise(r.n_fine);
    r.theta_coarse = mc;
    r.theta_fine = mf;
    r.theta0 = (4.0 * mf - mc) / 3.0;
    r.xi_opt = xf;
    const int ns = static_cast<int>(std::floor((o.xi_hi - o.xi_lo) / o.sample_step + 1e-9));
    for (int k = 0; k <= ns; ++k) {
        const double xi = o.xi_lo + k * o.sample_step;
        r.mu_samples.emplace_back(xi, mu_of_xi({xi, o.T, r.n_fine}, eig_tol));
    }
    return r;
}

// (xi, mu) rows for the mu table.
inline std::vector<std::pair<double, double>> mu_table(const std::vector<double>& xis, double T, int n) {
    std::vector<std::pair<double, double>> rows;
    rows.reserve(xis.size());
    for (double xi : xis) rows.emplace_back(xi, mu_of_xi({xi, T, n}));
    return rows;
}

// Lowest eigenvalues of -u'' + t^2 u on (-T, T) with Dirichlet ends.
inline std::vector<double> landau_levels(int count, double T = 12.0, int n = 4000) {
    if (count < 1 || count > 6) throw SpecError("landau_levels: count must lie in [1, 6]");
    if (!(T > 0.0) || n < 2 * count + 2) throw SpecError("landau_levels: invalid truncation");
    const double h = 2.0 * T / n;
    const double ih2 = 1.0 / (h * h);
    SymTridiag m;
    m.d.resize(n - 1);
    m.e.assign(n - 2, -ih2);
    for (int k = 1; k < n; ++k) {
        const double t = -T + k * h;
        m.d[k - 1] = 2.0 * ih2 + t * t;
    }
    std::vector<double> out;
    for (int k = 0; k < count; ++k) out.push_back(m.eigenvalue(k));
    return out;
}

// ---------------------------------------------------------------------------
// Two-dimensional magnetic Laplacian ground states
// ---------------------------------------------------------------------------

struct EigenOptions {
    double tol = 1e-9;        // on the Ritz residual bound, relative
    int max_iter = 400;       // Lanczos steps
    double inner_tol = 1e-10;
    int inner_max_iter = 20000;
    double shift = 0.0;       // must stay below the smallest eigenvalue
};

struct EigenResult {
    double eigenvalue = 0.0;
    double residual = 0.0;
    int iterations = 0;
    int inner_iterations = 0;
    int nx = 0;
    int ny = 0;
};

namespace detail {

inline double cdot_re(const std::vector<cplx>& a, const std::vector<cplx>& b, const std::vector<double>& w) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += w[k] * (a[k].real() * b[k].real() + a[k].imag() * b[k].imag());
    return s;
}

// Jacobi-preconditioned CG for (K - shift M) x = b on the free nodes.
inline int complex_cg(const MagneticFunctional& f, const std::vector<double>& m, double shift,
                      const std::vector<double>& diag, const std::vector<cplx>& b, std::vector<cplx>& x, double tol,
                      int max_iter) {
    const std::size_t n = b.size();
    const std::vector<double> one(n, 1.0);
    x.assign(n, cplx{});
    std::vector<cplx> r = b, z(n), p(n), q(n);
    const double bn = std::sqrt(cdot_re(b, b, one));
    if (bn == 0.0) return 0;
    for (std::size_t k = 0; k < n; ++k) z[k] = diag[k] > 0.0 ? r[k] / diag[k] : cplx{};
    p = z;
    double rz = cdot_re(r, z, one);
    for (int it = 1; it <= max_iter; ++it) {
        f.kinetic_apply(p, q);
        if (shift != 0.0)
            for (std::size_t k = 0; k < n; ++k) q[k] -= shift * m[k] * p[k];
        const double pq = cdot_re(p, q, one);
        if (!(pq > 0.0)) throw SolverError("complex_cg: shifted operator is not positive definite", pq);
        const double alpha = rz / pq;
        for (std::size_t k = 0; k < n; ++k) {
            x[k] += alpha * p[k];
            r[k] -= alpha * q[k];
        }
        const double rn = std::sqrt(cdot_re(r, r, one));
        if (rn <= tol * bn) return it;
        for (std::size_t k = 0; k < n; ++k) z[k] = diag[k] > 0.0 ? r[k] / diag[k] : cplx{};
        const double rz_new = cdot_re(r, z, one);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t k = 0; k < n; ++k) p[k] = z[k] + beta * p[k];
    }
    throw SolverError("complex_cg: no convergence", std::sqrt(cdot_re(r, r, one)) / bn);
}

}  // namespace detail

/**
 * Smallest eigenvalue of K v = lambda M v, K the link-variable kinetic matrix
 * of `a` (B = 1) and M the trapezoid mass, on the nodes not held by Dirichlet
 * sides. Shift-invert Lanczos in the M inner product; only the
 * tridiagonal matrix is kept, which suffices for the extreme Ritz value.
 */
inline EigenResult magnetic_ground_state(const Grid& g, const EdgeField& a, const SideConditions& sides,
                                         const EigenOptions& o = {}) {
    const MagneticFunctional f(g, {0.0, 0.0, 0.0, 1.0}, sides, a);
    const std::size_t nn = f.node_count();
    std::vector<double> m(nn), diag(nn, 0.0);
    for (std::size_t n = 0; n < nn; ++n) m[n] = f.node_fixed(n) ? 0.0 : f.node_weight(n);
    for (int j = 0; j <= g.ny(); ++j) {
        for (int i = 0; i <= g.nx(); ++i) {
            double s = 0.0;
            if (i > 0) s += g.xedge_weight(i - 1, j) / (g.hx() * g.hx());
            if (i < g.nx()) s += g.xedge_weight(i, j) / (g.hx() * g.hx());
            if (j > 0) s += g.yedge_weight(i, j - 1) / (g.hy() * g.hy());
            if (j < g.ny()) s += g.yedge_weight(i, j) / (g.hy() * g.hy());
            const std::size_t n = f.node(i, j);
            diag[n] = f.node_fixed(n) ? 0.0 : s - o.shift * m[n];
        }
    }
    // Smooth positive start with a deterministic perturbation.
    Rng rng(7);
    std::vector<cplx> q(nn), q_prev(nn, cplx{}), w, mq(nn);
    for (int j = 0; j <= g.ny(); ++j) {
        for (int i = 0; i <= g.nx(); ++i) {
            const std::size_t n = f.node(i, j);
            const Point p = g.node(i, j);
            const double bump = std::sin(M_PI * (p.x + 0.5 * g.hx()) / (g.lx() + g.hx())) *
                                std::sin(M_PI * (p.y + 0.5 * g.hy()) / (g.ly() + g.hy()));
            q[n] = f.node_fixed(n) ? cplx{} : cplx(bump + 0.01 * rng.symmetric(), 0.01 * rng.symmetric());
        }
    }
    const double q0 = std::sqrt(detail::cdot_re(q, q, m));
    for (auto& v : q) v /= q0;

    EigenResult r;
    r.nx = g.nx();
    r.ny = g.ny();
    SymTridiag t;
    double beta_prev = 0.0;
    double theta_prev = 0.0;
    for (int k = 0; k < o.max_iter; ++k) {
        for (std::size_t n = 0; n < nn; ++n) mq[n] = m[n] * q[n];
        r.inner_iterations += detail::complex_cg(f, m, o.shift, diag, mq, w, o.inner_tol, o.inner_max_iter);
        const double alpha = detail::cdot_re(q, w, m);
        for (std::size_t n = 0; n < nn; ++n) w[n] -= alpha * q[n] + beta_prev * q_prev[n];
        const double beta = std::sqrt(detail::cdot_re(w, w, m));
        t.d.push_back(alpha);
        const int dim = static_cast<int>(t.d.size());
        const double theta = t.eigenvalue(dim - 1, 1e-15);
        // Last component of the top Ritz vector by inverse iteration on T.
        std::vector<double> s(dim, 1.0);
        for (int pass = 0; pass < 3; ++pass) {
            const double shift = theta * (1.0 + 1e-12) + 1e-300;
            std::vector<double> c(dim), dd(dim), rhs = s;
            for (int i = 0; i < dim; ++i) dd[i] = t.d[i] - shift;
            for (int i = 1; i < dim; ++i) {
                const double l = t.e[i - 1] / dd[i - 1];
                dd[i] -= l * t.e[i - 1];
                rhs[i] -= l * rhs[i - 1];
                c[i] = l;
            }
            for (int i = dim - 1; i >= 0; --i) {
                double v = rhs[i];
                if (i + 1 < dim) v -= t.e[i] * s[i + 1];
                s[i] = v / (dd[i] == 0.0 ? 1e-300 : dd[i]);
            }
            double nrm = 0.0;
            for (double v : s) nrm += v * v;
            nrm = std::sqrt(nrm);
            for (double& v : s) v /= nrm;
        }
        r.iterations = k + 1;
        r.eigenvalue = o.shift + 1.0 / theta;
        r.residual = beta * std::abs(s[dim - 1]) / theta;
        if (k > 2 && r.residual < o.tol && std::abs(theta - theta_prev) <= o.tol * theta) return r;
        theta_prev = theta;
        if (beta == 0.0) return r;
        t.e.push_back(beta);
        for (std::size_t n = 0; n < nn; ++n) {
            q_prev[n] = q[n];
            q[n] = w[n] / beta;
        }
        beta_prev = beta;
    }
    throw SolverError("magnetic_ground_state: Lanczos did not converge", r.residual);
}

struct HalfplaneOptions {
    double points_per_unit = 8.0;
    double edge_half_length = 60.0;  // extent along the Neumann edge, |x2| <= this
    bool neumann_edge = true;        // false: Dirichlet on x1 = 0 as well
    EigenOptions eigen;
};

/**
 * (-i grad + F)^2 with F = (0, x1) on [0, R] x [-L, L]: magnetic Neumann on
 * x1 = 0, Dirichlet elsewhere. The grid's x2 coordinate is shifted by L,
 * which leaves F unchanged.
 */
inline EigenResult halfplane_ground_state(double R, const HalfplaneOptions& o = {}) {
    if (!(R >= 6.0)) throw SpecError("halfplane_ground_state: R must be at least 6");
    if (!(o.points_per_unit >= 2.0)) throw SpecError("halfplane_ground_state: resolution too coarse");
    const double L = std::max(o.edge_half_length, R);
    const Grid g = Grid::with_spacing(R, 2.0 * L, 1.0 / o.points_per_unit);
    EdgeField a = g.edge_field();
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i <= g.nx(); ++i) a.y(i, j) = g.node(i, j).x;
    SideConditions sides = SideConditions::all_dirichlet();
    if (o.neumann_edge) sides.left = Boundary::neumann;
    return magnetic_ground_state(g, a, sides, o.eigen);
}

// Unit-field ground state on the Dirichlet square [-R, R]^2.
inline EigenResult plane_ground_state(double R, double points_per_unit = 8.0, const EigenOptions& eo = {}) {
    if (!(R > 0.0)) throw SpecError("plane_ground_state: R must be positive");
    const Grid g = Grid::with_spacing(2.0 * R, 2.0 * R, 1.0 / points_per_unit);
    EdgeField a = g.edge_field();
    const double cx = 0.5 * g.lx();
    const double cy = 0.5 * g.ly();
    for (int j = 0; j <= g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) a.x(i, j) = -0.5 * (g.node(i, j).y - cy);
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i <= g.nx(); ++i) a.y(i, j) = 0.5 * (g.node(i, j).x - cx);
    return magnetic_ground_state(g, a, SideConditions::all_dirichlet(), eo);
}

// ---------------------------------------------------------------------------
// Limiting nonlinear problems on truncated domains
// ---------------------------------------------------------------------------

enum class ProbeGeometry { plane, halfplane };

struct ProbeOptions {
    double points_per_unit = 8.0;
    double grad_tol = 1e-9;
    int max_iter = 50000;
    double edge_band = 3.0;  // width of the strip used for the edge mass fraction
    std::uint64_t seed = 1;
};

struct ProbeResult {
    double sup_norm = 0.0;
    double edge_mass_fraction = 0.0;  // share of |phi|^2 within edge_band of the Neumann edge
    bool converged = false;
    int iterations = 0;
    double energy = 0.0;
};

/**
 * Minimises int |(-i grad + F) phi|^2 - lambda |phi|^2 + (lambda S^2 / 2) |phi|^4
 * with curl F = 1, phi = 0 on the far sides. Half-plane: [0, R] x [-R, R]
 * with magnetic Neumann on x1 = 0 and F = (0, x1). Plane: [-R, R]^2 with the
 * symmetric potential. The start is 1 plus seeded noise.
 */
inline ProbeResult nonlinear_limit_probe(double lambda, double S, double R, ProbeGeometry geom,
                                         const ProbeOptions& o = {}) {
    if (!(lambda >= 0.0) || !(S >= 0.0) || !std::isfinite(lambda) || !std::isfinite(S))
        throw SpecError("nonlinear_limit_probe: lambda and S must be non-negative");
    if (!(R > 0.0)) throw SpecError("nonlinear_limit_probe: R must be positive");
    const double h = 1.0 / o.points_per_unit;
    const bool half = geom == ProbeGeometry::halfplane;
    const Grid g = half ? Grid::with_spacing(R, 2.0 * R, h) : Grid::with_spacing(2.0 * R, 2.0 * R, h);
    EdgeField a = g.edge_field();
    if (half) {
        for (int j = 0; j < g.ny(); ++j)
            for (int i = 0; i <= g.nx(); ++i) a.y(i, j) = g.node(i, j).x;
    } else {
        const double cx = 0.5 * g.lx(), cy = 0.5 * g.ly();
        for (int j = 0; j <= g.ny(); ++j)
            for (int i = 0; i < g.nx(); ++i) a.x(i, j) = -0.5 * (g.node(i, j).y - cy);
        for (int j = 0; j < g.ny(); ++j)
            for (int i = 0; i <= g.nx(); ++i) a.y(i, j) = 0.5 * (g.node(i, j).x - cx);
    }
    SideConditions sides = SideConditions::all_dirichlet();
    if (half) sides.left = Boundary::neumann;
    const MagneticFunctional f(g, {lambda, lambda * S * S, 0.0, 1.0}, sides, a);
    ComplexField phi = g.complex_field();
    Rng rng(o.seed);
    for (int j = 0; j <= g.ny(); ++j)
        for (int i = 0; i <= g.nx(); ++i)
            phi(i, j) = g.node_is_dirichlet(i, j, sides) ? cplx{}
                                                         : cplx(1.0 + 0.1 * rng.symmetric(), 0.1 * rng.symmetric());
    std::vector<double> x = f.pack(phi, a);
    NcgOptions no;
    no.tol = o.grad_tol;
    no.max_iter = o.max_iter;
    const NcgStats st = minimize_ncg(f, x, no);
    phi = f.unpack_psi(x);
    ProbeResult r;
    r.converged = st.converged;
    r.iterations = st.iterations;
    r.energy = st.energy;
    double mass = 0.0, band = 0.0;
    for (int j = 0; j <= g.ny(); ++j) {
        for (int i = 0; i <= g.nx(); ++i) {
            const double m2 = std::norm(phi(i, j));
            r.sup_norm = std::max(r.sup_norm, std::sqrt(m2));
            const double w = g.node_weight(i, j) * m2;
            mass += w;
            if (half && g.node(i, j).x <= o.edge_band) band += w;
        }
    }
    r.edge_mass_fraction = (half && mass > 0.0) ? band / mass : 0.0;
    return r;
}

}  // namespace gllab
