#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "gllab/gauge.hpp"
#include "gllab/phase.hpp"

namespace gllab {

// ---------------------------------------------------------------------------
// Magnetic functional
//
//   E = sum_e W_e |U_e psi_head - psi_tail|^2 / h_e^2
//     + sum_n w_n (-a |psi|^2 + (b/2) |psi|^4)
//     + c sum_cells |cell| (curl A - 1)^2
//
// with U_e = exp(i B A_e h_e). The GL energy is a = b = kappa^2,
// c = kappa^2 H^2, B = kappa H. With A frozen and c = 0 the same code gives
// the limiting functionals and, with b = 0, the quadratic form of the
// magnetic Laplacian.
//
// Unknowns are packed into one flat vector: Re/Im of psi interleaved over
// all nodes, then A on x-edges, then A on y-edges. Gradients are Wirtinger
// style, dE/dRe + i dE/dIm. Dirichlet nodes are held at their current value.
// ---------------------------------------------------------------------------

struct MagneticCoefficients {
    double a = 1.0;
    double b = 1.0;
    double c = 1.0;
    double B = 1.0;
};

class MagneticFunctional {
public:
    MagneticFunctional(Grid g, MagneticCoefficients k, SideConditions sides = {},
                       std::optional<EdgeField> frozen_a = std::nullopt)
        : g_(std::move(g)), k_(k), sides_(sides), frozen_(std::move(frozen_a)) {
        if (frozen_) require_edges(g_, *frozen_, "MagneticFunctional");
        nn_ = static_cast<std::size_t>(g_.nx() + 1) * (g_.ny() + 1);
        nxe_ = static_cast<std::size_t>(g_.nx()) * (g_.ny() + 1);
        nye_ = static_cast<std::size_t>(g_.nx() + 1) * g_.ny();
        wn_.resize(nn_);
        fixed_.assign(nn_, 0);
        for (int j = 0; j <= g_.ny(); ++j) {
            for (int i = 0; i <= g_.nx(); ++i) {
                const std::size_t n = node(i, j);
                wn_[n] = g_.node_weight(i, j);
                fixed_[n] = g_.node_is_dirichlet(i, j, sides_) ? 1 : 0;
            }
        }
        wx_.resize(nxe_);
        wy_.resize(nye_);
        for (int j = 0; j <= g_.ny(); ++j)
            for (int i = 0; i < g_.nx(); ++i) wx_[xe(i, j)] = g_.xedge_weight(i, j);
        for (int j = 0; j < g_.ny(); ++j)
            for (int i = 0; i <= g_.nx(); ++i) wy_[ye(i, j)] = g_.yedge_weight(i, j);
        if (frozen_) cache_links();
    }

    const Grid& grid() const { return g_; }
    const MagneticCoefficients& coefficients() const { return k_; }
    const SideConditions& sides() const { return sides_; }
    bool a_frozen() const { return frozen_.has_value(); }

    std::size_t node_count() const { return nn_; }
    std::size_t size() const { return 2 * nn_ + (frozen_ ? 0 : nxe_ + nye_); }
    bool node_fixed(std::size_t n) const { return fixed_[n] != 0; }
    double node_weight(std::size_t n) const { return wn_[n]; }

    std::size_t node(int i, int j) const { return static_cast<std::size_t>(i) + static_cast<std::size_t>(g_.nx() + 1) * j; }
    std::size_t xe(int i, int j) const { return static_cast<std::size_t>(i) + static_cast<std::size_t>(g_.nx()) * j; }
    std::size_t ye(int i, int j) const { return static_cast<std::size_t>(i) + static_cast<std::size_t>(g_.nx() + 1) * j; }

    std::vector<double> pack(const ComplexField& psi, const EdgeField& a) const {
        require_nodes(g_, psi, "pack");
        std::vector<double> x(size());
        for (std::size_t n = 0; n < nn_; ++n) {
            x[2 * n] = psi[n].real();
            x[2 * n + 1] = psi[n].imag();
        }
        if (!frozen_) {
            require_edges(g_, a, "pack");
            std::copy(a.x.values().begin(), a.x.values().end(), x.begin() + 2 * nn_);
            std::copy(a.y.values().begin(), a.y.values().end(), x.begin() + 2 * nn_ + nxe_);
        }
        return x;
    }

    ComplexField unpack_psi(const std::vector<double>& x) const {
        ComplexField psi = g_.complex_field();
        for (std::size_t n = 0; n < nn_; ++n) psi[n] = cplx(x[2 * n], x[2 * n + 1]);
        return psi;
    }

    EdgeField unpack_a(const std::vector<double>& x) const {
        if (frozen_) return *frozen_;
        EdgeField a = g_.edge_field();
        std::copy(x.begin() + 2 * nn_, x.begin() + 2 * nn_ + nxe_, a.x.values().begin());
        std::copy(x.begin() + 2 * nn_ + nxe_, x.begin() + 2 * nn_ + nxe_ + nye_, a.y.values().begin());
        return a;
    }

    // One edge: c |U psi_h - psi_t|^2 with U = exp(i bh a), accumulating the
    // gradient when g is non-null. Real arithmetic keeps this loop lean.
    static inline double link_term(double c, double bh, double a, const double* x, double* g, std::size_t t,
                                   std::size_t hd, double* ga) {
        double ui;
        double ur;
        unit_phase(bh * a, ui, ur);
        const double hr = x[2 * hd];
        const double hi = x[2 * hd + 1];
        const double uhr = ur * hr - ui * hi;
        const double uhi = ur * hi + ui * hr;
        const double dr = uhr - x[2 * t];
        const double di = uhi - x[2 * t + 1];
        if (g) {
            const double c2 = 2.0 * c;
            g[2 * t] -= c2 * dr;
            g[2 * t + 1] -= c2 * di;
            g[2 * hd] += c2 * (ur * dr + ui * di);
            g[2 * hd + 1] += c2 * (ur * di - ui * dr);
            if (ga) *ga -= c2 * bh * (dr * uhi - di * uhr);
        }
        return c * (dr * dr + di * di);
    }

    // Energy, and its gradient into `grad` when non-null.
    double evaluate(const std::vector<double>& x, std::vector<double>* grad) const {
        const int nx = g_.nx();
        const int ny = g_.ny();
        const double hx = g_.hx();
        const double hy = g_.hy();
        const double bmag = k_.B;
        const double* ax = frozen_ ? frozen_->x.data() : x.data() + 2 * nn_;
        const double* ay = frozen_ ? frozen_->y.data() : x.data() + 2 * nn_ + nxe_;
        double* gax = nullptr;
        double* gay = nullptr;
        if (grad) {
            grad->assign(x.size(), 0.0);
            if (!frozen_) {
                gax = grad->data() + 2 * nn_;
                gay = grad->data() + 2 * nn_ + nxe_;
            }
        }
        const double* xr = x.data();
        double* gr = grad ? grad->data() : nullptr;
        double kin = 0.0;
        const std::size_t ni = static_cast<std::size_t>(nx) + 1;
        for (int j = 0; j <= ny; ++j) {
            const double c = wx_[xe(0, j)] / (hx * hx);
            const std::size_t row = ni * j;
            const double* arow = ax + static_cast<std::size_t>(nx) * j;
            double* garow = gax ? gax + static_cast<std::size_t>(nx) * j : nullptr;
            for (int i = 0; i < nx; ++i)
                kin += link_term(c, bmag * hx, arow[i], xr, gr, row + i, row + i + 1, garow ? garow + i : nullptr);
        }
        for (int j = 0; j < ny; ++j) {
            const std::size_t row = ni * j;
            const double* arow = ay + ni * j;
            double* garow = gay ? gay + ni * j : nullptr;
            const double c_in = wy_[ye(1, j)] / (hy * hy);
            const double c_side = wy_[ye(0, j)] / (hy * hy);
            for (int i = 0; i <= nx; ++i) {
                const double c = (i == 0 || i == nx) ? c_side : c_in;
                kin += link_term(c, bmag * hy, arow[i], xr, gr, row + i, row + ni + i, garow ? garow + i : nullptr);
            }
        }
        double pot = 0.0;
        for (std::size_t n = 0; n < nn_; ++n) {
            const double pr = xr[2 * n];
            const double pi = xr[2 * n + 1];
            const double r2 = pr * pr + pi * pi;
            pot += wn_[n] * (-k_.a * r2 + 0.5 * k_.b * r2 * r2);
            if (gr) {
                const double s = wn_[n] * (-2.0 * k_.a + 2.0 * k_.b * r2);
                gr[2 * n] += s * pr;
                gr[2 * n + 1] += s * pi;
            }
        }
        double mag = 0.0;
        if (k_.c != 0.0) {
            const double area = hx * hy;
            for (int j = 0; j < ny; ++j) {
                for (int i = 0; i < nx; ++i) {
                    const double curl =
                        ((ax[xe(i, j)] - ax[xe(i, j + 1)]) * hx + (ay[ye(i + 1, j)] - ay[ye(i, j)]) * hy) / area;
                    const double r = curl - 1.0;
                    mag += k_.c * area * r * r;
                    if (gax) {
                        const double s = 2.0 * k_.c * area * r;
                        gax[xe(i, j)] += s / hy;
                        gax[xe(i, j + 1)] -= s / hy;
                        gay[ye(i + 1, j)] += s / hx;
                        gay[ye(i, j)] -= s / hx;
                    }
                }
            }
        }
        if (gr)
            for (std::size_t n = 0; n < nn_; ++n)
                if (fixed_[n]) gr[2 * n] = gr[2 * n + 1] = 0.0;
        return kin + pot + mag;
    }

    // Diagonal scaling: psi entries by 1/w_n, A entries by 1/(W_e B^2).
    void precondition(std::vector<double>& v) const {
        for (std::size_t n = 0; n < nn_; ++n) {
            const double s = fixed_[n] ? 0.0 : 1.0 / wn_[n];
            v[2 * n] *= s;
            v[2 * n + 1] *= s;
        }
        if (!frozen_) {
            const double b2 = std::max(k_.B * k_.B, 1e-300);
            for (std::size_t e = 0; e < nxe_; ++e) v[2 * nn_ + e] /= wx_[e] * b2;
            for (std::size_t e = 0; e < nye_; ++e) v[2 * nn_ + nxe_ + e] /= wy_[e] * b2;
        }
    }

    /**
     * Strong-form residual norms from a gradient:
     * psi: R_n = g_n / (2 w_n), r_psi = (sum w |R|^2)^(1/2);
     * A:   S_e = g_e / (2 W_e c), r_A = (sum W S^2)^(1/2).
     */
    double psi_residual(const std::vector<double>& grad) const {
        double s = 0.0;
        for (std::size_t n = 0; n < nn_; ++n)
            s += (grad[2 * n] * grad[2 * n] + grad[2 * n + 1] * grad[2 * n + 1]) / (4.0 * wn_[n]);
        return std::sqrt(s);
    }

    double a_residual(const std::vector<double>& grad) const {
        if (frozen_ || k_.c == 0.0) return 0.0;
        double s = 0.0;
        for (std::size_t e = 0; e < nxe_; ++e) {
            const double v = grad[2 * nn_ + e] / (2.0 * k_.c);
            s += v * v / wx_[e];
        }
        for (std::size_t e = 0; e < nye_; ++e) {
            const double v = grad[2 * nn_ + nxe_ + e] / (2.0 * k_.c);
            s += v * v / wy_[e];
        }
        return std::sqrt(s);
    }

    // Stopping measure: residuals scaled by the natural size of each equation.
    double relative_gradient(const std::vector<double>& grad) const {
        const double root_area = std::sqrt(g_.area());
        const double rp = psi_residual(grad) / (std::max(k_.a, 1.0) * root_area);
        const double ra = a_residual(grad) / root_area;
        return std::max(rp, ra);
    }

    /**
     * y = K psi for the Hermitian matrix of the kinetic quadratic form,
     * sum_e W_e |U psi_h - psi_t|^2 / h^2 = <psi, K psi>. Dirichlet rows and
     * columns are dropped (treated as zero).
     */
    void kinetic_apply(const std::vector<cplx>& v, std::vector<cplx>& y) const {
        if (!frozen_) throw SpecError("kinetic_apply: vector potential must be frozen");
        y.assign(nn_, cplx{});
        const double hx = g_.hx();
        const double hy = g_.hy();
        auto edge = [&](std::size_t t, std::size_t hd, const cplx& u, double c) {
            const cplx vt = fixed_[t] ? cplx{} : v[t];
            const cplx vh = fixed_[hd] ? cplx{} : v[hd];
            y[t] += c * (vt - u * vh);
            y[hd] += c * (vh - std::conj(u) * vt);
        };
        for (int j = 0; j <= g_.ny(); ++j)
            for (int i = 0; i < g_.nx(); ++i)
                edge(node(i, j), node(i + 1, j), ux_[xe(i, j)], wx_[xe(i, j)] / (hx * hx));
        for (int j = 0; j < g_.ny(); ++j)
            for (int i = 0; i <= g_.nx(); ++i)
                edge(node(i, j), node(i, j + 1), uy_[ye(i, j)], wy_[ye(i, j)] / (hy * hy));
        for (std::size_t n = 0; n < nn_; ++n)
            if (fixed_[n]) y[n] = 0.0;
    }

private:
    Grid g_;
    MagneticCoefficients k_;
    SideConditions sides_;
    std::optional<EdgeField> frozen_;
    std::size_t nn_ = 0, nxe_ = 0, nye_ = 0;
    std::vector<double> wn_, wx_, wy_;
    std::vector<unsigned char> fixed_;
    std::vector<cplx> ux_, uy_;  // link phases of a frozen potential

    void cache_links() {
        ux_.resize(nxe_);
        uy_.resize(nye_);
        for (std::size_t e = 0; e < nxe_; ++e) ux_[e] = std::polar(1.0, k_.B * frozen_->x[e] * g_.hx());
        for (std::size_t e = 0; e < nye_; ++e) uy_[e] = std::polar(1.0, k_.B * frozen_->y[e] * g_.hy());
    }
};

// ---------------------------------------------------------------------------
// Nonlinear conjugate gradients (Polak-Ribiere+ with restarts).
//
// Step acceptance is Armijo, or the approximate Wolfe test of Hager and
// Zhang once energy differences reach roundoff level:
//     E(t) <= E(0) + eps |E(0)|,  sigma E'(0) <= E'(t) <= (2 delta - 1) E'(0).
// ---------------------------------------------------------------------------

struct NcgOptions {
    double tol = 1e-6;
    int max_iter = 20000;
    int hook_every = 50;  // symmetry hook period; 0 disables
    double armijo = 1e-4;
    double wolfe_delta = 0.1;
    double wolfe_sigma = 0.9;
    double energy_eps = 1e-12;
};

struct NcgStats {
    int iterations = 0;
    int evaluations = 0;
    double energy = 0.0;
    double rel_grad = 0.0;
    bool converged = false;
};

// Moves x to an equivalent point of a symmetry of the functional and maps the
// listed tangent vectors (search direction, gradient) along with it.
using SymmetryHook = std::function<void(std::vector<double>& x, const std::vector<std::vector<double>*>& tangents)>;

template <class Functional>
NcgStats minimize_ncg(const Functional& f, std::vector<double>& x, const NcgOptions& opt,
                      const SymmetryHook& hook = {}) {
    NcgStats st;
    const std::size_t n = x.size();
    std::vector<double> g(n), z(n), d(n), xt(n), gt(n), xp(n), gp(n);
    double e = f.evaluate(x, &g);
    ++st.evaluations;
    double rel = f.relative_gradient(g);
    z = g;
    f.precondition(z);
    for (std::size_t k = 0; k < n; ++k) d[k] = -z[k];
    double gz = dot(g, z);
    double step = -1.0;
    int since_hook = 0;
    int failures = 0;

    while (rel > opt.tol && st.iterations < opt.max_iter) {
        if (hook && opt.hook_every > 0 && since_hook >= opt.hook_every) {
            hook(x, {&d});
            e = f.evaluate(x, &g);
            ++st.evaluations;
            rel = f.relative_gradient(g);
            z = g;
            f.precondition(z);
            gz = dot(g, z);
            since_hook = 0;
            if (rel <= opt.tol) break;
        }
        double slope = dot(g, d);
        if (!(slope < 0.0)) {
            for (std::size_t k = 0; k < n; ++k) d[k] = -z[k];
            slope = -gz;
            if (!(slope < 0.0)) break;
        }
        if (step <= 0.0) {
            double dmax = 0.0;
            for (double v : d) dmax = std::max(dmax, std::abs(v));
            step = 1e-2 / std::max(dmax, 1e-300);
        }
        const double e_slack = opt.energy_eps * std::abs(e);
        auto acceptable = [&](double t, double et, double st_slope) {
            if (et <= e + opt.armijo * t * slope) return true;
            return et <= e + e_slack && st_slope >= opt.wolfe_sigma * slope &&
                   st_slope <= (2.0 * opt.wolfe_delta - 1.0) * slope;
        };
        // Probe at the previous step length, then try the secant minimiser
        // of the directional derivative.
        const double t0 = step;
        for (std::size_t k = 0; k < n; ++k) xp[k] = x[k] + t0 * d[k];
        const double e0 = f.evaluate(xp, &gp);
        ++st.evaluations;
        const double s0 = dot(gp, d);
        double t = (s0 > slope) ? t0 * slope / (slope - s0) : 4.0 * t0;
        t = std::min(t, 16.0 * t0);

        bool accepted = false;
        double et = 0.0;
        for (int bt = 0; bt < 40 && !accepted; ++bt) {
            for (std::size_t k = 0; k < n; ++k) xt[k] = x[k] + t * d[k];
            et = f.evaluate(xt, &gt);
            ++st.evaluations;
            if (acceptable(t, et, dot(gt, d))) {
                accepted = true;
            } else if (bt == 0 && acceptable(t0, e0, s0)) {
                xt = xp;
                gt = gp;
                et = e0;
                t = t0;
                accepted = true;
            } else {
                t = 0.5 * std::min(t, t0);
            }
        }
        if (!accepted) {
            // Fall back to steepest descent before giving up.
            if (++failures > 2) break;
            for (std::size_t k = 0; k < n; ++k) d[k] = -z[k];
            step = -1.0;
            continue;
        }
        failures = 0;
        step = t;
        x.swap(xt);
        std::vector<double> z_new = gt;
        f.precondition(z_new);
        double num = 0.0;
        for (std::size_t k = 0; k < n; ++k) num += gt[k] * (z_new[k] - z[k]);
        const double gz_new = dot(gt, z_new);
        const double beta = std::max(0.0, num / gz);
        for (std::size_t k = 0; k < n; ++k) d[k] = -z_new[k] + beta * d[k];
        g.swap(gt);
        z.swap(z_new);
        gz = gz_new;
        e = et;
        rel = f.relative_gradient(g);
        ++st.iterations;
        ++since_hook;
    }
    st.energy = e;
    st.rel_grad = rel;
    st.converged = rel <= opt.tol;
    return st;
}

// ---------------------------------------------------------------------------
// Ginzburg-Landau state and solver
// ---------------------------------------------------------------------------

struct GLState {
    Grid grid;
    ComplexField psi;
    EdgeField a;
    double kappa = 1.0;
    double H = 1.0;

    double B() const { return kappa * H; }

    void validate() const {
        require_nodes(grid, psi, "GLState");
        require_edges(grid, a, "GLState");
        if (!(kappa > 0.0) || !(H > 0.0) || !std::isfinite(kappa) || !std::isfinite(H))
            throw SpecError("GLState: kappa and H must be positive and finite");
    }
};

inline MagneticFunctional gl_functional(const GLState& s) {
    const double k2 = s.kappa * s.kappa;
    return MagneticFunctional(s.grid, {k2, k2, k2 * s.H * s.H, s.kappa * s.H});
}

enum class InitKind { normal, uniform, seeded_noise };

struct SolveOptions {
    double grad_tol = 1e-6;
    int max_iter = 20000;
    InitKind init = InitKind::seeded_noise;
    std::uint64_t seed = 1;
    double noise_amp = 0.1;
    int reproject_every = 50;

    void validate() const {
        if (!(grad_tol > 0.0) || grad_tol > 1e-3) throw SpecError("SolveOptions: grad_tol must lie in (0, 1e-3]");
        if (max_iter < 0) throw SpecError("SolveOptions: max_iter must be >= 0");
        if (!(noise_amp >= 0.0) || noise_amp > 0.5) throw SpecError("SolveOptions: noise_amp must lie in [0, 0.5]");
        if (reproject_every < 0) throw SpecError("SolveOptions: reproject_every must be >= 0");
    }
};

struct ResidualReport {
    double r_psi = 0.0;
    double r_A = 0.0;
    double r_bc_psi = 0.0;
    double r_bc_curl = 0.0;
    double rel_grad = 0.0;
};

struct SolveStats {
    int iterations = 0;
    int evaluations = 0;
    double energy = 0.0;
    double rel_grad = 0.0;
    bool converged = false;
};

struct SolveResult {
    GLState state;
    ResidualReport residuals;
    SolveStats stats;
};

// Uniform doubles in [0, 1) with 53 random bits, identical on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
    double symmetric() { return 2.0 * uniform() - 1.0; }

private:
    std::mt19937_64 eng_;
};

inline GLState initial_state(const Grid& g, double kappa, double H, const SolveOptions& opts) {
    opts.validate();
    GLState s{g, g.complex_field(), reference_potential(g), kappa, H};
    s.validate();
    Rng rng(opts.seed);
    const cplx base = opts.init == InitKind::normal ? cplx{} : cplx{1.0};
    for (std::size_t n = 0; n < s.psi.size(); ++n) {
        cplx v = base;
        if (opts.init != InitKind::uniform && opts.noise_amp > 0.0) {
            const double re = rng.symmetric();
            const double im = rng.symmetric();
            v += opts.noise_amp * cplx(re, im);
        }
        s.psi[n] = v;
    }
    return s;
}

inline double energy(const GLState& s) {
    s.validate();
    const MagneticFunctional f = gl_functional(s);
    return f.evaluate(f.pack(s.psi, s.a), nullptr);
}

struct GLGradient {
    ComplexField dpsi;
    EdgeField da;
};

inline GLGradient gradient(const GLState& s) {
    s.validate();
    const MagneticFunctional f = gl_functional(s);
    std::vector<double> g;
    f.evaluate(f.pack(s.psi, s.a), &g);
    GLGradient out{f.unpack_psi(g), g.size() > 2 * f.node_count() ? f.unpack_a(g) : s.grid.edge_field()};
    return out;
}

// Move (psi, A) to London gauge: A - grad chi, psi exp(+i B chi).
inline void project_state(GLState& s, const PoissonOptions& opts = {1e-11, 20000}) {
    const LondonProjection p = london_gauge(s.grid, s.a, opts);
    s.a = p.a;
    for (std::size_t n = 0; n < s.psi.size(); ++n) s.psi[n] *= std::polar(1.0, s.B() * p.chi[n]);
}

inline ResidualReport residuals(const GLState& s) {
    s.validate();
    const MagneticFunctional f = gl_functional(s);
    std::vector<double> g;
    f.evaluate(f.pack(s.psi, s.a), &g);
    ResidualReport r;
    r.r_psi = f.psi_residual(g);
    r.r_A = f.a_residual(g);
    r.rel_grad = f.relative_gradient(g);

    double sup = 0.0;
    for (const cplx& v : s.psi.values()) sup = std::max(sup, std::abs(v));
    if (sup > 0.0) {
        // (h/2) R_n at a boundary node is the defect of the discrete
        // magnetic Neumann flux balance.
        const Grid& gr = s.grid;
        for (int j = 0; j <= gr.ny(); ++j) {
            for (int i = 0; i <= gr.nx(); ++i) {
                if (!gr.on_boundary(i, j)) continue;
                const std::size_t n = f.node(i, j);
                const double rn = std::hypot(g[2 * n], g[2 * n + 1]) / (2.0 * gr.node_weight(i, j));
                const double h = std::min(gr.hx(), gr.hy());
                r.r_bc_psi = std::max(r.r_bc_psi, 0.5 * h * rn / (s.kappa * sup));
            }
        }
    }
    // curl A - 1 extrapolated to each side from the two nearest cell rows.
    const CellField c = discrete_curl(s.grid, s.a);
    const int nx = s.grid.nx();
    const int ny = s.grid.ny();
    auto bump = [&](double c0, double c1) { r.r_bc_curl = std::max(r.r_bc_curl, std::abs(1.5 * c0 - 0.5 * c1 - 1.0)); };
    for (int i = 0; i < nx; ++i) {
        bump(c(i, 0), c(i, 1));
        bump(c(i, ny - 1), c(i, ny - 2));
    }
    for (int j = 0; j < ny; ++j) {
        bump(c(0, j), c(1, j));
        bump(c(nx - 1, j), c(nx - 2, j));
    }
    return r;
}

/**
 * Minimise from the given state. The result is in London gauge; if the
 * tolerance is not met the best state found is returned with
 * stats.converged = false.
 */
inline SolveResult minimize(const GLState& start, const SolveOptions& opts) {
    opts.validate();
    start.validate();
    GLState s = start;
    const MagneticFunctional f = gl_functional(s);
    std::vector<double> x = f.pack(s.psi, s.a);
    NcgOptions no;
    no.tol = opts.grad_tol;
    no.max_iter = opts.max_iter;
    no.hook_every = opts.reproject_every;
    // London re-projection; the search direction is a tangent vector, so its
    // psi part picks up the same phase and its A part is unchanged.
    auto hook = [&](std::vector<double>& v, const std::vector<std::vector<double>*>& tangents) {
        const LondonProjection p = london_gauge(s.grid, f.unpack_a(v));
        const std::size_t nn = f.node_count();
        auto rotate = [&](std::vector<double>& w) {
            for (std::size_t k = 0; k < nn; ++k) {
                const cplx r = cplx(w[2 * k], w[2 * k + 1]) * std::polar(1.0, s.B() * p.chi[k]);
                w[2 * k] = r.real();
                w[2 * k + 1] = r.imag();
            }
        };
        rotate(v);
        std::copy(p.a.x.values().begin(), p.a.x.values().end(), v.begin() + 2 * nn);
        std::copy(p.a.y.values().begin(), p.a.y.values().end(), v.begin() + 2 * nn + p.a.x.size());
        for (auto* t : tangents) rotate(*t);
    };
    const NcgStats st = minimize_ncg(f, x, no, hook);
    s.psi = f.unpack_psi(x);
    s.a = f.unpack_a(x);
    project_state(s);
    SolveResult out{s, residuals(s), {}};
    out.stats.iterations = st.iterations;
    out.stats.evaluations = st.evaluations;
    out.stats.energy = energy(s);
    out.stats.rel_grad = out.residuals.rel_grad;
    out.stats.converged = out.residuals.rel_grad <= opts.grad_tol;
    return out;
}

/**
 * Transfer a state to a grid with twice the resolution. Edge values are
 * copied onto both halves of each coarse edge and averaged across the new
 * midlines; psi is interpolated after removing the link phase, so a locally
 * gauge-covariant profile stays covariant.
 */
inline GLState prolong(const GLState& s) {
    s.validate();
    const Grid& c = s.grid;
    const Grid f(2 * c.nx(), 2 * c.ny(), c.lx(), c.ly());
    const double bm = s.B();
    EdgeField a = f.edge_field();
    for (int j = 0; j <= f.ny(); ++j) {
        for (int i = 0; i < f.nx(); ++i) {
            const int ci = i / 2;
            a.x(i, j) = (j % 2 == 0) ? s.a.x(ci, j / 2) : 0.5 * (s.a.x(ci, j / 2) + s.a.x(ci, j / 2 + 1));
        }
    }
    for (int j = 0; j < f.ny(); ++j) {
        for (int i = 0; i <= f.nx(); ++i) {
            const int cj = j / 2;
            a.y(i, j) = (i % 2 == 0) ? s.a.y(i / 2, cj) : 0.5 * (s.a.y(i / 2, cj) + s.a.y(i / 2 + 1, cj));
        }
    }
    ComplexField psi = f.complex_field();
    auto half = [&](cplx tail, cplx head, double ae, double h) {
        const double th = bm * ae * h;
        return 0.5 * (std::polar(1.0, -0.5 * th) * tail + std::polar(1.0, 0.5 * th) * head);
    };
    for (int j = 0; j <= c.ny(); ++j)
        for (int i = 0; i <= c.nx(); ++i) psi(2 * i, 2 * j) = s.psi(i, j);
    for (int j = 0; j <= c.ny(); ++j)
        for (int i = 0; i < c.nx(); ++i)
            psi(2 * i + 1, 2 * j) = half(s.psi(i, j), s.psi(i + 1, j), s.a.x(i, j), c.hx());
    for (int j = 0; j < c.ny(); ++j)
        for (int i = 0; i <= c.nx(); ++i)
            psi(2 * i, 2 * j + 1) = half(s.psi(i, j), s.psi(i, j + 1), s.a.y(i, j), c.hy());
    for (int j = 0; j < c.ny(); ++j)
        for (int i = 0; i < c.nx(); ++i)
            psi(2 * i + 1, 2 * j + 1) =
                half(psi(2 * i + 1, 2 * j), psi(2 * i + 1, 2 * j + 2), a.y(2 * i + 1, 2 * j), c.hy());
    GLState out{f, psi, a, s.kappa, s.H};
    project_state(out);
    return out;
}

/**
 * Solve on `levels` successively doubled grids ending at `g`, starting from
 * the configured initial state on the coarsest one.
 */
inline SolveResult solve(const Grid& g, double kappa, double H, const SolveOptions& opts, int levels = 1) {
    opts.validate();
    if (levels < 1) throw SpecError("solve: levels must be >= 1");
    int div = 1 << (levels - 1);
    while (div > 1 && (g.nx() % div != 0 || g.ny() % div != 0 || g.nx() / div < 8 || g.ny() / div < 8)) div /= 2;
    const Grid coarse(g.nx() / div, g.ny() / div, g.lx(), g.ly());
    GLState s = initial_state(coarse, kappa, H, opts);
    SolveResult r = minimize(s, opts);
    int iters = r.stats.iterations;
    int evals = r.stats.evaluations;
    while (r.state.grid.nx() < g.nx()) {
        r = minimize(prolong(r.state), opts);
        iters += r.stats.iterations;
        evals += r.stats.evaluations;
    }
    r.stats.iterations = iters;
    r.stats.evaluations = evals;
    return r;
}

}  // namespace gllab
