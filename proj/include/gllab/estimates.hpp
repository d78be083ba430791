#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "gllab/identity.hpp"
#include "gllab/norms.hpp"

namespace gllab {

// One inequality: LHS <= C * RHS with C set to 1.
struct EstimateRow {
    std::string id;
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
    bool indeterminate = false;  // rhs == 0
    std::string norm;            // how the LHS was measured
};

struct NormSettings {
    double alpha = 0.5;
    double p = 4.0;
    bool corner_exclusion = false;
    std::size_t exhaustive_limit = 129 * 129;

    void validate() const {
        if (!(alpha > 0.0 && alpha < 1.0)) throw SpecError("NormSettings: alpha must lie in (0, 1)");
        if (!(p > 1.0) || std::isinf(p)) throw SpecError("NormSettings: p must lie in (1, inf)");
    }
};

struct EstimateReport {
    double kappa = 0.0;
    double H = 0.0;
    int grid_n = 0;
    bool degenerate = false;     // psi == 0
    bool in_regime = true;       // asymptotic rows only
    NormSettings norms;
    std::vector<EstimateRow> rows;

    const EstimateRow* find(const std::string& id) const {
        for (const auto& r : rows)
            if (r.id == id) return &r;
        return nullptr;
    }
};

inline EstimateRow make_row(std::string id, double lhs, double rhs, std::string norm) {
    EstimateRow r{std::move(id), lhs, rhs, 0.0, false, std::move(norm)};
    if (rhs > 0.0)
        r.ratio = lhs / rhs;
    else
        r.indeterminate = true;
    return r;
}

namespace detail {

inline double sup_abs(const ComplexField& psi) {
    double m = 0.0;
    for (const cplx& v : psi.values()) m = std::max(m, std::abs(v));
    return m;
}

inline std::string fmt_norm(const char* kind, double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%s%g", kind, v);
    return buf;
}

}  // namespace detail

/**
 * Bounds on solutions of the GL system, constants set to 1:
 *   infini        |psi|_inf <= 1
 *   cine          |(-i grad + B A) psi|_2 <= kappa |psi|_2
 *   ineqimproved  |curl A - 1|_2 <= |psi|_inf |psi|_2 / H
 *   dd1           sum_{j,k} |D_j D_k psi|_2 <= (1 + kappa H + kappa^2) |psi|_2
 *   caf1, caf2    C^{0,alpha}, W^{1,p} norms of curl A - 1 <= M
 *   a2, af1       W^{2,p}, C^{1,alpha} norms of A - F <= M
 * with M = (1 + kappa H + kappa^2) / (kappa H) |psi|_2 |psi|_inf.
 */
inline EstimateReport evaluate(const GLState& s, const std::optional<ResidualReport>& residual,
                               const NormSettings& ns = {}, const std::optional<EdgeField>& reference = std::nullopt) {
    if (!residual) throw SpecError("evaluate: state carries no residual report");
    s.validate();
    ns.validate();
    const Grid& g = s.grid;
    const double k = s.kappa, H = s.H, B = s.B();
    EstimateReport rep;
    rep.kappa = k;
    rep.H = H;
    rep.grid_n = g.nx();
    rep.norms = ns;
    const double sup = detail::sup_abs(s.psi);
    rep.degenerate = sup == 0.0;
    const double l2 = norm(g, s.psi, NormSpec::lp(2.0));

    double kin = 0.0;
    const EdgeComplexField d = covariant_diff(g, s.psi, s.a, B);
    for (int j = 0; j <= g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) kin += g.xedge_weight(i, j) * std::norm(d.x(i, j));
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i <= g.nx(); ++i) kin += g.yedge_weight(i, j) * std::norm(d.y(i, j));

    CellField c = discrete_curl(g, s.a);
    for (auto& v : c.values()) v -= 1.0;
    const EdgeField f = reference ? *reference : reference_potential(g);
    const EdgeField af = s.a - f;

    const CovariantHessian hs = covariant_hessian(g, s.psi, s.a, B);
    double dd = 0.0;
    for (const ComplexField* n : {&hs.d11, &hs.d22}) {
        double q = 0.0;
        for (int j = 0; j <= g.ny(); ++j)
            for (int i = 0; i <= g.nx(); ++i) q += g.node_weight(i, j) * std::norm((*n)(i, j));
        dd += std::sqrt(q);
    }
    for (const CellComplexField* m : {&hs.d12, &hs.d21}) {
        double q = 0.0;
        for (const cplx& v : m->values()) q += g.cell_area() * std::norm(v);
        dd += std::sqrt(q);
    }

    NormSpec holder0 = NormSpec::holder(0, ns.alpha);
    NormSpec holder1 = NormSpec::holder(1, ns.alpha);
    NormSpec w1 = NormSpec::w1p(ns.p);
    NormSpec w2 = NormSpec::w2p(ns.p);
    for (NormSpec* sp : {&holder0, &holder1, &w1, &w2}) {
        sp->corner_exclusion = ns.corner_exclusion;
        sp->exhaustive_limit = ns.exhaustive_limit;
    }
    const double poly = 1.0 + B + k * k;
    const double m = poly / B * l2 * sup;

    rep.rows.push_back(make_row("infini", sup, 1.0, "sup"));
    rep.rows.push_back(make_row("cine", std::sqrt(kin), k * l2, "L2"));
    rep.rows.push_back(make_row("ineqimproved", norm(g, c, NormSpec::lp(2.0)), sup * l2 / H, "L2"));
    rep.rows.push_back(make_row("dd1", dd, poly * l2, "L2"));
    rep.rows.push_back(make_row("caf1", norm(g, c, holder0), m, detail::fmt_norm("C0,", ns.alpha)));
    rep.rows.push_back(make_row("caf2", norm(g, c, w1), m, detail::fmt_norm("W1,", ns.p)));
    rep.rows.push_back(make_row("a2", norm(g, af, w2), m, detail::fmt_norm("W2,", ns.p)));
    rep.rows.push_back(make_row("af1", norm(g, af, holder1), m, detail::fmt_norm("C1,", ns.alpha)));
    return rep;
}

inline EstimateReport evaluate(const SolveResult& r, const NormSettings& ns = {}) {
    return evaluate(r.state, r.residuals, ns);
}

struct AsymptoticRegime {
    double lambda_min = 0.5;
    double lambda_max = 1.25;
    double kappa_min = 4.0;

    bool contains(double kappa, double H) const {
        const double rho = kappa / H;
        return kappa >= kappa_min && rho >= lambda_min && rho <= lambda_max;
    }
};

/**
 * Large-field rows, constants set to 1:
 *   first   sup |(-i grad + B A) psi| <= sqrt(kappa H) |psi|_inf
 *   second  |curl A - 1|_{C^1} <= |psi|_inf^2 / sqrt(kappa H)
 *   third   |curl A - 1|_{C^2} <= |psi|_inf^2
 *   prop41  |psi|_inf (trend row, rhs 1)
 *   prop44  sqrt(kappa H) dist(argmax |psi|, boundary) (rhs 1)
 */
inline EstimateReport evaluate_asymptotic(const GLState& s, const AsymptoticRegime& regime = {},
                                          const NormSettings& ns = {}) {
    s.validate();
    const Grid& g = s.grid;
    const double B = s.B();
    const double sb = std::sqrt(B);
    EstimateReport rep;
    rep.kappa = s.kappa;
    rep.H = s.H;
    rep.grid_n = g.nx();
    rep.norms = ns;
    rep.in_regime = regime.contains(s.kappa, s.H);
    const double sup = detail::sup_abs(s.psi);
    rep.degenerate = sup == 0.0;
    if (rep.degenerate) return rep;

    const CellField dm = covariant_modulus(g, s.psi, s.a, B);
    double dsup = 0.0;
    for (double v : dm.values()) dsup = std::max(dsup, v);
    CellField c = discrete_curl(g, s.a);
    for (auto& v : c.values()) v -= 1.0;
    NormSpec c1 = NormSpec::c1();
    NormSpec c2 = NormSpec::c2();
    c1.corner_exclusion = c2.corner_exclusion = ns.corner_exclusion;
    const ArgmaxResult am = argmax_distance(g, s.psi);

    rep.rows.push_back(make_row("first", dsup, sb * sup, "sup"));
    rep.rows.push_back(make_row("second", norm(g, c, c1), sup * sup / sb, "C1"));
    rep.rows.push_back(make_row("third", norm(g, c, c2), sup * sup, "C2"));
    rep.rows.push_back(make_row("prop41", sup, 1.0, "sup"));
    rep.rows.push_back(make_row("prop44", sb * am.distance, 1.0, "dist"));
    return rep;
}

}  // namespace gllab
