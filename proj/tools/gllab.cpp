#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gllab/blowup.hpp"
#include "gllab/config.hpp"
#include "gllab/estimates.hpp"
#include "gllab/identity.hpp"
#include "gllab/io.hpp"
#include "gllab/spectral.hpp"
#include "gllab/sweep.hpp"

namespace fs = std::filesystem;
using namespace gllab;

namespace {

enum Exit { ok = 0, verdict_failed = 1, usage = 2, nonconvergence = 3 };

struct Global {
    std::string config_path;
    std::optional<int> jobs;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
};

// Flag, then config key, then default; every resolved value is recorded for
// the provenance hash.
class Resolver {
public:
    Resolver(const Config& c, std::string command) : cfg_(c) { seen_["command"] = std::move(command); }

    double num(const std::optional<double>& flag, const std::string& key, double def) {
        const double v = flag ? *flag : cfg_.number(key, def);
        seen_[key] = fmt(v);
        return v;
    }
    int integer(const std::optional<int>& flag, const std::string& key, int def) {
        const int v = flag ? *flag : cfg_.integer(key, def);
        seen_[key] = std::to_string(v);
        return v;
    }
    bool boolean(const std::optional<bool>& flag, const std::string& key, bool def) {
        const bool v = flag ? *flag : cfg_.boolean(key, def);
        seen_[key] = v ? "true" : "false";
        return v;
    }
    std::string str(const std::optional<std::string>& flag, const std::string& key, const std::string& def) {
        std::string v = flag ? *flag : cfg_.string(key, def);
        seen_[key] = v;
        return v;
    }
    std::vector<double> list(const std::optional<std::vector<double>>& flag, const std::string& key,
                             const std::vector<double>& def) {
        std::vector<double> v = flag ? *flag : cfg_.list(key, def);
        std::string s;
        for (double x : v) s += fmt(x) + ";";
        seen_[key] = s;
        return v;
    }

    Provenance provenance(std::uint64_t seed) const {
        std::string s;
        for (const auto& [k, v] : seen_) s += k + "=" + v + "\n";
        return {s, seed};
    }

private:
    const Config& cfg_;
    std::map<std::string, std::string> seen_;
};

struct Common {
    Config cfg;
    std::uint64_t seed = 1;
    std::string out;
    int jobs = 1;
};

Common resolve_common(const Global& g) {
    Common c;
    if (!g.config_path.empty()) {
        try {
            c.cfg = Config::parse(read_text(g.config_path));
        } catch (const IoError& e) {
            throw ConfigError(e.what());
        }
    }
    const int s = g.seed ? static_cast<int>(*g.seed) : c.cfg.integer("seed", 1);
    if (s < 0) throw ConfigError("seed must be non-negative");
    c.seed = g.seed ? *g.seed : static_cast<std::uint64_t>(s);
    c.out = g.out ? *g.out : c.cfg.string("out", "");
    const int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    c.jobs = g.jobs ? *g.jobs : c.cfg.integer("jobs", hw);
    if (c.jobs < 1) throw ConfigError("jobs must be >= 1");
    return c;
}

void ensure_out(const std::string& out) {
    if (!out.empty()) fs::create_directories(out);
}

std::string out_path(const std::string& out, const std::string& name) { return (fs::path(out) / name).string(); }

InitKind parse_init(const std::string& s) {
    if (s == "normal") return InitKind::normal;
    if (s == "uniform") return InitKind::uniform;
    if (s == "noise" || s == "seeded_noise") return InitKind::seeded_noise;
    throw ConfigError("init must be normal, uniform or noise, got '" + s + "'");
}

void print_report(const EstimateReport& rep) {
    for (const auto& e : rep.rows) {
        std::printf("  %-13s lhs %-13.6g rhs %-13.6g ratio ", e.id.c_str(), e.lhs, e.rhs);
        if (e.indeterminate)
            std::printf("indeterminate\n");
        else
            std::printf("%.6g\n", e.ratio);
    }
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

struct SolveFlags {
    std::optional<double> kappa, H, grad_tol, noise, alpha, p;
    std::optional<int> n, levels, max_iter, reproject_every;
    std::optional<std::string> init;
    std::optional<bool> corner;
};

void add_solve_flags(CLI::App* sc, SolveFlags& f) {
    sc->add_option("--kappa", f.kappa, "GL parameter kappa");
    sc->add_option("--H", f.H, "applied field H");
    sc->add_option("--n", f.n, "cells per side");
    sc->add_option("--levels", f.levels, "multilevel depth");
    sc->add_option("--grad-tol", f.grad_tol, "relative gradient tolerance");
    sc->add_option("--max-iter", f.max_iter, "iteration cap per level");
    sc->add_option("--init", f.init, "normal, uniform or noise");
    sc->add_option("--noise", f.noise, "noise amplitude");
    sc->add_option("--reproject-every", f.reproject_every, "London re-projection period");
}

void add_norm_flags(CLI::App* sc, SolveFlags& f) {
    sc->add_option("--alpha", f.alpha, "Hoelder exponent");
    sc->add_option("--p", f.p, "Sobolev exponent");
    sc->add_option("--corner-exclusion", f.corner, "drop points near corners from sup/Hoelder scans");
}

struct SolveSetup {
    double kappa, H;
    int n, levels;
    SolveOptions opts;
};

SolveSetup resolve_solve(Resolver& r, const SolveFlags& f, std::uint64_t seed) {
    SolveSetup s;
    s.kappa = r.num(f.kappa, "solve.kappa", 4.0);
    s.H = r.num(f.H, "solve.H", 4.0);
    s.n = r.integer(f.n, "solve.n", 64);
    s.levels = r.integer(f.levels, "solve.levels", 1);
    s.opts.grad_tol = r.num(f.grad_tol, "solve.grad_tol", s.opts.grad_tol);
    s.opts.max_iter = r.integer(f.max_iter, "solve.max_iter", s.opts.max_iter);
    s.opts.init = parse_init(r.str(f.init, "solve.init", "noise"));
    s.opts.noise_amp = r.num(f.noise, "solve.noise", s.opts.noise_amp);
    s.opts.reproject_every = r.integer(f.reproject_every, "solve.reproject_every", s.opts.reproject_every);
    s.opts.seed = seed;
    if (!(s.kappa > 0.0) || !(s.H > 0.0)) throw ConfigError("solve: kappa and H must be positive");
    if (s.n < 8) throw ConfigError("solve: n must be >= 8");
    try {
        s.opts.validate();
    } catch (const SpecError& e) {
        throw ConfigError(e.what());
    }
    return s;
}

NormSettings resolve_norms(Resolver& r, const SolveFlags& f) {
    NormSettings ns;
    ns.alpha = r.num(f.alpha, "norms.alpha", ns.alpha);
    ns.p = r.num(f.p, "norms.p", ns.p);
    ns.corner_exclusion = r.boolean(f.corner, "norms.corner_exclusion", ns.corner_exclusion);
    try {
        ns.validate();
    } catch (const SpecError& e) {
        throw ConfigError(e.what());
    }
    return ns;
}

int cmd_solve(const Global& g, const SolveFlags& f) {
    const Common c = resolve_common(g);
    Resolver r(c.cfg, "solve");
    const SolveSetup s = resolve_solve(r, f, c.seed);
    const NormSettings ns = resolve_norms(r, f);
    const Provenance p = r.provenance(c.seed);

    const SolveResult res = solve(Grid::square(s.n), s.kappa, s.H, s.opts, s.levels);
    const EstimateReport base = evaluate(res.state, res.residuals, ns);
    const EstimateReport asym = evaluate_asymptotic(res.state, {}, ns);
    std::printf("%s\n", p.line("").c_str());
    std::printf("kappa %g H %g n %d converged %d iterations %d rel_grad %.3e energy %.10g\n", s.kappa, s.H, s.n,
                res.stats.converged, res.stats.iterations, res.stats.rel_grad, res.stats.energy);
    print_report(base);
    print_report(asym);

    if (!c.out.empty()) {
        ensure_out(c.out);
        nlohmann::ordered_json j;
        j["provenance"] = p.json();
        j["kappa"] = s.kappa;
        j["H"] = s.H;
        j["grid_n"] = s.n;
        j["converged"] = res.stats.converged;
        j["rel_grad"] = res.stats.rel_grad;
        j["energy"] = res.stats.energy;
        j["residuals"] = {{"r_psi", res.residuals.r_psi}, {"r_A", res.residuals.r_A},
                          {"r_bc_psi", res.residuals.r_bc_psi}, {"r_bc_curl", res.residuals.r_bc_curl}};
        j["estimates"] = report_json(base);
        j["asymptotic"] = report_json(asym);
        write_text(out_path(c.out, "solve.json"), j.dump(2) + "\n");
        write_text(out_path(c.out, "psi.csv"), snapshot_csv(res.state.grid, res.state.psi, p));
        write_text(out_path(c.out, "a.csv"), snapshot_csv(res.state.grid, res.state.a, p));
        write_checkpoint(out_path(c.out, "state.bin"), res.state, p);
    }
    if (!res.stats.converged) {
        std::fprintf(stderr, "solve: not converged (rel_grad %.3e > %.3e)\n", res.stats.rel_grad, s.opts.grad_tol);
        return nonconvergence;
    }
    const EstimateRow* inf = base.find("infini");
    const EstimateRow* cine = base.find("cine");
    bool pass = inf->lhs <= 1.0 + 1e-6;
    if (!cine->indeterminate) pass = pass && cine->ratio <= 1.0 + 1e-3;
    std::printf("verdict solver-contracts %s\n", pass ? "PASS" : "FAIL");
    return pass ? ok : verdict_failed;
}

// ---------------------------------------------------------------------------
// sweep and report
// ---------------------------------------------------------------------------

struct SweepFlags {
    std::optional<std::vector<double>> kappas, rhos;
    std::optional<double> grid_rule, family_spread, edge_distance_bound, theta0_rho;
    std::optional<int> min_n, max_n;
    std::optional<bool> checkpoints;
    SolveFlags solve;
};

SweepConfig resolve_sweep(Resolver& r, const SweepFlags& f, const Common& c) {
    SweepConfig s;
    s.kappas = r.list(f.kappas, "sweep.kappas", {});
    s.rhos = r.list(f.rhos, "sweep.rhos", s.rhos);
    s.grid_rule = r.num(f.grid_rule, "sweep.grid_rule", s.grid_rule);
    s.min_n = r.integer(f.min_n, "sweep.min_n", s.min_n);
    s.max_n = r.integer(f.max_n, "sweep.max_n", s.max_n);
    s.checkpoints = r.boolean(f.checkpoints, "sweep.checkpoints", false);
    s.family_spread = r.num(f.family_spread, "sweep.family_spread", s.family_spread);
    s.edge_distance_bound = r.num(f.edge_distance_bound, "sweep.edge_distance_bound", s.edge_distance_bound);
    s.theta0_rho = r.num(f.theta0_rho, "sweep.theta0_rho", s.theta0_rho);
    s.solver.grad_tol = r.num(f.solve.grad_tol, "solve.grad_tol", s.solver.grad_tol);
    s.solver.max_iter = r.integer(f.solve.max_iter, "solve.max_iter", s.solver.max_iter);
    s.solver.init = parse_init(r.str(f.solve.init, "solve.init", "noise"));
    s.solver.noise_amp = r.num(f.solve.noise, "solve.noise", s.solver.noise_amp);
    s.solver.reproject_every = r.integer(f.solve.reproject_every, "solve.reproject_every", s.solver.reproject_every);
    s.norms = resolve_norms(r, f.solve);
    const Config& cfg = c.cfg;
    s.regime.lambda_min = cfg.number("regime.lambda_min", s.regime.lambda_min);
    s.regime.lambda_max = cfg.number("regime.lambda_max", s.regime.lambda_max);
    s.regime.kappa_min = cfg.number("regime.kappa_min", s.regime.kappa_min);
    s.seed = c.seed;
    s.out = c.out;
    s.jobs = c.jobs;
    s.validate();
    return s;
}

void print_verdicts(const std::vector<Verdict>& vs) {
    for (const auto& v : vs)
        std::printf("verdict %-14s %s  %s\n", v.name.c_str(), !v.applicable ? "n/a " : (v.pass ? "PASS" : "FAIL"),
                    v.detail.c_str());
}

int cmd_sweep(const Global& g, const SweepFlags& f) {
    const Common c = resolve_common(g);
    Resolver r(c.cfg, "sweep");
    const SweepConfig s = resolve_sweep(r, f, c);
    const SweepResult res = run_sweep(s);
    write_sweep(res, s);
    std::printf("%s\n", s.provenance().line("").c_str());
    int unconverged = 0;
    for (const auto& row : res.rows) {
        std::printf("kappa %-6g rho %-8g n %-4d %s", row.kappa, row.rho, row.grid_n, to_string(row.status));
        if (!row.error.empty()) std::printf(" (%s)", row.error.c_str());
        std::printf("\n");
        if (row.status != RowStatus::converged) ++unconverged;
    }
    print_verdicts(res.verdicts);
    if (!res.all_pass()) return verdict_failed;
    return unconverged ? nonconvergence : ok;
}

struct ReportFlags {
    std::vector<std::string> inputs;
    std::optional<double> family_spread, edge_distance_bound, theta0_rho;
};

int cmd_report(const Global& g, const ReportFlags& f) {
    const Common c = resolve_common(g);
    Resolver r(c.cfg, "report");
    SweepConfig s;
    s.family_spread = r.num(f.family_spread, "sweep.family_spread", s.family_spread);
    s.edge_distance_bound = r.num(f.edge_distance_bound, "sweep.edge_distance_bound", s.edge_distance_bound);
    s.theta0_rho = r.num(f.theta0_rho, "sweep.theta0_rho", s.theta0_rho);
    std::vector<SweepRow> rows;
    for (const auto& in : f.inputs) {
        const std::string path = fs::is_directory(in) ? out_path(in, "sweep.csv") : in;
        std::vector<SweepRow> part;
        try {
            part = parse_sweep_csv(read_text(path));
        } catch (const IoError& e) {
            throw ConfigError(path + ": " + e.what());
        }
        rows.insert(rows.end(), part.begin(), part.end());
    }
    std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
        return std::pair{a.kappa, a.rho} < std::pair{b.kappa, b.rho};
    });
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i].index = static_cast<int>(i);
    SweepResult res{rows, sweep_verdicts(s, rows)};
    const Provenance p = r.provenance(c.seed);
    std::printf("%s\nrows %zu\n", p.line("").c_str(), rows.size());
    print_verdicts(res.verdicts);
    if (!c.out.empty()) {
        ensure_out(c.out);
        write_text(out_path(c.out, "report.csv"), sweep_csv(res, p));
        for (const auto& [name, text] : sweep_dat(res, p)) write_text(out_path(c.out, name), text);
        write_text(out_path(c.out, "plot.gp"), gnuplot_script(p));
    }
    return res.all_pass() ? ok : verdict_failed;
}

// ---------------------------------------------------------------------------
// spectral
// ---------------------------------------------------------------------------

struct SpectralFlags {
    bool theta0 = false;
    bool halfplane = false;
    bool probe = false;
    std::optional<int> landau;
    std::optional<std::vector<double>> mu_xis;
    std::optional<double> T, tol, xi_lo, xi_hi, sample_step;
    std::optional<int> n;
    std::optional<double> R, ppu, edge_half_length, lambda, S, probe_grad_tol;
    std::optional<int> hp_max_iter, probe_max_iter;
    std::optional<std::string> geometry;
};

int cmd_spectral(const Global& g, const SpectralFlags& f) {
    const Common c = resolve_common(g);
    Resolver r(c.cfg, "spectral");
    std::optional<int> landau;
    if (f.landau || c.cfg.has("spectral.landau_count")) landau = r.integer(f.landau, "spectral.landau_count", 3);
    std::optional<std::vector<double>> mu_xis;
    if (f.mu_xis || c.cfg.has("spectral.mu_xis")) mu_xis = r.list(f.mu_xis, "spectral.mu_xis", {});
    const int nflags = f.theta0 + f.halfplane + f.probe + landau.has_value() + mu_xis.has_value();
    if (nflags == 0) throw ConfigError("spectral: choose --theta0, --landau, --mu-table, --halfplane or --probe");
    Theta0Options to;
    to.T = r.num(f.T, "spectral.T", to.T);
    to.n = r.integer(f.n, "spectral.n", to.n);
    to.xi_lo = r.num(f.xi_lo, "spectral.xi_lo", to.xi_lo);
    to.xi_hi = r.num(f.xi_hi, "spectral.xi_hi", to.xi_hi);
    to.sample_step = r.num(f.sample_step, "spectral.sample_step", to.sample_step);
    const double tol = r.num(f.tol, "spectral.tol", 1e-6);
    try {
        FiberProblem{0.0, to.T, to.n}.validate();
    } catch (const SpecError& e) {
        throw ConfigError(e.what());
    }
    bool pass = true;
    if (!c.out.empty()) ensure_out(c.out);

    if (f.theta0) {
        const SpectralResult s = theta0(tol, to);
        std::printf("theta0 %.9f\nxi_opt %.9f\n", s.theta0, s.xi_opt);
        std::printf("coarse n=%d %.9f  fine n=%d %.9f\n", s.n_coarse, s.theta_coarse, s.n_fine, s.theta_fine);
        const std::string out = c.out.empty() ? "." : c.out;
        ensure_out(out);
        write_text(out_path(out, "mu_table.csv"), mu_table_csv(s.mu_samples, s.T, s.n_fine, r.provenance(c.seed)));
        pass = pass && s.theta0 > 0.0 && s.theta0 < 1.0;
    }
    if (landau) {
        const std::vector<double> ls = landau_levels(*landau, to.T);
        for (std::size_t k = 0; k < ls.size(); ++k)
            std::printf("landau %zu %.9f (exact %zu)\n", k, ls[k], 2 * k + 1);
    }
    if (mu_xis) {
        const auto rows = mu_table(*mu_xis, to.T, to.n);
        for (const auto& [xi, mu] : rows) std::printf("mu %.6f %.10f\n", xi, mu);
        if (!c.out.empty())
            write_text(out_path(c.out, "mu_table.csv"), mu_table_csv(rows, to.T, to.n, r.provenance(c.seed)));
    }
    if (f.halfplane) {
        HalfplaneOptions ho;
        const double R = r.num(f.R, "halfplane.R", 10.0);
        ho.points_per_unit = r.num(f.ppu, "halfplane.points_per_unit", ho.points_per_unit);
        ho.edge_half_length = r.num(f.edge_half_length, "halfplane.edge_half_length", ho.edge_half_length);
        ho.eigen.max_iter = r.integer(f.hp_max_iter, "halfplane.max_iter", ho.eigen.max_iter);
        ho.eigen.tol = r.num(std::nullopt, "halfplane.tol", ho.eigen.tol);
        const EigenResult e = halfplane_ground_state(R, ho);
        std::printf("halfplane R %g ground %.9f residual %.3e lanczos %d grid %dx%d\n", R, e.eigenvalue, e.residual,
                    e.iterations, e.nx, e.ny);
        pass = pass && e.eigenvalue > 0.0 && e.eigenvalue < 1.0;
    }
    if (f.probe) {
        const double lambda = r.num(f.lambda, "probe.lambda", 0.5);
        const double S = r.num(f.S, "probe.S", 1.0);
        const double R = r.num(f.R, "probe.R", 8.0);
        ProbeOptions po;
        po.points_per_unit = r.num(f.ppu, "probe.points_per_unit", po.points_per_unit);
        po.grad_tol = r.num(f.probe_grad_tol, "probe.grad_tol", po.grad_tol);
        po.max_iter = r.integer(f.probe_max_iter, "probe.max_iter", po.max_iter);
        po.seed = c.seed;
        const std::string geo = r.str(f.geometry, "probe.geometry", "halfplane");
        if (geo != "halfplane" && geo != "plane") throw ConfigError("probe.geometry must be plane or halfplane");
        const ProbeResult pr =
            nonlinear_limit_probe(lambda, S, R, geo == "plane" ? ProbeGeometry::plane : ProbeGeometry::halfplane, po);
        std::printf("probe %s lambda %g S %g R %g sup %.6e edge_fraction %.4f converged %d iterations %d\n",
                    geo.c_str(), lambda, S, R, pr.sup_norm, pr.edge_mass_fraction, pr.converged, pr.iterations);
        if (!pr.converged) return nonconvergence;
    }
    return pass ? ok : verdict_failed;
}

// ---------------------------------------------------------------------------
// blowup and check-identity share a state source
// ---------------------------------------------------------------------------

struct StateFlags {
    std::optional<std::string> checkpoint;
    SolveFlags solve;
};

SolveResult load_or_solve(Resolver& r, const StateFlags& f, std::uint64_t seed) {
    if (f.checkpoint) {
        const GLState s = [&] {
            try {
                return read_checkpoint(*f.checkpoint);
            } catch (const IoError& e) {
                throw ConfigError(e.what());
            }
        }();
        r.str(f.checkpoint, "checkpoint", "");
        const ResidualReport rr = residuals(s);
        SolveResult out{s, rr, {}};
        out.stats.rel_grad = rr.rel_grad;
        out.stats.converged = rr.rel_grad <= SolveOptions{}.grad_tol;
        out.stats.energy = energy(s);
        return out;
    }
    const SolveSetup s = resolve_solve(r, f.solve, seed);
    return solve(Grid::square(s.n), s.kappa, s.H, s.opts, s.levels);
}

struct BlowupFlags {
    StateFlags state;
    std::optional<double> R, ppu, x, y;
};

int cmd_blowup(const Global& g, const BlowupFlags& f) {
    const Common c = resolve_common(g);
    Resolver r(c.cfg, "blowup");
    const double R = r.num(f.R, "blowup.R", 2.0);
    const double ppu = r.num(f.ppu, "blowup.points_per_unit", 8.0);
    const bool at_point = f.x.has_value() || c.cfg.has("blowup.x");
    const double px = r.num(f.x, "blowup.x", 0.0);
    const double py = r.num(f.y, "blowup.y", 0.0);
    const SolveResult res = load_or_solve(r, f.state, c.seed);
    const Provenance p = r.provenance(c.seed);
    std::printf("%s\n", p.line("").c_str());
    if (!res.stats.converged) std::fprintf(stderr, "blowup: warning: state not converged\n");

    std::vector<std::pair<std::string, Point>> points;
    const ArgmaxResult am = argmax_distance(res.state.grid, res.state.psi);
    points.emplace_back("argmax", am.point);
    if (at_point) points.emplace_back("point", Point{px, py});
    if (!c.out.empty()) ensure_out(c.out);
    for (const auto& [name, P] : points) {
        const BlowupFrame fr = rescale(res.state, P, R, ppu);
        const double lr = limit_residual(fr);
        std::printf("%s P (%.6g, %.6g) case %s S %.6g Lambda %.6g frame %dx%d mean_curl %.6g limit_residual %.6e\n",
                    name.c_str(), P.x, P.y, to_string(fr.kind), fr.S, fr.Lambda, fr.grid.nx(), fr.grid.ny(),
                    frame_mean_curl(fr), lr);
        if (!c.out.empty()) write_text(out_path(c.out, "frame_" + name + ".csv"), frame_csv(fr, p));
    }
    return res.stats.converged ? ok : nonconvergence;
}

struct IdentityFlags {
    StateFlags state;
    std::optional<double> p1, p2, r0, t_max, h, bc_limit;
};

int cmd_identity(const Global& g, const IdentityFlags& f) {
    const Common c = resolve_common(g);
    Resolver r(c.cfg, "check-identity");
    const double p1 = r.num(f.p1, "identity.p1", 2.0);
    const double p2 = r.num(f.p2, "identity.p2", 2.0);
    const double r0 = r.num(f.r0, "identity.r0", 1.0);
    const double t_max = r.num(f.t_max, "identity.t_max", 0.5);
    const double h = r.num(f.h, "identity.h", 1.0 / 256.0);
    const double bc_limit = r.num(f.bc_limit, "identity.bc_limit", 1e-2);
    const SolveResult res = load_or_solve(r, f.state, c.seed);
    std::printf("%s\n", r.provenance(c.seed).line("").c_str());

    const IbpGap gap = ibp_identity_gap(res.state, bc_limit);
    bool pass = true;
    if (gap.degenerate) {
        std::printf("ibp degenerate (psi = 0)\n");
    } else {
        std::printf("ibp lhs %.10g rhs %.10g gap %.3e%s\n", gap.terms.lhs, gap.terms.rhs(), gap.gap,
                    gap.bc_gated ? " (boundary residual above limit, no verdict)" : "");
        if (!gap.bc_gated) pass = pass && gap.gap <= 0.05;
        const LemmaRatio lr = lemma_intparts_ratio(res.state, p1, p2);
        std::printf("lemma p1 %g p2 %g lhs %.6g rhs %.6g ratio %.6g\n", p1, p2, lr.lhs, lr.rhs, lr.ratio);
    }
    const VectorFunction sym = [](Point q) { return Point{-0.5 * q.y, 0.5 * q.x}; };
    double prev = 0.0;
    for (int k = 0; k < 3; ++k) {
        const double hk = h * std::pow(2.0, -k);
        const CurlTransformResult ct = curl_transform_check(r0, t_max, sym, hk);
        std::printf("curl-transform r0 %g t_max %g h %.6g deviation %.3e", r0, t_max, hk, ct.max_deviation);
        if (k > 0 && ct.max_deviation > 0.0) std::printf(" order %.2f", std::log2(prev / ct.max_deviation));
        std::printf("\n");
        if (k == 0) pass = pass && ct.max_deviation <= 1e-4;
        prev = ct.max_deviation;
    }
    if (!res.stats.converged) return nonconvergence;
    return pass ? ok : verdict_failed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ginzburg-Landau numerical lab on the unit square"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);
    Global g;
    app.add_option("--config", g.config_path, "TOML-style configuration file")->check(CLI::ExistingFile);
    app.add_option("--jobs", g.jobs, "worker threads (default: all cores)");
    app.add_option("--out", g.out, "output directory");
    app.add_option("--seed", g.seed, "random seed");

    SolveFlags solve_f;
    auto* solve_c = app.add_subcommand("solve", "one GL solve and its estimate report");
    add_solve_flags(solve_c, solve_f);
    add_norm_flags(solve_c, solve_f);

    SweepFlags sweep_f;
    auto* sweep_c = app.add_subcommand("sweep", "(kappa, rho) sweep with aggregate verdicts");
    sweep_c->add_option("--kappas", sweep_f.kappas, "kappa list")->delimiter(',');
    sweep_c->add_option("--rhos", sweep_f.rhos, "kappa / H list")->delimiter(',');
    sweep_c->add_option("--grid-rule", sweep_f.grid_rule, "nodes per magnetic length");
    sweep_c->add_option("--min-n", sweep_f.min_n);
    sweep_c->add_option("--max-n", sweep_f.max_n);
    sweep_c->add_option("--checkpoints", sweep_f.checkpoints, "write one checkpoint per row");
    sweep_c->add_option("--family-spread", sweep_f.family_spread);
    sweep_c->add_option("--edge-distance-bound", sweep_f.edge_distance_bound);
    sweep_c->add_option("--theta0-rho", sweep_f.theta0_rho);
    sweep_c->add_option("--grad-tol", sweep_f.solve.grad_tol);
    sweep_c->add_option("--max-iter", sweep_f.solve.max_iter);
    sweep_c->add_option("--init", sweep_f.solve.init);
    sweep_c->add_option("--noise", sweep_f.solve.noise);
    add_norm_flags(sweep_c, sweep_f.solve);

    SpectralFlags spec_f;
    auto* spec_c = app.add_subcommand("spectral", "de Gennes constant, Landau levels and limit problems");
    spec_c->add_flag("--theta0", spec_f.theta0, "minimise the fiber eigenvalue");
    spec_c->add_option("--landau", spec_f.landau, "number of Landau levels");
    spec_c->add_option("--mu-table", spec_f.mu_xis, "fiber eigenvalues at these xi")->delimiter(',');
    spec_c->add_flag("--halfplane", spec_f.halfplane, "2D half-plane ground state");
    spec_c->add_flag("--probe", spec_f.probe, "nonlinear limit probe");
    spec_c->add_option("--T", spec_f.T, "fiber truncation length");
    spec_c->add_option("--n", spec_f.n, "fiber grid size");
    spec_c->add_option("--tol", spec_f.tol, "theta0 tolerance");
    spec_c->add_option("--xi-lo", spec_f.xi_lo);
    spec_c->add_option("--xi-hi", spec_f.xi_hi);
    spec_c->add_option("--sample-step", spec_f.sample_step);
    spec_c->add_option("--R", spec_f.R, "box size for halfplane/probe");
    spec_c->add_option("--ppu", spec_f.ppu, "grid points per unit length");
    spec_c->add_option("--edge-half-length", spec_f.edge_half_length);
    spec_c->add_option("--halfplane-max-iter", spec_f.hp_max_iter);
    spec_c->add_option("--lambda", spec_f.lambda);
    spec_c->add_option("--S", spec_f.S);
    spec_c->add_option("--geometry", spec_f.geometry, "plane or halfplane");
    spec_c->add_option("--probe-grad-tol", spec_f.probe_grad_tol);
    spec_c->add_option("--probe-max-iter", spec_f.probe_max_iter);

    BlowupFlags blow_f;
    auto* blow_c = app.add_subcommand("blowup", "rescale at the argmax (and a given point)");
    add_solve_flags(blow_c, blow_f.state.solve);
    blow_c->add_option("--checkpoint", blow_f.state.checkpoint, "state file instead of a fresh solve");
    blow_c->add_option("--R", blow_f.R, "frame half-width in magnetic lengths");
    blow_c->add_option("--ppu", blow_f.ppu, "frame nodes per magnetic length");
    blow_c->add_option("--x", blow_f.x);
    blow_c->add_option("--y", blow_f.y);

    IdentityFlags id_f;
    auto* id_c = app.add_subcommand("check-identity", "integration-by-parts gap, lemma ratio, curl transform");
    add_solve_flags(id_c, id_f.state.solve);
    id_c->add_option("--checkpoint", id_f.state.checkpoint, "state file instead of a fresh solve");
    id_c->add_option("--p1", id_f.p1);
    id_c->add_option("--p2", id_f.p2);
    id_c->add_option("--r0", id_f.r0, "chart radius");
    id_c->add_option("--t-max", id_f.t_max, "chart depth");
    id_c->add_option("--step", id_f.h, "finest difference step h");
    id_c->add_option("--bc-limit", id_f.bc_limit, "Neumann residual gate");

    ReportFlags rep_f;
    auto* rep_c = app.add_subcommand("report", "re-aggregate sweep CSVs");
    rep_c->add_option("inputs", rep_f.inputs, "sweep.csv files or sweep output directories")->required();
    rep_c->add_option("--family-spread", rep_f.family_spread);
    rep_c->add_option("--edge-distance-bound", rep_f.edge_distance_bound);
    rep_c->add_option("--theta0-rho", rep_f.theta0_rho);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : usage;
    }

    try {
        if (solve_c->parsed()) return cmd_solve(g, solve_f);
        if (sweep_c->parsed()) return cmd_sweep(g, sweep_f);
        if (spec_c->parsed()) return cmd_spectral(g, spec_f);
        if (blow_c->parsed()) return cmd_blowup(g, blow_f);
        if (id_c->parsed()) return cmd_identity(g, id_f);
        if (rep_c->parsed()) return cmd_report(g, rep_f);
    } catch (const SolverError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return nonconvergence;
    } catch (const BracketError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return nonconvergence;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return usage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return usage;
    }
    return usage;
}
