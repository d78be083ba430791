#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <limits>
#include <filesystem>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "gllab/estimates.hpp"
#include "gllab/io.hpp"

namespace gllab {

struct SweepConfig {
    std::vector<double> kappas;
    std::vector<double> rhos{1.0};  // kappa / H
    double grid_rule = 8.0;         // nodes per magnetic length 1/sqrt(kappa H)
    int min_n = 64;
    int max_n = 512;
    SolveOptions solver;
    NormSettings norms;
    AsymptoticRegime regime;
    std::uint64_t seed = 1;
    std::string out;                // empty: nothing written
    int jobs = 0;                   // 0: hardware concurrency
    bool checkpoints = false;
    // Verdict thresholds.
    double family_spread = 10.0;    // max/min of a ratio family
    double edge_distance_bound = 5.0;
    double theta0_rho = 0.5901;     // rows with this rho form the decay trend

    void validate() const {
        for (double k : kappas)
            if (!(k > 0.0) || !std::isfinite(k)) throw ConfigError("sweep: kappa values must be positive");
        for (double r : rhos)
            if (!(r > 0.0) || !std::isfinite(r)) throw ConfigError("sweep: rho values must be positive");
        if (!(grid_rule >= 6.0)) throw ConfigError("sweep: grid_rule must be >= 6");
        if (min_n < 8 || max_n < min_n) throw ConfigError("sweep: need 8 <= min_n <= max_n");
        if (jobs < 0) throw ConfigError("sweep: jobs must be >= 0");
        try {
            solver.validate();
            norms.validate();
        } catch (const SpecError& e) {
            throw ConfigError(std::string("sweep: ") + e.what());
        }
    }

    // Stable text of every setting that affects results (jobs and out excluded).
    std::string canonical() const {
        std::string s = "kappas=";
        for (double k : kappas) s += fmt(k) + ";";
        s += "\nrhos=";
        for (double r : rhos) s += fmt(r) + ";";
        s += "\ngrid_rule=" + fmt(grid_rule) + "\nmin_n=" + std::to_string(min_n) + "\nmax_n=" + std::to_string(max_n);
        s += "\ngrad_tol=" + fmt(solver.grad_tol) + "\nmax_iter=" + std::to_string(solver.max_iter);
        s += "\ninit=" + std::to_string(static_cast<int>(solver.init)) + "\nnoise=" + fmt(solver.noise_amp);
        s += "\nreproject_every=" + std::to_string(solver.reproject_every);
        s += "\nalpha=" + fmt(norms.alpha) + "\np=" + fmt(norms.p) +
             "\ncorner=" + std::to_string(norms.corner_exclusion);
        s += "\nlambda_min=" + fmt(regime.lambda_min) + "\nlambda_max=" + fmt(regime.lambda_max) +
             "\nkappa_min=" + fmt(regime.kappa_min);
        s += "\nseed=" + std::to_string(seed) + "\n";
        return s;
    }

    Provenance provenance() const { return {canonical(), seed}; }
};

/**
 * Grid size for one row: grid_rule nodes per magnetic length, at least min_n,
 * at most max_n, rounded up to a multiple of 8 so that the multilevel solve
 * has room to coarsen.
 */
inline int sweep_grid_n(const SweepConfig& c, double kappa, double H) {
    const double want = c.grid_rule * std::sqrt(kappa * H);
    int n = std::max(c.min_n, static_cast<int>(std::ceil(want - 1e-9)));
    n = (n + 7) / 8 * 8;
    return std::min(n, c.max_n);
}

// Coarsest level keeps at least 32 cells and 3 nodes per magnetic length.
inline int sweep_levels(int n, double kappa, double H) {
    const double floor_n = std::max(32.0, 3.0 * std::sqrt(kappa * H));
    int levels = 1;
    while (n % (1 << levels) == 0 && n / (1 << levels) >= floor_n) ++levels;
    return levels;
}

enum class RowStatus { converged, not_converged, errored };

inline const char* to_string(RowStatus s) {
    switch (s) {
        case RowStatus::converged: return "converged";
        case RowStatus::not_converged: return "not_converged";
        default: return "errored";
    }
}

struct SweepRow {
    int index = 0;
    double kappa = 0.0;
    double rho = 0.0;
    double H = 0.0;
    int grid_n = 0;
    std::uint64_t seed = 0;
    RowStatus status = RowStatus::errored;
    std::string error;
    SolveStats stats;
    ResidualReport residuals;
    EstimateReport base;        // infini ... af1
    EstimateReport asymptotic;  // first ... prop44
};

struct Verdict {
    std::string name;
    bool applicable = false;
    bool pass = true;
    double value = 0.0;  // spread, bound or trend margin
    std::string detail;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::vector<Verdict> verdicts;

    bool all_pass() const {
        return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
    }
};

inline const std::vector<std::string>& base_ids() {
    static const std::vector<std::string> ids{"infini", "cine", "ineqimproved", "dd1", "caf1", "caf2", "a2", "af1"};
    return ids;
}

inline const std::vector<std::string>& asymptotic_ids() {
    static const std::vector<std::string> ids{"first", "second", "third", "prop41", "prop44"};
    return ids;
}

inline SweepRow run_row(const SweepConfig& c, int index, double kappa, double rho) {
    SweepRow row;
    row.index = index;
    row.kappa = kappa;
    row.rho = rho;
    row.H = kappa / rho;
    row.seed = c.seed + static_cast<std::uint64_t>(index);
    try {
        row.grid_n = sweep_grid_n(c, kappa, row.H);
        SolveOptions so = c.solver;
        so.seed = row.seed;
        const SolveResult r =
            solve(Grid::square(row.grid_n), kappa, row.H, so, sweep_levels(row.grid_n, kappa, row.H));
        row.stats = r.stats;
        row.residuals = r.residuals;
        row.status = r.stats.converged ? RowStatus::converged : RowStatus::not_converged;
        row.base = evaluate(r.state, r.residuals, c.norms);
        row.asymptotic = evaluate_asymptotic(r.state, c.regime, c.norms);
        if (c.checkpoints && !c.out.empty()) {
            std::filesystem::create_directories(std::filesystem::path(c.out) / "checkpoints");
            const std::string p = (std::filesystem::path(c.out) / "checkpoints" /
                                   ("row_" + std::to_string(index) + ".bin")).string();
            write_checkpoint(p, r.state, c.provenance());
        }
    } catch (const std::exception& e) {
        row.status = RowStatus::errored;
        row.error = e.what();
    }
    return row;
}

namespace detail {

struct Family {
    std::vector<double> values;
    std::vector<double> kappas;
};

inline Family collect(const std::vector<SweepRow>& rows, const std::string& id, bool asymptotic, bool regime_only) {
    Family f;
    for (const auto& r : rows) {
        if (r.status != RowStatus::converged) continue;
        const EstimateReport& rep = asymptotic ? r.asymptotic : r.base;
        if (rep.degenerate || (regime_only && !rep.in_regime)) continue;
        const EstimateRow* e = rep.find(id);
        if (!e || e->indeterminate) continue;
        f.values.push_back(e->ratio);
        f.kappas.push_back(r.kappa);
    }
    return f;
}

inline Verdict spread_verdict(const std::string& name, const Family& f, double limit) {
    Verdict v;
    v.name = name;
    if (f.values.size() < 2) {
        v.detail = "fewer than two converged rows";
        return v;
    }
    v.applicable = true;
    const auto [lo, hi] = std::minmax_element(f.values.begin(), f.values.end());
    v.value = *lo > 0.0 ? *hi / *lo : std::numeric_limits<double>::infinity();
    v.pass = v.value <= limit;
    v.detail = "max/min " + fmt(v.value) + " (limit " + fmt(limit) + ")";
    return v;
}

}  // namespace detail

/**
 * Aggregate verdicts over converged rows:
 *   bounded.<id>  each base ratio family dd1, caf1, caf2, a2, af1 has max/min <= spread
 *   surface.<id> each of first, second, third (in-regime rows) has max/min <= spread
 *   decay       sup|psi| strictly decreasing in kappa among rows with rho = theta0_rho
 *   edge_distance sqrt(kappa H) dist(argmax, boundary) <= edge_distance_bound on in-regime rows
 * A verdict without enough rows is reported as not applicable and passes.
 */
inline std::vector<Verdict> sweep_verdicts(const SweepConfig& c, const std::vector<SweepRow>& rows) {
    std::vector<Verdict> out;
    for (const char* id : {"dd1", "caf1", "caf2", "a2", "af1"})
        out.push_back(detail::spread_verdict(std::string("bounded.") + id, detail::collect(rows, id, false, false),
                                             c.family_spread));
    for (const char* id : {"first", "second", "third"})
        out.push_back(detail::spread_verdict(std::string("surface.") + id, detail::collect(rows, id, true, true),
                                             c.family_spread));

    Verdict trend;
    trend.name = "decay";
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : rows) {
        if (r.status != RowStatus::converged || std::abs(r.rho - c.theta0_rho) > 1e-6) continue;
        const EstimateRow* e = r.base.find("infini");
        if (e) pts.emplace_back(r.kappa, e->lhs);
    }
    std::sort(pts.begin(), pts.end());
    if (pts.size() >= 2) {
        trend.applicable = true;
        double margin = std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i < pts.size(); ++i) margin = std::min(margin, pts[i - 1].second - pts[i].second);
        trend.value = margin;
        trend.pass = margin > 0.0;
        trend.detail = "smallest decrease " + fmt(margin);
    } else {
        trend.detail = "fewer than two converged rows at rho " + fmt(c.theta0_rho);
    }
    out.push_back(trend);

    Verdict p44;
    p44.name = "edge_distance";
    const detail::Family f = detail::collect(rows, "prop44", true, true);
    if (!f.values.empty()) {
        p44.applicable = true;
        p44.value = *std::max_element(f.values.begin(), f.values.end());
        p44.pass = p44.value <= c.edge_distance_bound;
        p44.detail = "max " + fmt(p44.value) + " (bound " + fmt(c.edge_distance_bound) + ")";
    } else {
        p44.detail = "no converged in-regime rows";
    }
    out.push_back(p44);
    return out;
}

/**
 * Rows are the (kappa, rho) product sorted by (kappa, rho), solved
 * concurrently and collected by index, so output does not depend on jobs.
 */
inline SweepResult run_sweep(const SweepConfig& c) {
    c.validate();
    std::vector<std::pair<double, double>> grid;
    for (double k : c.kappas)
        for (double r : c.rhos) grid.emplace_back(k, r);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    SweepResult res;
    res.rows.resize(grid.size());
    const int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    const int jobs = std::max(1, std::min<int>(c.jobs > 0 ? c.jobs : hw, static_cast<int>(grid.size())));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < grid.size(); i = next++)
            res.rows[i] = run_row(c, static_cast<int>(i), grid[i].first, grid[i].second);
    };
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    }
    res.verdicts = sweep_verdicts(c, res.rows);
    return res;
}

// ---------------------------------------------------------------------------
// Writers
// ---------------------------------------------------------------------------

inline std::string sweep_csv(const SweepResult& r, const Provenance& p) {
    std::string s = p.line() + "\n";
    s += "kappa,H,rho,grid_n,converged";
    for (const auto* ids : {&base_ids(), &asymptotic_ids()})
        for (const auto& id : *ids) s += "," + id + "_lhs," + id + "_rhs," + id + "_ratio";
    s += ",status,in_regime,rel_grad,iterations\n";
    for (const auto& row : r.rows) {
        s += fmt(row.kappa) + "," + fmt(row.H) + "," + fmt(row.rho) + "," + std::to_string(row.grid_n) + "," +
             (row.status == RowStatus::converged ? "1" : "0");
        for (const auto& [ids, rep] : {std::pair{&base_ids(), &row.base}, std::pair{&asymptotic_ids(), &row.asymptotic}})
            for (const auto& id : *ids) {
                const EstimateRow* e = rep->find(id);
                if (!e) {
                    s += ",,,";
                    continue;
                }
                s += "," + fmt(e->lhs) + "," + fmt(e->rhs) + "," + (e->indeterminate ? "indeterminate" : fmt(e->ratio));
            }
        s += std::string(",") + to_string(row.status) + "," + (row.asymptotic.in_regime ? "1" : "0") + "," +
             fmt(row.stats.rel_grad) + "," + std::to_string(row.stats.iterations) + "\n";
    }
    return s;
}

inline nlohmann::json report_json(const EstimateReport& rep) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& e : rep.rows) {
        nlohmann::json x{{"lhs", e.lhs}, {"rhs", e.rhs}, {"norm", e.norm}, {"indeterminate", e.indeterminate}};
        x["ratio"] = e.indeterminate ? nlohmann::json(nullptr) : nlohmann::json(e.ratio);
        j[e.id] = x;
    }
    return j;
}

inline std::string sweep_json(const SweepResult& r, const SweepConfig& c) {
    nlohmann::ordered_json j;
    j["provenance"] = c.provenance().json();
    j["norms"] = {{"alpha", c.norms.alpha}, {"p", c.norms.p}, {"corner_exclusion", c.norms.corner_exclusion}};
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& row : r.rows) {
        nlohmann::ordered_json x;
        x["kappa"] = row.kappa;
        x["H"] = row.H;
        x["rho"] = row.rho;
        x["grid_n"] = row.grid_n;
        x["seed"] = row.seed;
        x["status"] = to_string(row.status);
        x["converged"] = row.status == RowStatus::converged;
        if (!row.error.empty()) x["error"] = row.error;
        x["rel_grad"] = row.stats.rel_grad;
        x["iterations"] = row.stats.iterations;
        x["in_regime"] = row.asymptotic.in_regime;
        x["degenerate"] = row.base.degenerate;
        x["estimates"] = report_json(row.base);
        x["asymptotic"] = report_json(row.asymptotic);
        rows.push_back(x);
    }
    j["rows"] = rows;
    nlohmann::ordered_json vs = nlohmann::ordered_json::array();
    for (const auto& v : r.verdicts)
        vs.push_back({{"name", v.name}, {"applicable", v.applicable}, {"pass", v.pass},
                      {"value", std::isfinite(v.value) ? nlohmann::ordered_json(v.value) : nlohmann::ordered_json()},
                      {"detail", v.detail}});
    j["verdicts"] = vs;
    j["pass"] = r.all_pass();
    return j.dump(2) + "\n";
}

// One .dat per ratio family: kappa rho ratio, converged non-degenerate rows.
inline std::map<std::string, std::string> sweep_dat(const SweepResult& r, const Provenance& p) {
    std::map<std::string, std::string> files;
    for (const auto& [ids, asym] : {std::pair{&base_ids(), false}, std::pair{&asymptotic_ids(), true}})
        for (const auto& id : *ids) {
            std::string s = p.line() + "\n# kappa rho ratio\n";
            for (const auto& row : r.rows) {
                if (row.status != RowStatus::converged) continue;
                const EstimateRow* e = (asym ? row.asymptotic : row.base).find(id);
                if (!e || e->indeterminate) continue;
                s += fmt(row.kappa) + " " + fmt(row.rho) + " " + fmt(e->ratio) + "\n";
            }
            files[id + ".dat"] = s;
        }
    return files;
}

inline std::string gnuplot_script(const Provenance& p) {
    std::string s = p.line() + "\n";
    s += "set terminal pngcairo size 900,600\nset logscale y\nset xlabel 'kappa'\nset ylabel 'ratio'\n";
    for (const auto* ids : {&base_ids(), &asymptotic_ids()})
        for (const auto& id : *ids)
            s += "set output '" + id + ".png'\nplot '" + id + ".dat' using 1:3 with linespoints title '" + id + "'\n";
    return s;
}

inline void write_sweep(const SweepResult& r, const SweepConfig& c) {
    if (c.out.empty()) return;
    namespace fs = std::filesystem;
    fs::create_directories(c.out);
    const Provenance p = c.provenance();
    write_text((fs::path(c.out) / "sweep.csv").string(), sweep_csv(r, p));
    write_text((fs::path(c.out) / "sweep.json").string(), sweep_json(r, c));
    for (const auto& [name, text] : sweep_dat(r, p)) write_text((fs::path(c.out) / name).string(), text);
    write_text((fs::path(c.out) / "plot.gp").string(), gnuplot_script(p));
}

namespace detail {

inline std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

inline double parse_double(const std::string& s, const std::string& what) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw IoError("bad number '" + s + "' in " + what);
    return v;
}

}  // namespace detail

// Rows of a CSV written by sweep_csv, enough to recompute the verdicts.
inline std::vector<SweepRow> parse_sweep_csv(const std::string& text) {
    std::vector<SweepRow> rows;
    std::vector<std::string> head;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        const std::string line = text.substr(pos, end - pos);
        pos = end + 1;
        if (line.empty() || line[0] == '#') continue;
        const auto cells = detail::split(line, ',');
        if (head.empty()) {
            head = cells;
            if (head.size() < 5 || head[0] != "kappa") throw IoError("sweep csv: unexpected header");
            continue;
        }
        if (cells.size() != head.size()) throw IoError("sweep csv: row width differs from header");
        std::map<std::string, std::string> m;
        for (std::size_t i = 0; i < head.size(); ++i) m[head[i]] = cells[i];
        SweepRow r;
        r.index = static_cast<int>(rows.size());
        r.kappa = detail::parse_double(m["kappa"], "kappa");
        r.H = detail::parse_double(m["H"], "H");
        r.rho = detail::parse_double(m["rho"], "rho");
        r.grid_n = static_cast<int>(detail::parse_double(m["grid_n"], "grid_n"));
        const std::string st = m.count("status") ? m["status"] : (m["converged"] == "1" ? "converged" : "not_converged");
        r.status = st == "converged" ? RowStatus::converged
                   : st == "errored" ? RowStatus::errored
                                     : RowStatus::not_converged;
        r.asymptotic.in_regime = !m.count("in_regime") || m["in_regime"] == "1";
        for (const auto& [ids, rep] : {std::pair{&base_ids(), &r.base}, std::pair{&asymptotic_ids(), &r.asymptotic}})
            for (const auto& id : *ids) {
                if (!m.count(id + "_lhs") || m[id + "_lhs"].empty()) continue;
                EstimateRow e;
                e.id = id;
                e.lhs = detail::parse_double(m[id + "_lhs"], id);
                e.rhs = detail::parse_double(m[id + "_rhs"], id);
                const std::string& q = m[id + "_ratio"];
                e.indeterminate = q == "indeterminate";
                if (!e.indeterminate) e.ratio = detail::parse_double(q, id);
                rep->rows.push_back(e);
            }
        if (const EstimateRow* e = r.base.find("infini")) r.base.degenerate = r.asymptotic.degenerate = e->lhs == 0.0;
        if (r.status != RowStatus::errored && r.base.rows.empty()) r.status = RowStatus::errored;
        rows.push_back(std::move(r));
    }
    if (head.empty()) throw IoError("sweep csv: no header");
    return rows;
}

}  // namespace gllab
