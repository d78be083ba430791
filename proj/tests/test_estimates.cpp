#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <filesystem>

#include "gllab/sweep.hpp"

using namespace gllab;

namespace {

SweepConfig smoke_config() {
    SweepConfig c;
    c.kappas = {2.0, 4.0};
    c.rhos = {1.0};
    c.min_n = 64;
    c.max_n = 64;
    return c;
}

const SolveResult& solved() {
    static const SolveResult r = solve(Grid::square(48), 8.0, 8.0, SolveOptions{}, 2);
    return r;
}

}  // namespace

TEST(Evaluate, RequiresResidualReport) {
    const Grid g = Grid::square(16);
    const GLState s{g, g.complex_field(), reference_potential(g), 2.0, 2.0};
    EXPECT_THROW(evaluate(s, std::nullopt), SpecError);
}

TEST(Evaluate, NormalStateHasZeroLhs) {
    const Grid g = Grid::square(16);
    const GLState s{g, g.complex_field(), reference_potential(g), 2.0, 2.0};
    const EstimateReport rep = evaluate(s, residuals(s));
    EXPECT_TRUE(rep.degenerate);
    ASSERT_EQ(rep.rows.size(), base_ids().size());
    for (std::size_t k = 0; k < rep.rows.size(); ++k) EXPECT_EQ(rep.rows[k].id, base_ids()[k]);
    EXPECT_EQ(rep.find("infini")->lhs, 0.0);
    EXPECT_EQ(rep.find("infini")->rhs, 1.0);
    EXPECT_FALSE(rep.find("infini")->indeterminate);
    for (const char* id : {"cine", "dd1", "caf1", "caf2", "a2", "af1"}) {
        EXPECT_TRUE(rep.find(id)->indeterminate) << id;
        EXPECT_LT(rep.find(id)->lhs, 1e-5) << id;
    }
    EXPECT_EQ(rep.find("nonexistent"), nullptr);
}

TEST(EvaluateAsymptotic, ZeroStateIsDegenerate) {
    const Grid g = Grid::square(16);
    const GLState s{g, g.complex_field(), reference_potential(g), 8.0, 8.0};
    const EstimateReport rep = evaluate_asymptotic(s);
    EXPECT_TRUE(rep.degenerate);
    EXPECT_TRUE(rep.rows.empty());
    EXPECT_TRUE(rep.in_regime);
}

TEST(Regime, Membership) {
    const AsymptoticRegime r;
    EXPECT_TRUE(r.contains(8.0, 8.0));
    EXPECT_TRUE(r.contains(4.0, 8.0));
    EXPECT_FALSE(r.contains(2.0, 2.0));
    EXPECT_FALSE(r.contains(8.0, 4.0));
}

TEST(NormSettings, Validation) {
    NormSettings n;
    n.alpha = 1.0;
    EXPECT_THROW(n.validate(), SpecError);
    n = {};
    n.p = 1.0;
    EXPECT_THROW(n.validate(), SpecError);
}

TEST(Evaluate, SolvedStateBounds) {
    const SolveResult& r = solved();
    ASSERT_TRUE(r.stats.converged);
    const EstimateReport rep = evaluate(r);
    EXPECT_FALSE(rep.degenerate);
    EXPECT_LE(rep.find("infini")->ratio, 1.0 + 1e-6);
    EXPECT_LE(rep.find("cine")->ratio, 1.0 + 1e-3);
    for (const auto& row : rep.rows) {
        EXPECT_TRUE(std::isfinite(row.ratio)) << row.id;
        EXPECT_GT(row.lhs, 0.0) << row.id;
    }
    const EstimateReport as = evaluate_asymptotic(r.state);
    ASSERT_EQ(as.rows.size(), asymptotic_ids().size());
    EXPECT_EQ(as.find("prop41")->lhs, rep.find("infini")->lhs);
}

TEST(Evaluate, InvariantUnderGaugeAndGlobalPhase) {
    const SolveResult& r = solved();
    GLState s = r.state;
    for (auto& v : s.psi.values()) v *= std::polar(1.0, 0.7);
    const EstimateReport a = evaluate(r), b = evaluate(s, r.residuals);
    for (std::size_t k = 0; k < a.rows.size(); ++k)
        EXPECT_NEAR(a.rows[k].lhs, b.rows[k].lhs, 1e-10 * a.rows[k].lhs) << a.rows[k].id;
    // Gauge change of A moves A - F, so only the gauge-invariant rows compare.
    const NodeField chi = sample_nodes(s.grid, [](Point p) { return 0.1 * std::cos(3 * p.x) * p.y; });
    gauge_transform(s.grid, s.psi, s.a, chi, s.B());
    const EstimateReport c = evaluate(s, r.residuals);
    for (const char* id : {"infini", "cine", "ineqimproved", "caf1", "caf2"})
        EXPECT_NEAR(a.find(id)->lhs, c.find(id)->lhs, 1e-9 * a.find(id)->lhs) << id;
}

TEST(MakeRow, RatioAndIndeterminate) {
    const EstimateRow a = make_row("x", 2.0, 4.0, "L2");
    EXPECT_EQ(a.ratio, 0.5);
    EXPECT_FALSE(a.indeterminate);
    const EstimateRow b = make_row("y", 2.0, 0.0, "L2");
    EXPECT_TRUE(b.indeterminate);
}

TEST(SweepGrid, RuleAndLevels) {
    SweepConfig c;
    EXPECT_EQ(sweep_grid_n(c, 2.0, 2.0), 64);
    EXPECT_EQ(sweep_grid_n(c, 16.0, 16.0), 128);
    EXPECT_EQ(sweep_grid_n(c, 17.0, 17.0), 136);
    EXPECT_EQ(sweep_grid_n(c, 100.0, 100.0), 512);
    EXPECT_EQ(sweep_levels(64, 2.0, 2.0), 2);
    EXPECT_EQ(sweep_levels(128, 16.0, 16.0), 2);
    EXPECT_EQ(sweep_levels(256, 4.0, 4.0), 4);
}

TEST(SweepConfig, Validation) {
    SweepConfig c = smoke_config();
    c.kappas = {-1.0};
    EXPECT_THROW(c.validate(), ConfigError);
    c = smoke_config();
    c.grid_rule = 2.0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = smoke_config();
    c.solver.grad_tol = 1.0;
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Sweep, EmptyKappaListGivesEmptyResult) {
    SweepConfig c;
    const SweepResult r = run_sweep(c);
    EXPECT_TRUE(r.rows.empty());
    for (const Verdict& v : r.verdicts) EXPECT_FALSE(v.applicable);
    EXPECT_TRUE(r.all_pass());
}

TEST(Sweep, SmokeRunIsFastAndDeterministic) {
    const auto t0 = std::chrono::steady_clock::now();
    SweepConfig c = smoke_config();
    c.jobs = 1;
    const SweepResult a = run_sweep(c);
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    EXPECT_LT(dt, 60.0);
    ASSERT_EQ(a.rows.size(), 2u);
    for (const SweepRow& row : a.rows) {
        EXPECT_EQ(row.status, RowStatus::converged);
        EXPECT_EQ(row.grid_n, 64);
        EXPECT_EQ(row.base.rows.size(), base_ids().size());
    }
    c.jobs = 2;
    const SweepResult b = run_sweep(c);
    const Provenance p = c.provenance();
    EXPECT_EQ(sweep_csv(a, p), sweep_csv(b, p));
    EXPECT_EQ(sweep_json(a, c), sweep_json(b, c));

    // Re-parsing the CSV reproduces the verdicts.
    const std::vector<SweepRow> parsed = parse_sweep_csv(sweep_csv(a, p));
    const std::vector<Verdict> va = sweep_verdicts(c, parsed);
    ASSERT_EQ(va.size(), a.verdicts.size());
    for (std::size_t k = 0; k < va.size(); ++k) {
        EXPECT_EQ(va[k].name, a.verdicts[k].name);
        EXPECT_EQ(va[k].applicable, a.verdicts[k].applicable);
        EXPECT_EQ(va[k].pass, a.verdicts[k].pass);
        EXPECT_NEAR(va[k].value, a.verdicts[k].value, 1e-12 * std::max(1.0, std::abs(va[k].value)));
    }
}

TEST(Sweep, WritesAllOutputs) {
    SweepConfig c = smoke_config();
    c.kappas = {2.0};
    c.checkpoints = true;
    c.out = (std::filesystem::temp_directory_path() / "gllab_sweep_test").string();
    std::filesystem::remove_all(c.out);
    const SweepResult r = run_sweep(c);
    write_sweep(r, c);
    for (const char* f : {"sweep.csv", "sweep.json", "plot.gp", "infini.dat", "checkpoints/row_0.bin"})
        EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(c.out) / f)) << f;
    const std::string csv = read_text(c.out + "/sweep.csv");
    EXPECT_EQ(csv.rfind(c.provenance().line(), 0), 0u);
    std::filesystem::remove_all(c.out);
}

TEST(ParseSweepCsv, RejectsMalformedInput) {
    EXPECT_THROW(parse_sweep_csv(""), IoError);
    EXPECT_THROW(parse_sweep_csv("a,b\n1,2\n"), IoError);
    EXPECT_THROW(parse_sweep_csv("kappa,H,rho,grid_n,converged\n1,2\n"), IoError);
}
