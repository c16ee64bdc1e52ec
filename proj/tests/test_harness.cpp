#include "lrcs/errors.hpp"
#include "lrcs/harness.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace lrcs;
using namespace lrcs::harness;

namespace {

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExperimentSpec small_spec(const std::filesystem::path& out) {
    std::istringstream cfg(R"(# small smoke grid
n = 30
q = 30
r = 2
m = 20
sigma_v = 0.001
trials = 2
max_iters = 30
seed = 5
timing = off
)");
    auto spec = parse_config(cfg);
    spec.output_path = out;
    return spec;
}

TrialOutcome injected(double sd2, double total_ms) {
    TrialOutcome o;
    o.cell.index = 0;
    o.report.meta.solver = "altgdmin";
    ErrorSummary e;
    e.sd2 = sd2;
    o.report.final_error = e;
    o.report.total_ms = total_ms;
    o.report.iterations = 10;
    return o;
}

}  // namespace

TEST(Config, ParsesListsAndScalars) {
    std::istringstream in(R"(
n = 100
m = 5, 10 ,20   # inline comment
nsr = 1e-6, 1e-4
solver = altmin
eta_mode = oracle
split_mode = no-split
theory_mode = on
c_tilde = 4.5
memory_budget_mb = 16
)");
    const auto spec = parse_config(in);
    EXPECT_EQ(spec.grid.m, (std::vector<Index>{5, 10, 20}));
    EXPECT_EQ(spec.grid.nsr, (std::vector<double>{1e-6, 1e-4}));
    EXPECT_TRUE(spec.grid.sigma_v.empty());
    EXPECT_EQ(spec.solver, SolverKind::kAltMin);
    EXPECT_EQ(spec.solver_cfg.eta_mode, EtaMode::kOracle);
    EXPECT_TRUE(spec.solver_cfg.theory_mode);
    EXPECT_DOUBLE_EQ(spec.solver_cfg.init->c_tilde, 4.5);
    EXPECT_EQ(spec.memory_budget_bytes, 16U << 20);
}

TEST(Config, Errors) {
    auto parse = [](const char* text) {
        std::istringstream in(text);
        return parse_config(in);
    };
    EXPECT_THROW(parse("bogus = 1\n"), ConfigError);
    EXPECT_THROW(parse("n = 10\nn = 20\n"), ConfigError);
    EXPECT_THROW(parse("sigma_v = 0\nnsr = 1e-4\n"), ConfigError);
    EXPECT_THROW(parse("m = \n"), ConfigError);
    EXPECT_THROW(parse("m = 5x\n"), ConfigError);
    EXPECT_THROW(parse("just words\n"), ConfigError);
    EXPECT_THROW(parse("timing = maybe\n"), ConfigError);
    EXPECT_THROW(parse("solver = sgd\n"), ConfigError);
}

TEST(Config, EmptyGridRejected) {
    ExperimentSpec spec;
    spec.grid.m.clear();
    EXPECT_THROW(spec.validate(), ConfigError);
    spec = ExperimentSpec{};
    spec.grid.sigma_v.clear();
    EXPECT_THROW(spec.validate(), ConfigError);
    EXPECT_THROW(run_experiment(spec), ConfigError);
}

TEST(Config, CellPreconditions) {
    ExperimentSpec spec;
    spec.grid.r = {200};
    EXPECT_THROW(spec.validate(), ConfigError);
    spec = ExperimentSpec{};
    spec.solver_cfg.split_mode = SplitMode::kPaperSplit;
    spec.solver_cfg.max_iters = 3;
    spec.grid.m = {15};
    EXPECT_THROW(spec.validate(), ConfigError);
    spec.grid.m = {14};
    EXPECT_NO_THROW(spec.validate());
    spec = ExperimentSpec{};
    spec.solver = SolverKind::kAltMin;
    spec.grid.m = {1};
    spec.grid.r = {1};
    spec.grid.q = {50};
    EXPECT_THROW(spec.validate(), ConfigError);
}

TEST(Config, MemoryBudgetRefusesLargeCells) {
    ExperimentSpec spec;
    spec.grid.m = {40, 4000};
    spec.memory_budget_bytes = 64U << 20;
    EXPECT_THROW(spec.validate(), ConfigError);
    spec.grid.m = {40};
    EXPECT_NO_THROW(spec.validate());
}

TEST(Grid, ExpansionOrderAndStableSeeds) {
    ParameterGrid g;
    g.m = {5, 10};
    g.sigma_v = {0.0, 0.1, 0.2};
    const auto cells = expand_grid(g);
    ASSERT_EQ(cells.size(), 6U);
    EXPECT_EQ(cells[0].m, 5);
    EXPECT_EQ(cells[1].sigma_v, 0.1);
    EXPECT_EQ(cells[3].m, 10);
    EXPECT_EQ(cells[5].index, 5);

    ParameterGrid wider = g;
    wider.m = {2, 5, 10, 80};
    wider.kappa = {1.0};
    const auto more = expand_grid(wider);
    // Same (n, q, r, κ, trial) → same seed, whatever else is in the grid.
    EXPECT_EQ(trial_seed(7, cells[0], 1), trial_seed(7, more[5], 1));
    EXPECT_NE(trial_seed(7, cells[0], 0), trial_seed(7, cells[0], 1));
    EXPECT_NE(trial_seed(7, cells[0], 0), trial_seed(8, cells[0], 0));
}

TEST(Csv, HeadersArePinned) {
    std::ostringstream r, h, s;
    write_results_csv(r, {}, true);
    write_history_csv(h, {}, true);
    write_summary_csv(s, {}, true);
    EXPECT_EQ(r.str(),
              "# lrcs results v1\n"
              "n,q,r,m,sigma_v,nsr,mu,kappa,seed,solver,final_sd2,final_frob_rel,iters,init_ms,total_ms,status\n");
    EXPECT_EQ(h.str(), "# lrcs history v1\nrun_id,iter,sd2,frob_rel,grad_norm,eta,wall_ms\n");
    EXPECT_EQ(s.str(),
              "# lrcs summary v1\n"
              "n,q,r,m,kappa,noise,solver,trials,ok,success_rate,sd2_median,sd2_q25,sd2_q75,"
              "iters_median,total_ms_median,total_ms_q25,total_ms_q75\n");
}

TEST(Experiment, ByteIdenticalReruns) {
    const auto base = std::filesystem::temp_directory_path() / "lrcs_harness_det";
    std::filesystem::remove_all(base);
    auto spec = small_spec(base / "a");
    run_experiment(spec);
    spec.output_path = base / "b";
    spec.threads = 3;
    const auto outcomes = run_experiment(spec);
    ASSERT_EQ(outcomes.size(), 2U);
    for (const char* name : {"results.csv", "history.csv", "summary.csv"}) {
        const auto a = slurp(base / "a" / name);
        EXPECT_FALSE(a.empty());
        EXPECT_EQ(a, slurp(base / "b" / name)) << name;
    }
    for (const auto& o : outcomes) {
        EXPECT_EQ(o.status, "ok");
        EXPECT_LE(o.report.final_error->sd2, 1e-2);
    }
    std::filesystem::remove_all(base);
}

TEST(Experiment, ResultsRowsEchoInputs) {
    const auto dir = std::filesystem::temp_directory_path() / "lrcs_harness_rows";
    std::filesystem::remove_all(dir);
    auto spec = small_spec(dir);
    spec.grid.sigma_v.clear();
    spec.grid.nsr = {1e-4};
    const auto outcomes = run_experiment(spec);
    for (const auto& o : outcomes) {
        EXPECT_NEAR(o.nsr, 1e-4, 1e-16);
        EXPECT_EQ(o.report.meta.n, 30);
        EXPECT_LE(o.report.iterations, spec.solver_cfg.max_iters);
        EXPECT_EQ(o.report.history.size(), static_cast<std::size_t>(o.report.iterations));
    }
    std::istringstream results(slurp(dir / "results.csv"));
    std::string line;
    int rows = 0;
    while (std::getline(results, line)) {
        if (line.empty() || line[0] == '#' || line[0] == 'n') continue;
        ++rows;
        EXPECT_EQ(line.rfind("30,30,2,20,", 0), 0U) << line;
        EXPECT_NE(line.find(",altgdmin,"), std::string::npos);
        EXPECT_EQ(line.substr(line.size() - 3), ",ok");
    }
    EXPECT_EQ(rows, 2);
    std::filesystem::remove_all(dir);
}

TEST(Summary, SingleReportEchoesValues) {
    const auto rows = emit_summary({injected(0.02, 5.0)}, 1e-6);
    ASSERT_EQ(rows.size(), 1U);
    EXPECT_EQ(rows[0].sd2_median, 0.02);
    EXPECT_EQ(rows[0].sd2_q25, 0.02);
    EXPECT_EQ(rows[0].sd2_q75, 0.02);
    EXPECT_EQ(rows[0].total_ms_median, 5.0);
    EXPECT_EQ(rows[0].success_rate, 0.0);
    EXPECT_EQ(rows[0].trials, 1);
}

TEST(Summary, IdenticalReportsHaveZeroSpread) {
    const auto rows = emit_summary({injected(3e-7, 2.0), injected(3e-7, 2.0)}, 1e-6);
    EXPECT_EQ(rows[0].sd2_q75 - rows[0].sd2_q25, 0.0);
    EXPECT_EQ(rows[0].total_ms_q75 - rows[0].total_ms_q25, 0.0);
    EXPECT_EQ(rows[0].success_rate, 1.0);
}

TEST(Summary, QuantilesMatchScriptedOracle) {
    // Expected values from numpy.quantile (linear interpolation).
    const std::vector<double> sd = {0.31,  1e-3, 2.5e-7, 0.044, 9e-11, 0.12, 3.3e-5, 0.78, 1.1e-2, 6e-9,
                                    0.25,  4.2e-4, 0.09, 7.7e-6, 0.5,  2e-12, 0.003, 0.6,  1.5e-1, 8.8e-8};
    const std::vector<double> ms = {12.5, 3.25, 40.0, 7.75, 19.0, 1.5,  22.25, 9.0, 30.5, 5.0,
                                    14.0, 2.75, 33.0, 11.0, 6.5,  27.0, 4.25,  16.5, 8.0, 25.0};
    std::vector<TrialOutcome> outs;
    for (std::size_t i = 0; i < sd.size(); ++i) outs.push_back(injected(sd[i], ms[i]));
    const auto rows = emit_summary(outs, 1e-6);
    EXPECT_NEAR(rows[0].sd2_median, 0.006999999999999999, 1e-15);
    EXPECT_NEAR(rows[0].sd2_q25, 5.8375000000000004e-06, 1e-18);
    EXPECT_NEAR(rows[0].sd2_q75, 0.175, 1e-15);
    EXPECT_NEAR(rows[0].total_ms_median, 11.75, 1e-12);
    EXPECT_NEAR(rows[0].total_ms_q25, 6.125, 1e-12);
    EXPECT_NEAR(rows[0].total_ms_q75, 22.9375, 1e-12);
    EXPECT_NEAR(rows[0].success_rate, 5.0 / 20.0, 1e-15);
}

TEST(Summary, FailedTrialsCountAgainstSuccess) {
    auto bad = injected(0.0, 1.0);
    bad.status = "rank_deficient";
    bad.report.final_error.reset();
    const auto rows = emit_summary({injected(1e-9, 1.0), bad}, 1e-6);
    EXPECT_EQ(rows[0].ok, 1);
    EXPECT_EQ(rows[0].success_rate, 0.5);
    EXPECT_EQ(rows[0].sd2_median, 1e-9);
}
