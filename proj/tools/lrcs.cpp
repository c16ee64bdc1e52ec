// lrcs: experiment driver for low-rank column-wise sensing.

#include "lrcs/altmin.hpp"
#include "lrcs/errors.hpp"
#include "lrcs/gdmin.hpp"
#include "lrcs/harness.hpp"
#include "lrcs/init.hpp"
#include "lrcs/model.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitSolver = 4;

struct RunArgs {
    std::string config;
    std::optional<std::string> solver;
    std::optional<std::string> out;
    std::optional<long> threads;
    std::optional<std::uint64_t> seed;
    bool no_timing = false;
};

struct GenArgs {
    long n = 100, q = 100, r = 2, m = 40;
    double kappa = 1.0;
    double sigma_v = 0.0;
    std::optional<double> nsr;
    std::uint64_t seed = 0;
    std::string out;
};

struct VerifyArgs {
    long n = 20, q = 10, r = 2, m = 50, reps = 2000;
    double kappa = 1.0;
    double sigma_v = 0.5;
    std::uint64_t seed = 0;
    std::optional<double> c_tilde;
    std::optional<double> alpha;
    bool json = false;
};

struct SolveArgs {
    std::string instance;
    std::string solver = "altgdmin";
    long r = 2;
    long max_iters = 100;
    double tol = 1e-12;
    double eta_scale = 0.5;
    std::string eta_mode = "from-b";
    std::string split_mode = "no-split";
    std::optional<double> kappa;
    std::optional<double> mu;
    std::optional<std::string> report;
};

int cmd_run(const RunArgs& args) {
    auto spec = lrcs::harness::load_config(args.config);
    if (args.solver) spec.solver = lrcs::harness::parse_solver(*args.solver);
    if (args.out) spec.output_path = *args.out;
    if (args.seed) spec.base_seed = *args.seed;
    if (args.threads) {
        spec.threads = *args.threads;
    } else if (const char* env = std::getenv("LRCS_THREADS")) {
        lrcs::harness::apply_setting(spec, "threads", env);
    }
    if (args.no_timing) spec.record_timing = false;

    const auto outcomes = lrcs::harness::run_experiment(spec);
    std::size_t failed = 0;
    for (const auto& o : outcomes) failed += o.status != "ok";
    std::cout << "wrote " << outcomes.size() << " trials to " << spec.output_path.string();
    if (failed) std::cout << " (" << failed << " with status != ok)";
    std::cout << '\n';
    return 0;
}

int cmd_gen(const GenArgs& args) {
    const auto truth = lrcs::generate_ground_truth(args.n, args.q, args.r, args.kappa, args.seed);
    const double sigma_v = args.nsr ? lrcs::sigma_v_for_nsr(truth, *args.nsr) : args.sigma_v;
    const auto instance = lrcs::measure(truth, args.m, sigma_v, args.seed);
    lrcs::save_instance(instance, args.out);
    const auto inc = lrcs::incoherence(truth);
    std::cout << "instance written to " << args.out << " (mu = " << inc.mu
              << ", kappa = " << inc.kappa << ", nsr = " << lrcs::nsr(truth, sigma_v) << ")\n";
    return 0;
}

int cmd_verify_init(const VerifyArgs& args) {
    const auto truth = lrcs::generate_ground_truth(args.n, args.q, args.r, args.kappa, args.seed);
    double alpha = 0.0;
    if (args.alpha) {
        alpha = *args.alpha;
    } else {
        const double c_tilde = args.c_tilde ? *args.c_tilde : lrcs::InitConfig::measured(truth).c_tilde;
        alpha = lrcs::population_alpha(truth, args.sigma_v, c_tilde);
    }
    const auto check =
        lrcs::verify_init_expectation(truth, args.m, args.sigma_v, alpha, args.reps, args.seed);
    if (args.json) {
        nlohmann::json j = {{"alpha", check.alpha},
                            {"repetitions", check.repetitions},
                            {"rel_frob_deviation", check.rel_frob_deviation},
                            {"max_col_rel_deviation", check.max_col_rel_deviation},
                            {"min_weight", check.min_weight},
                            {"mean_truncation_fraction", check.mean_truncation_fraction}};
        std::cout << j.dump(2) << '\n';
    } else {
        std::printf("alpha                     %.6g\n", check.alpha);
        std::printf("repetitions               %ld\n", static_cast<long>(check.repetitions));
        std::printf("min w_k(alpha)            %.6f\n", check.min_weight);
        std::printf("mean truncation fraction  %.6f\n", check.mean_truncation_fraction);
        std::printf("rel frobenius deviation   %.6f\n", check.rel_frob_deviation);
        std::printf("max relative deviation    %.6f\n", check.max_col_rel_deviation);
    }
    return 0;
}

int cmd_solve(const SolveArgs& args) {
    const auto instance = lrcs::load_instance(args.instance);
    lrcs::SolverConfig cfg;
    cfg.r = args.r;
    cfg.max_iters = args.max_iters;
    cfg.tol = args.tol;
    cfg.eta_scale = args.eta_scale;
    cfg.eta_mode = lrcs::parse_eta_mode(args.eta_mode);
    cfg.split_mode = lrcs::parse_split_mode(args.split_mode);
    if (args.kappa || args.mu) {
        if (!args.kappa || !args.mu) throw lrcs::ConfigError("--kappa and --mu go together");
        cfg.init = lrcs::InitConfig::from_constants(*args.kappa, *args.mu);
    }
    const auto kind = lrcs::harness::parse_solver(args.solver);
    lrcs::RunReport report;
    int code = 0;
    try {
        report = kind == lrcs::harness::SolverKind::kAltMin ? lrcs::run_altmin(instance, cfg).report
                                                            : lrcs::run(instance, cfg).report;
    } catch (const lrcs::SolverFailure& failure) {
        report = failure.partial();
        std::cerr << "solver failed: " << failure.what() << '\n';
        code = kExitSolver;
    }
    const auto text = report.to_json().dump(2);
    if (args.report) {
        std::ofstream out(*args.report, std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + *args.report);
        out << text << '\n';
    } else {
        std::cout << text << '\n';
    }
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Low-rank column-wise sensing: AltGDmin / AltMin experiments"};
    app.require_subcommand(1);

    RunArgs run_args;
    auto* run = app.add_subcommand("run", "Run a seeded experiment grid from a config file");
    run->add_option("--config", run_args.config, "Experiment config (key = value lines)")->required();
    run->add_option("--solver", run_args.solver, "altgdmin | altmin");
    run->add_option("--out", run_args.out, "Output directory");
    run->add_option("--threads", run_args.threads, "Worker threads (fallback: LRCS_THREADS)");
    run->add_option("--seed", run_args.seed, "Base seed");
    run->add_flag("--no-timing", run_args.no_timing, "Write 0 in timing columns (byte-reproducible output)");

    GenArgs gen_args;
    auto* gen = app.add_subcommand("gen", "Generate a synthetic instance on disk");
    gen->add_option("--n", gen_args.n);
    gen->add_option("--q", gen_args.q);
    gen->add_option("--r", gen_args.r);
    gen->add_option("--m", gen_args.m);
    gen->add_option("--kappa", gen_args.kappa);
    auto* sigma_opt = gen->add_option("--sigma-v", gen_args.sigma_v);
    gen->add_option("--nsr", gen_args.nsr)->excludes(sigma_opt);
    gen->add_option("--seed", gen_args.seed);
    gen->add_option("--out", gen_args.out)->required();

    VerifyArgs ver_args;
    auto* ver = app.add_subcommand("verify-init", "Monte-Carlo check of E[X0 | alpha] = X* D(alpha)");
    ver->add_option("--n", ver_args.n);
    ver->add_option("--q", ver_args.q);
    ver->add_option("--r", ver_args.r);
    ver->add_option("--m", ver_args.m);
    ver->add_option("--kappa", ver_args.kappa);
    ver->add_option("--sigma-v", ver_args.sigma_v);
    ver->add_option("--reps", ver_args.reps, "Independent measurement draws");
    ver->add_option("--seed", ver_args.seed);
    auto* ct = ver->add_option("--c-tilde", ver_args.c_tilde, "Truncation constant (default 9 kappa^2 mu^2)");
    ver->add_option("--alpha", ver_args.alpha, "Fixed threshold (overrides --c-tilde)")->excludes(ct);
    ver->add_flag("--json", ver_args.json);

    SolveArgs solve_args;
    auto* solve = app.add_subcommand("solve", "Run one solver on an instance directory");
    solve->add_option("--instance", solve_args.instance)->required();
    solve->add_option("--solver", solve_args.solver);
    solve->add_option("--r", solve_args.r);
    solve->add_option("--max-iters", solve_args.max_iters);
    solve->add_option("--tol", solve_args.tol);
    solve->add_option("--eta-scale", solve_args.eta_scale);
    solve->add_option("--eta-mode", solve_args.eta_mode);
    solve->add_option("--split-mode", solve_args.split_mode);
    solve->add_option("--kappa", solve_args.kappa);
    solve->add_option("--mu", solve_args.mu);
    solve->add_option("--report", solve_args.report, "Write the JSON report here instead of stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(run_args);
        if (*gen) return cmd_gen(gen_args);
        if (*ver) return cmd_verify_init(ver_args);
        if (*solve) return cmd_solve(solve_args);
    } catch (const lrcs::ConfigError& err) {
        std::cerr << "config error: " << err.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return kExitIo;
    }
    return 0;
}
