#include "solver_common.hpp"

#include <cmath>

namespace lrcs::detail {

namespace {

RunMetadata make_metadata(const ProblemInstance& instance, const SolverConfig& cfg,
                          const std::string& solver) {
    RunMetadata meta;
    meta.solver = solver;
    meta.n = instance.n();
    meta.q = instance.q();
    meta.r = cfg.r;
    meta.m = instance.m;
    meta.sigma_v = instance.sigma_v;
    meta.seed = instance.seed;
    if (instance.truth) {
        const auto inc = incoherence(*instance.truth);
        meta.mu = inc.mu;
        meta.kappa = inc.kappa;
        meta.nsr = nsr(*instance.truth, instance.sigma_v);
    }
    return meta;
}

InitConfig resolve_init(const ProblemInstance& instance, const SolverConfig& cfg) {
    if (cfg.init) return *cfg.init;
    if (!instance.truth) {
        throw ConfigError("solver: kappa and mu must be supplied when the instance has no ground truth");
    }
    return InitConfig::measured(*instance.truth);
}

std::string failure_kind(const NumericalError& err) {
    return dynamic_cast<const RankDeficientError*>(&err) != nullptr ? "rank_deficient"
                                                                    : "numerical_error";
}

}  // namespace

RunResult drive(const ProblemInstance& instance, const SolverConfig& cfg, const DriverOptions& opts,
                const UStep& step) {
    const auto run_start = Clock::now();
    instance.validate();
    cfg.validate();
    if (cfg.r > std::min(instance.n(), instance.q())) {
        throw ConfigError("solver: r exceeds min(n, q)");
    }
    const SplitPlan plan(instance, cfg.split_mode, cfg.max_iters);
    if (plan.rows_per_split() < cfg.r) {
        throw ConfigError("solver: fewer measurement rows per split (" +
                          std::to_string(plan.rows_per_split()) + ") than the rank " +
                          std::to_string(cfg.r));
    }
    const InitConfig init_cfg = resolve_init(instance, cfg);

    RunResult result;
    RunReport& report = result.report;
    SolverState& state = result.state;
    report.meta = make_metadata(instance, cfg, opts.solver);

    const GroundTruth* truth = instance.truth ? &*instance.truth : nullptr;
    const double x_star_spectral = truth ? truth->sigma_max() : 0.0;

    auto fail = [&](const NumericalError& err, const std::string& where) -> SolverFailure {
        report.status = failure_kind(err);
        report.message = where + ": " + err.what();
        report.iterations = state.iter;
        report.history = state.history;
        report.total_ms = ms_since(run_start);
        return SolverFailure(report.message, report.status, report);
    };

    const auto init_start = Clock::now();
    InitResult init;
    try {
        init = spectral_init(plan.init_slice(), cfg.r, init_cfg, false);
    } catch (const NumericalError& err) {
        throw fail(err, "initialization");
    }
    report.init_ms = ms_since(init_start);
    report.alpha = init.alpha;
    report.truncation_fraction = init.truncation_fraction;
    report.init_degenerate = init.degenerate;
    if (truth) report.init_sd2 = sd2(init.u0, truth->u_star());
    if (opts.on_init) opts.on_init(init);

    state.u = init.u0;
    DriverContext ctx;
    ctx.init = &init;
    ctx.truth = truth;

    double y_energy = 0.0;
    for (Index k = 0; k < instance.q(); ++k) y_energy += instance.observations[k].squaredNorm();

    double prev_objective = std::numeric_limits<double>::infinity();
    Index increases = 0;
    report.stop_reason = "max_iters";

    for (Index t = 1; t <= cfg.max_iters; ++t) {
        const auto iter_start = Clock::now();
        IterationRecord rec;
        rec.iter = t;
        MatrixXd b;
        UStepOutcome out;
        double change = 0.0;
        try {
            b = update_b(state.u, plan.b_slice(t), &rec.objective);
            rec.b_step_ms = ms_since(iter_start);
            out = step(state.u, b, plan.grad_slice(t), ctx);
            change = sd2(state.u, out.u);
        } catch (const NumericalError& err) {
            throw fail(err, "iteration " + std::to_string(t));
        }
        rec.u_step_ms = out.u_ms;
        rec.eta_used = out.eta;
        rec.grad_norm = out.grad_norm;
        if (truth) {
            rec.sd2_to_truth = sd2(out.u, truth->u_star());
            rec.frob_rel_err = (state.u * b - truth->x_star()).norm() / x_star_spectral;
        }

        state.u = std::move(out.u);
        state.b = std::move(b);
        state.iter = t;
        rec.wall_ms = ms_since(iter_start);
        state.history.push_back(rec);
        if (cfg.on_iteration) cfg.on_iteration(state);

        if (opts.use_guard && !cfg.theory_mode) {
            const double slack = 1e-9 * prev_objective + 1e-14 * y_energy;
            if (std::isfinite(prev_objective) && rec.objective > prev_objective + slack) {
                ++increases;
            } else {
                increases = 0;
            }
            if (increases >= cfg.guard_window) {
                ctx.eta_multiplier *= 0.5;
                ++report.eta_halvings;
                increases = 0;
            }
        }
        prev_objective = rec.objective;

        if (change <= cfg.tol) {
            report.stop_reason = "converged";
            break;
        }
    }

    // Final coefficients from all rows, for the reported estimate U_T B.
    try {
        state.b = update_b(state.u, MeasurementSlice(instance));
    } catch (const NumericalError& err) {
        throw fail(err, "final coefficient solve");
    }
    if (truth) {
        ErrorSummary fin = frob_error(state.u * state.b, truth->x_star());
        fin.sd2 = sd2(state.u, truth->u_star());
        report.final_error = fin;
    }
    report.iterations = state.iter;
    report.history = state.history;
    report.total_ms = ms_since(run_start);
    return result;
}

}  // namespace lrcs::detail
