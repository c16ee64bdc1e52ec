#include "lrcs/harness.hpp"

#include "lrcs/altmin.hpp"
#include "lrcs/errors.hpp"
#include "lrcs/model.hpp"
#include "lrcs/rng.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <thread>

namespace lrcs::harness {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view value) {
    std::vector<std::string_view> out;
    while (true) {
        const auto comma = value.find(',');
        out.push_back(trim(value.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        value.remove_prefix(comma + 1);
    }
    return out;
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
    T value{};
    const auto* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, value);
    if (text.empty() || res.ec != std::errc() || res.ptr != end) {
        throw ConfigError("config: bad value '" + std::string(text) + "' for key '" +
                          std::string(key) + "'");
    }
    return value;
}

template <typename T>
std::vector<T> parse_list(std::string_view key, std::string_view value) {
    std::vector<T> out;
    for (auto item : split_list(value)) out.push_back(parse_number<T>(key, item));
    return out;
}

template <typename T>
T parse_scalar(std::string_view key, std::string_view value) {
    const auto items = split_list(value);
    if (items.size() != 1) throw ConfigError("config: key '" + std::string(key) + "' takes one value");
    return parse_number<T>(key, items.front());
}

bool parse_bool(std::string_view key, std::string_view value) {
    const auto v = trim(value);
    if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
    if (v == "off" || v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config: key '" + std::string(key) + "' expects on/off");
}

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

std::string num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

double ms(double v, bool timing) { return timing ? v : 0.0; }

}  // namespace

std::string_view to_string(SolverKind kind) {
    return kind == SolverKind::kAltGdmin ? "altgdmin" : "altmin";
}

SolverKind parse_solver(std::string_view text) {
    if (text == "altgdmin") return SolverKind::kAltGdmin;
    if (text == "altmin") return SolverKind::kAltMin;
    throw ConfigError("unknown solver '" + std::string(text) + "'");
}

void ExperimentSpec::validate() const {
    const auto& g = grid;
    if (g.n.empty() || g.q.empty() || g.r.empty() || g.m.empty() || g.kappa.empty()) {
        throw ConfigError("experiment: every grid axis needs at least one value");
    }
    if (g.sigma_v.empty() == g.nsr.empty()) {
        throw ConfigError("experiment: give exactly one of sigma_v or nsr");
    }
    if (trials_per_cell < 1) throw ConfigError("experiment: trials must be at least 1");
    if (threads < 1) throw ConfigError("experiment: threads must be at least 1");
    if (!(success_sd2 > 0.0)) throw ConfigError("experiment: success_sd2 must be positive");

    SolverConfig probe = solver_cfg;
    probe.r = 1;
    probe.validate();

    for (const auto& cell : expand_grid(grid)) {
        const std::string where = "experiment cell " + std::to_string(cell.index) + ": ";
        if (cell.n < 1 || cell.q < 1 || cell.r < 1 || cell.m < 1) {
            throw ConfigError(where + "sizes must be positive");
        }
        if (cell.r > std::min(cell.n, cell.q)) throw ConfigError(where + "r > min(n, q)");
        if (!(cell.kappa >= 1.0)) throw ConfigError(where + "kappa must be >= 1");
        if (cell.r == 1 && cell.kappa != 1.0) throw ConfigError(where + "rank 1 requires kappa = 1");
        if (!(cell.sigma_v >= 0.0) || (cell.nsr_target && !(*cell.nsr_target >= 0.0))) {
            throw ConfigError(where + "noise level must be nonnegative");
        }
        Index rows = cell.m;
        if (solver_cfg.split_mode == SplitMode::kPaperSplit) {
            const Index parts = 2 * solver_cfg.max_iters + 1;
            if (cell.m % parts != 0) {
                throw ConfigError(where + "m = " + std::to_string(cell.m) +
                                  " not divisible into 2T+1 = " + std::to_string(parts) + " sets");
            }
            rows = cell.m / parts;
        }
        if (rows < cell.r) throw ConfigError(where + "fewer measurement rows than the rank");
        if (solver == SolverKind::kAltMin && rows * cell.q < cell.n * cell.r) {
            throw ConfigError(where + "altmin needs mq >= nr");
        }
        if (cell_memory_bytes(cell, solver) > memory_budget_bytes) {
            throw ConfigError(where + "needs ~" + std::to_string(cell_memory_bytes(cell, solver)) +
                              " bytes, above the memory budget of " +
                              std::to_string(memory_budget_bytes));
        }
    }
}

std::vector<GridCell> expand_grid(const ParameterGrid& grid) {
    std::vector<GridCell> cells;
    const bool by_nsr = !grid.nsr.empty();
    const auto& noise = by_nsr ? grid.nsr : grid.sigma_v;
    for (Index n : grid.n)
        for (Index q : grid.q)
            for (Index r : grid.r)
                for (double kappa : grid.kappa)
                    for (Index m : grid.m)
                        for (double level : noise) {
                            GridCell cell;
                            cell.index = static_cast<Index>(cells.size());
                            cell.n = n;
                            cell.q = q;
                            cell.r = r;
                            cell.m = m;
                            cell.kappa = kappa;
                            if (by_nsr) {
                                cell.nsr_target = level;
                            } else {
                                cell.sigma_v = level;
                            }
                            cells.push_back(cell);
                        }
    return cells;
}

std::uint64_t trial_seed(std::uint64_t base_seed, const GridCell& cell, Index trial) {
    return derive_seed(base_seed, {static_cast<std::uint64_t>(cell.n), static_cast<std::uint64_t>(cell.q),
                                   static_cast<std::uint64_t>(cell.r), std::bit_cast<std::uint64_t>(cell.kappa),
                                   static_cast<std::uint64_t>(trial)});
}

std::uint64_t cell_memory_bytes(const GridCell& cell, SolverKind solver) {
    const auto n = static_cast<std::uint64_t>(cell.n);
    const auto q = static_cast<std::uint64_t>(cell.q);
    const auto r = static_cast<std::uint64_t>(cell.r);
    const auto m = static_cast<std::uint64_t>(cell.m);
    std::uint64_t doubles = m * n * q + m * q + 4 * n * q + 4 * n * r;
    if (solver == SolverKind::kAltMin) doubles += (n * r) * (n * r) + n * n;
    return 8 * doubles;
}

void apply_setting(ExperimentSpec& spec, std::string_view key, std::string_view value) {
    auto& g = spec.grid;
    auto& cfg = spec.solver_cfg;
    value = trim(value);
    if (key == "n") {
        g.n = parse_list<Index>(key, value);
    } else if (key == "q") {
        g.q = parse_list<Index>(key, value);
    } else if (key == "r") {
        g.r = parse_list<Index>(key, value);
    } else if (key == "m") {
        g.m = parse_list<Index>(key, value);
    } else if (key == "kappa") {
        g.kappa = parse_list<double>(key, value);
    } else if (key == "sigma_v") {
        g.sigma_v = parse_list<double>(key, value);
        g.nsr.clear();
    } else if (key == "nsr") {
        g.nsr = parse_list<double>(key, value);
        g.sigma_v.clear();
    } else if (key == "trials") {
        spec.trials_per_cell = parse_scalar<Index>(key, value);
    } else if (key == "solver") {
        spec.solver = parse_solver(value);
    } else if (key == "max_iters") {
        cfg.max_iters = parse_scalar<Index>(key, value);
    } else if (key == "tol") {
        cfg.tol = parse_scalar<double>(key, value);
    } else if (key == "eta_scale") {
        cfg.eta_scale = parse_scalar<double>(key, value);
    } else if (key == "eta_mode") {
        cfg.eta_mode = parse_eta_mode(value);
    } else if (key == "split_mode") {
        cfg.split_mode = parse_split_mode(value);
    } else if (key == "theory_mode") {
        cfg.theory_mode = parse_bool(key, value);
    } else if (key == "init_sigma_scale") {
        cfg.init_sigma_scale = parse_scalar<double>(key, value);
    } else if (key == "guard_window") {
        cfg.guard_window = parse_scalar<Index>(key, value);
    } else if (key == "c_tilde") {
        InitConfig init = cfg.init.value_or(InitConfig{});
        init.c_tilde = parse_scalar<double>(key, value);
        cfg.init = init;
    } else if (key == "seed") {
        spec.base_seed = parse_scalar<std::uint64_t>(key, value);
    } else if (key == "threads") {
        spec.threads = parse_scalar<Index>(key, value);
    } else if (key == "success_sd2") {
        spec.success_sd2 = parse_scalar<double>(key, value);
    } else if (key == "memory_budget_mb") {
        spec.memory_budget_bytes = parse_scalar<std::uint64_t>(key, value) << 20;
    } else if (key == "timing") {
        spec.record_timing = parse_bool(key, value);
    } else if (key == "out") {
        spec.output_path = std::filesystem::path(std::string(value));
    } else {
        throw ConfigError("config: unknown key '" + std::string(key) + "'");
    }
}

ExperimentSpec parse_config(std::istream& in) {
    ExperimentSpec spec;
    std::set<std::string, std::less<>> seen;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view text = line;
        if (const auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
        text = trim(text);
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        }
        const auto key = trim(text.substr(0, eq));
        if (!seen.insert(std::string(key)).second) {
            throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key '" +
                              std::string(key) + "'");
        }
        apply_setting(spec, key, text.substr(eq + 1));
    }
    if (seen.count("sigma_v") && seen.count("nsr")) {
        throw ConfigError("config: sigma_v and nsr are mutually exclusive");
    }
    return spec;
}

ExperimentSpec load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path.string());
    return parse_config(in);
}

namespace {

TrialOutcome run_one(const ExperimentSpec& spec, const GridCell& cell, Index trial) {
    TrialOutcome out;
    out.cell = cell;
    out.trial = trial;
    out.run_id = cell.index * spec.trials_per_cell + trial;
    out.seed = trial_seed(spec.base_seed, cell, trial);

    const auto truth = generate_ground_truth(cell.n, cell.q, cell.r, cell.kappa, out.seed);
    out.sigma_v = cell.nsr_target ? sigma_v_for_nsr(truth, *cell.nsr_target) : cell.sigma_v;
    const auto inc = incoherence(truth);
    out.mu = inc.mu;
    out.kappa = inc.kappa;
    out.nsr = nsr(truth, out.sigma_v);
    const auto instance = measure(truth, cell.m, out.sigma_v, out.seed);

    SolverConfig cfg = spec.solver_cfg;
    cfg.r = cell.r;
    try {
        out.report = spec.solver == SolverKind::kAltMin ? run_altmin(instance, cfg).report
                                                        : run(instance, cfg).report;
        out.status = out.report.status;
    } catch (const SolverFailure& failure) {
        out.report = failure.partial();
        out.status = failure.kind();
    } catch (const std::exception& err) {
        out.report.meta.solver = std::string(to_string(spec.solver));
        out.report.status = "error";
        out.report.message = err.what();
        out.status = "error";
    }
    return out;
}

}  // namespace

std::vector<TrialOutcome> run_trials(const ExperimentSpec& spec) {
    spec.validate();
    const auto cells = expand_grid(spec.grid);
    const auto jobs = static_cast<Index>(cells.size()) * spec.trials_per_cell;
    std::vector<TrialOutcome> results(static_cast<std::size_t>(jobs));

    std::atomic<Index> next{0};
    auto worker = [&] {
        for (Index job = next++; job < jobs; job = next++) {
            const auto& cell = cells[static_cast<std::size_t>(job / spec.trials_per_cell)];
            results[static_cast<std::size_t>(job)] = run_one(spec, cell, job % spec.trials_per_cell);
        }
    };
    const auto pool_size = std::min<Index>(spec.threads, std::max<Index>(jobs, 1));
    std::vector<std::thread> pool;
    for (Index i = 1; i < pool_size; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    return results;
}

double quantile(std::vector<double> values, double p) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(values.begin(), values.end());
    const double h = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::vector<SummaryRow> emit_summary(const std::vector<TrialOutcome>& outcomes, double success_sd2) {
    std::vector<SummaryRow> rows;
    std::map<Index, std::size_t> slot;
    std::vector<std::vector<const TrialOutcome*>> groups;
    for (const auto& o : outcomes) {
        auto [it, fresh] = slot.try_emplace(o.cell.index, groups.size());
        if (fresh) groups.emplace_back();
        groups[it->second].push_back(&o);
    }
    for (const auto& group : groups) {
        SummaryRow row;
        row.cell = group.front()->cell;
        row.solver = group.front()->report.meta.solver;
        row.trials = static_cast<Index>(group.size());
        std::vector<double> sd2s;
        std::vector<double> times;
        std::vector<double> iters;
        Index successes = 0;
        for (const auto* o : group) {
            if (o->status == "ok") ++row.ok;
            times.push_back(o->report.total_ms);
            iters.push_back(static_cast<double>(o->report.iterations));
            if (o->report.final_error) {
                sd2s.push_back(o->report.final_error->sd2);
                if (o->status == "ok" && o->report.final_error->sd2 <= success_sd2) ++successes;
            }
        }
        row.success_rate = static_cast<double>(successes) / static_cast<double>(row.trials);
        row.sd2_median = quantile(sd2s, 0.5);
        row.sd2_q25 = quantile(sd2s, 0.25);
        row.sd2_q75 = quantile(sd2s, 0.75);
        row.iters_median = quantile(iters, 0.5);
        row.total_ms_median = quantile(times, 0.5);
        row.total_ms_q25 = quantile(times, 0.25);
        row.total_ms_q75 = quantile(times, 0.75);
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_results_csv(std::ostream& out, const std::vector<TrialOutcome>& outcomes, bool timing) {
    out << kResultsSchema << '\n'
        << "n,q,r,m,sigma_v,nsr,mu,kappa,seed,solver,final_sd2,final_frob_rel,iters,init_ms,"
           "total_ms,status\n";
    for (const auto& o : outcomes) {
        const auto& rep = o.report;
        std::optional<double> sd;
        std::optional<double> fr;
        if (rep.final_error) {
            sd = rep.final_error->sd2;
            fr = rep.final_error->frob_rel;
        }
        out << o.cell.n << ',' << o.cell.q << ',' << o.cell.r << ',' << o.cell.m << ','
            << num(o.sigma_v) << ',' << num(o.nsr) << ',' << num(o.mu) << ',' << num(o.kappa) << ','
            << o.seed << ',' << rep.meta.solver << ',' << num(sd) << ',' << num(fr) << ','
            << rep.iterations << ',' << num(ms(rep.init_ms, timing)) << ','
            << num(ms(rep.total_ms, timing)) << ',' << o.status << '\n';
    }
}

void write_history_csv(std::ostream& out, const std::vector<TrialOutcome>& outcomes, bool timing) {
    out << kHistorySchema << '\n' << "run_id,iter,sd2,frob_rel,grad_norm,eta,wall_ms\n";
    for (const auto& o : outcomes) {
        for (const auto& rec : o.report.history) {
            out << o.run_id << ',' << rec.iter << ',' << num(rec.sd2_to_truth) << ','
                << num(rec.frob_rel_err) << ',' << num(rec.grad_norm) << ',' << num(rec.eta_used)
                << ',' << num(ms(rec.wall_ms, timing)) << '\n';
        }
    }
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows, bool timing) {
    out << kSummarySchema << '\n'
        << "n,q,r,m,kappa,noise,solver,trials,ok,success_rate,sd2_median,sd2_q25,sd2_q75,"
           "iters_median,total_ms_median,total_ms_q25,total_ms_q75\n";
    for (const auto& row : rows) {
        const double noise = row.cell.nsr_target ? *row.cell.nsr_target : row.cell.sigma_v;
        out << row.cell.n << ',' << row.cell.q << ',' << row.cell.r << ',' << row.cell.m << ','
            << num(row.cell.kappa) << ',' << num(noise) << ',' << row.solver << ',' << row.trials
            << ',' << row.ok << ',' << num(row.success_rate) << ',' << num(row.sd2_median) << ','
            << num(row.sd2_q25) << ',' << num(row.sd2_q75) << ',' << num(row.iters_median) << ','
            << num(ms(row.total_ms_median, timing)) << ',' << num(ms(row.total_ms_q25, timing))
            << ',' << num(ms(row.total_ms_q75, timing)) << '\n';
    }
}

std::vector<TrialOutcome> run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    std::filesystem::create_directories(spec.output_path);
    auto outcomes = run_trials(spec);
    const auto summary = emit_summary(outcomes, spec.success_sd2);

    auto write = [&](const char* name, auto&& body) {
        const auto path = spec.output_path / name;
        std::ofstream out(path, std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
        body(out);
        out.flush();
        if (!out) throw std::runtime_error("write failed: " + path.string());
    };
    write("results.csv", [&](std::ostream& o) { write_results_csv(o, outcomes, spec.record_timing); });
    write("history.csv", [&](std::ostream& o) { write_history_csv(o, outcomes, spec.record_timing); });
    write("summary.csv", [&](std::ostream& o) { write_summary_csv(o, summary, spec.record_timing); });
    return outcomes;
}

}  // namespace lrcs::harness
