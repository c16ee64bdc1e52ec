#pragma once

#include "lrcs/gdmin.hpp"
#include "lrcs/report.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lrcs::harness {

enum class SolverKind { kAltGdmin, kAltMin };

std::string_view to_string(SolverKind kind);
SolverKind parse_solver(std::string_view text);

/// Values swept in a Cartesian product. Either sigma_v or nsr is used as
/// the noise axis, never both.
struct ParameterGrid {
    std::vector<Index> n{100};
    std::vector<Index> q{100};
    std::vector<Index> r{2};
    std::vector<Index> m{40};
    std::vector<double> kappa{1.0};
    std::vector<double> sigma_v{0.0};
    std::vector<double> nsr;
};

struct ExperimentSpec {
    ParameterGrid grid;
    Index trials_per_cell = 1;
    SolverKind solver = SolverKind::kAltGdmin;
    /// Rank is taken from the grid cell; everything else applies to all cells.
    SolverConfig solver_cfg;
    std::filesystem::path output_path = ".";
    std::uint64_t base_seed = 0;
    Index threads = 1;
    /// A trial counts as a success when its final SD₂ is at most this.
    double success_sd2 = 1e-6;
    std::uint64_t memory_budget_bytes = std::uint64_t{2} << 30;
    /// When false every *_ms column is written as 0, making output bytes
    /// a pure function of the spec.
    bool record_timing = true;

    void validate() const;
};

struct GridCell {
    Index index = 0;
    Index n = 0;
    Index q = 0;
    Index r = 0;
    Index m = 0;
    double kappa = 1.0;
    double sigma_v = 0.0;
    /// Set when the grid sweeps NSR instead of σ_v.
    std::optional<double> nsr_target;
};

/// Cells in row-major order over (n, q, r, kappa, m, noise).
std::vector<GridCell> expand_grid(const ParameterGrid& grid);

/// Instance seed for a trial. Keyed by the cell's (n, q, r, κ) and the
/// trial number only, so adding grid values never changes existing seeds,
/// and cells that differ only in m or noise level share the truth, the
/// leading measurement rows and the standardized noise.
std::uint64_t trial_seed(std::uint64_t base_seed, const GridCell& cell, Index trial);

/// Approximate resident bytes for one trial of this cell.
std::uint64_t cell_memory_bytes(const GridCell& cell, SolverKind solver);

struct TrialOutcome {
    GridCell cell;
    Index trial = 0;
    Index run_id = 0;
    std::uint64_t seed = 0;
    double mu = 0.0;
    double kappa = 0.0;
    double nsr = 0.0;
    double sigma_v = 0.0;
    RunReport report;
    std::string status = "ok";
};

/// Flat `key = value[, value ...]` text. `#` starts a comment. Recognized
/// keys are listed in README.md; unknown or repeated keys are errors.
ExperimentSpec parse_config(std::istream& in);
ExperimentSpec load_config(const std::filesystem::path& path);
void apply_setting(ExperimentSpec& spec, std::string_view key, std::string_view value);

/// Execute every (cell, trial) on a pool of spec.threads workers. Results
/// come back ordered by run_id regardless of scheduling.
std::vector<TrialOutcome> run_trials(const ExperimentSpec& spec);

struct SummaryRow {
    GridCell cell;
    std::string solver;
    Index trials = 0;
    Index ok = 0;
    double success_rate = 0.0;
    double sd2_median = 0.0;
    double sd2_q25 = 0.0;
    double sd2_q75 = 0.0;
    double iters_median = 0.0;
    double total_ms_median = 0.0;
    double total_ms_q25 = 0.0;
    double total_ms_q75 = 0.0;
};

/// Linear-interpolation quantile (R type 7); NaN for an empty sample.
double quantile(std::vector<double> values, double p);

/// One row per cell, in first-appearance order.
std::vector<SummaryRow> emit_summary(const std::vector<TrialOutcome>& outcomes, double success_sd2);

inline constexpr std::string_view kResultsSchema = "# lrcs results v1";
inline constexpr std::string_view kHistorySchema = "# lrcs history v1";
inline constexpr std::string_view kSummarySchema = "# lrcs summary v1";

void write_results_csv(std::ostream& out, const std::vector<TrialOutcome>& outcomes, bool timing);
void write_history_csv(std::ostream& out, const std::vector<TrialOutcome>& outcomes, bool timing);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows, bool timing);

/// Validate, run, and write results.csv, history.csv and summary.csv into
/// spec.output_path. Throws ConfigError for bad specs and
/// std::runtime_error for I/O failures; solver failures become rows.
std::vector<TrialOutcome> run_experiment(const ExperimentSpec& spec);

}  // namespace lrcs::harness
