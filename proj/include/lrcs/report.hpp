#pragma once

#include "lrcs/metrics.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lrcs {

using Eigen::Index;

struct IterationRecord {
    Index iter = 0;
    /// SD₂(U_t, U*); absent without ground truth.
    std::optional<double> sd2_to_truth;
    /// ‖U_{t-1} B_t − X*‖_F / ‖X*‖₂; absent without ground truth.
    std::optional<double> frob_rel_err;
    /// ‖∇_U f(U_{t-1}, B_t)‖_F
    double grad_norm = 0.0;
    /// Step size actually used (0 for AltMin).
    double eta_used = 0.0;
    /// f(U_{t-1}, B_t) on the B-update rows.
    double objective = 0.0;
    double b_step_ms = 0.0;
    double u_step_ms = 0.0;
    double wall_ms = 0.0;
};

struct RunMetadata {
    std::string solver;
    Index n = 0;
    Index q = 0;
    Index r = 0;
    Index m = 0;
    double sigma_v = 0.0;
    std::uint64_t seed = 0;
    std::optional<double> mu;
    std::optional<double> kappa;
    std::optional<double> nsr;
};

struct RunReport {
    RunMetadata meta;
    std::vector<IterationRecord> history;

    double alpha = 0.0;
    double truncation_fraction = 0.0;
    bool init_degenerate = false;
    std::optional<double> init_sd2;

    std::optional<ErrorSummary> final_error;
    Index iterations = 0;
    Index eta_halvings = 0;
    std::string stop_reason;
    std::string status = "ok";
    std::string message;

    double init_ms = 0.0;
    double total_ms = 0.0;

    nlohmann::json to_json() const;
};

/// Raised by the solver drivers; carries everything recorded before the
/// failing iteration. `kind` is a short status tag for reports.
class SolverFailure : public std::runtime_error {
public:
    SolverFailure(const std::string& what, std::string kind, RunReport partial)
        : std::runtime_error(what), kind_(std::move(kind)), partial_(std::move(partial)) {}

    const std::string& kind() const noexcept { return kind_; }
    const RunReport& partial() const noexcept { return partial_; }

private:
    std::string kind_;
    RunReport partial_;
};

}  // namespace lrcs
