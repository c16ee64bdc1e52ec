#pragma once

// Shared driver for the alternating solvers. Internal to the library.

#include "lrcs/errors.hpp"
#include "lrcs/gdmin.hpp"
#include "lrcs/linalg.hpp"
#include "lrcs/metrics.hpp"

#include <chrono>
#include <functional>
#include <limits>
#include <string>

namespace lrcs::detail {

using Clock = std::chrono::steady_clock;

inline double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

struct UStepOutcome {
    MatrixXd u;
    double eta = 0.0;
    double grad_norm = 0.0;
    double u_ms = 0.0;
};

struct DriverContext {
    const InitResult* init = nullptr;
    const GroundTruth* truth = nullptr;
    /// Step-size multiplier maintained by the divergence guard.
    double eta_multiplier = 1.0;
};

using UStep = std::function<UStepOutcome(const MatrixXd& u, const MatrixXd& b,
                                         const MeasurementSlice& grad_slice,
                                         const DriverContext& ctx)>;

struct DriverOptions {
    std::string solver;
    bool use_guard = false;
    /// Called once after init, before the loop (e.g. to pin σ_max for η).
    std::function<void(const InitResult&)> on_init;
};

RunResult drive(const ProblemInstance& instance, const SolverConfig& cfg, const DriverOptions& opts,
                const UStep& step);

}  // namespace lrcs::detail
