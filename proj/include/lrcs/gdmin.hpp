#pragma once

#include "lrcs/init.hpp"
#include "lrcs/model.hpp"
#include "lrcs/report.hpp"
#include "lrcs/slice.hpp"

#include <functional>
#include <optional>
#include <string_view>
#include <vector>

namespace lrcs {

enum class SplitMode {
    kNoSplit,     ///< every phase sees all m rows
    kPaperSplit,  ///< 2T+1 disjoint equal row blocks: init, T B-updates, T gradients
};

enum class EtaMode {
    kFromB,     ///< σ_max(B_t), refreshed every iteration
    kFromInit,  ///< σ_max(X̂₀) · init_sigma_scale, fixed
    kOracle,    ///< σ_max* of the planted truth
};

std::string_view to_string(SplitMode mode);
std::string_view to_string(EtaMode mode);
SplitMode parse_split_mode(std::string_view text);
EtaMode parse_eta_mode(std::string_view text);

struct SolverState;

struct SolverConfig {
    Index r = 1;
    /// c in η = c / σ_max².
    double eta_scale = 0.5;
    Index max_iters = 100;
    /// Stop once the projector change ‖U⁺U⁺ᵀ − UUᵀ‖₂ falls to this.
    double tol = 1e-12;
    SplitMode split_mode = SplitMode::kNoSplit;
    EtaMode eta_mode = EtaMode::kFromB;
    double init_sigma_scale = 1.0;
    /// Theory mode: requires eta_scale ≤ 0.5 and disables the step-halving guard.
    bool theory_mode = false;
    /// Consecutive objective increases that trigger halving η.
    Index guard_window = 5;
    /// Truncation constants; measured from the truth when unset.
    std::optional<InitConfig> init;
    /// Called with the state after every iteration (u = U_t, b = B_t).
    std::function<void(const SolverState&)> on_iteration;

    void validate() const;
};

struct SolverState {
    MatrixXd u;
    MatrixXd b;
    Index iter = 0;
    std::vector<IterationRecord> history;
};

struct RunResult {
    SolverState state;
    RunReport report;
};

/// Row layout of the phases. In no-split mode every slice is the full
/// instance; in paper-split mode slice τ covers rows [τ·m', (τ+1)·m').
class SplitPlan {
public:
    SplitPlan(const ProblemInstance& instance, SplitMode mode, Index max_iters);

    MeasurementSlice init_slice() const { return slice(0); }
    MeasurementSlice b_slice(Index t) const { return slice(t); }
    MeasurementSlice grad_slice(Index t) const { return slice(mode_ == SplitMode::kNoSplit ? 0 : max_iters_ + t); }
    Index rows_per_split() const { return rows_; }

private:
    MeasurementSlice slice(Index tau) const;

    const ProblemInstance* instance_;
    SplitMode mode_;
    Index max_iters_;
    Index rows_;
};

/// b_k = argmin_b ‖y_k − A_k U b‖² for every column, by a pivoted QR of
/// A_k U. Throws RankDeficientError (with k) if A_k U has rank < r.
/// When `objective` is given it receives Σ_k ‖y_k − A_k U b_k‖².
MatrixXd update_b(const MatrixXd& u, const MeasurementSlice& slice, double* objective = nullptr);

/// ∇_U f(U, B) = Σ_k A_kᵀ (A_k U b_k − y_k) b_kᵀ, accumulated in ascending k.
MatrixXd gradient_u(const MatrixXd& u, const MatrixXd& b, const MeasurementSlice& slice);

/// f(U, B) = Σ_k ‖y_k − A_k U b_k‖².
double objective(const MatrixXd& u, const MatrixXd& b, const MeasurementSlice& slice);

/// U⁺ = Q factor of U − (η/m) ∇, positive R diagonal. A zero step returns U
/// unchanged. Only `u` differs in the returned state.
SolverState gd_step(const SolverState& state, const MatrixXd& grad, double eta, Index m);

/// AltGDmin: truncated spectral init, then alternating exact B-updates and
/// projected gradient steps on U. Throws SolverFailure with the partial
/// report if an iteration breaks down; ConfigError for invalid setups.
RunResult run(const ProblemInstance& instance, const SolverConfig& cfg);

}  // namespace lrcs
