#pragma once

#include "lrcs/model.hpp"
#include "lrcs/slice.hpp"

#include <cstdint>
#include <limits>
#include <optional>

namespace lrcs {

/// Truncation constants. c_tilde multiplies the mean squared observation
/// to give the threshold α; the standard choice is 9κ²μ².
struct InitConfig {
    double c_tilde = 9.0;
    double kappa = 1.0;
    double mu = 1.0;

    static InitConfig from_constants(double kappa, double mu);
    /// κ and μ measured from a planted truth.
    static InitConfig measured(const GroundTruth& truth);
    /// c_tilde = +∞: no entry is ever truncated.
    static InitConfig untruncated();

    void validate() const;
};

struct InitResult {
    MatrixXd u0;
    double alpha = 0.0;
    std::optional<MatrixXd> x0;
    /// Fraction of the m·q scalar measurements zeroed by truncation.
    double truncation_fraction = 0.0;
    /// Top-r singular values of X̂₀.
    VectorXd singular_values;
    /// X̂₀ had numerical rank < r; trailing columns of u0 are a completion.
    bool degenerate = false;
};

/// α = c_tilde · Σ_{i,k} y_ik² / (m q).
double compute_alpha(const MeasurementSlice& slice, const InitConfig& cfg);

/// Keep y_i when |y_i| ≤ √α, zero it otherwise.
VectorXd truncate(const VectorXd& y, double alpha);

struct AssembledX0 {
    MatrixXd x0;
    Index truncated = 0;
};

/// X̂₀ column k = (1/m) A_kᵀ truncate(y_k, α). Columns are independent.
AssembledX0 assemble_x0(const MeasurementSlice& slice, double alpha);

/// Truncated spectral initialization: α from compute_alpha, X̂₀ from
/// assemble_x0, U₀ = top-r left singular vectors of X̂₀ (sign-canonical).
InitResult spectral_init(const MeasurementSlice& slice, Index r, const InitConfig& cfg,
                         bool keep_x0 = true);

inline InitResult spectral_init(const ProblemInstance& instance, Index r, const InitConfig& cfg,
                                bool keep_x0 = true) {
    return spectral_init(MeasurementSlice(instance), r, cfg, keep_x0);
}

/// E[ζ² 1{|ζ| ≤ γ}] for ζ ~ N(0,1), closed form
/// erf(γ/√2) − γ √(2/π) exp(−γ²/2).
double truncated_second_moment(double gamma);

/// E[X̂₀ | α]: column k is x*_k · w_k(α) with
/// w_k = truncated_second_moment(√α / sqrt(‖x*_k‖² + σ_v²)).
MatrixXd expected_x0(const GroundTruth& truth, double sigma_v, double alpha);

/// The value α concentrates around: c_tilde (‖X*‖_F²/q + σ_v²).
double population_alpha(const GroundTruth& truth, double sigma_v, double c_tilde);

struct InitExpectationCheck {
    double alpha = 0.0;
    Index repetitions = 0;
    /// ‖mean(X̂₀) − E[X̂₀|α]‖_F / ‖E[X̂₀|α]‖_F
    double rel_frob_deviation = 0.0;
    /// max_k ‖mean(X̂₀)_k − E[X̂₀|α]_k‖ / ‖E[X̂₀|α]_k‖
    double max_col_rel_deviation = 0.0;
    double min_weight = 0.0;
    double mean_truncation_fraction = 0.0;
};

/// Monte-Carlo check of E[X̂₀|α] = X* D(α): average X̂₀ over `repetitions`
/// independent measurement draws for a fixed truth and fixed α.
InitExpectationCheck verify_init_expectation(const GroundTruth& truth, Index m, double sigma_v,
                                             double alpha, Index repetitions, std::uint64_t seed);

}  // namespace lrcs
