#pragma once

#include <Eigen/Dense>

namespace lrcs {

struct ErrorSummary {
    double sd2 = 0.0;
    double frob_rel = 0.0;
    double frob_abs = 0.0;
};

/// Inputs to sd2 must be orthonormal to within this (max-abs of UᵀU − I).
inline constexpr double kSd2OrthoTol = 1e-6;

/// SD₂(U₁, U₂) = ‖(I − U₁U₁ᵀ)U₂‖₂, the sine of the largest principal angle.
/// Never forms the n×n projector. Throws std::invalid_argument on
/// non-orthonormal or mismatched inputs.
///
/// Note SE_F(U₁, U₂) ≤ √r · SD₂(U₁, U₂).
double sd2(const Eigen::MatrixXd& u1, const Eigen::MatrixXd& u2);

/// frob_abs = ‖X̂ − X*‖_F, frob_rel = frob_abs / ‖X*‖₂ (spectral norm).
/// sd2 is left at 0; callers fill it when they have bases.
ErrorSummary frob_error(const Eigen::MatrixXd& x_hat, const Eigen::MatrixXd& x_star);

}  // namespace lrcs
