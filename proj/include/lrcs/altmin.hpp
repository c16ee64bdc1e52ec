#pragma once

#include "lrcs/gdmin.hpp"

namespace lrcs {

/// Reject the U normal equations above this condition-number estimate.
inline constexpr double kAltMinMaxCondition = 1e12;

/// Exact minimizer over U of Σ_k ‖y_k − A_k U b_k‖², before orthonormalization.
///
/// Unknowns are vec(U) in column-major order, vec(U)[j + n·l] = U(j, l), so
/// measurement row i of column k has coefficients b_kᵀ ⊗ a_ikᵀ. The nr×nr
/// normal matrix Σ_k (b_k b_kᵀ) ⊗ (A_kᵀ A_k) is assembled block by block and
/// Cholesky-solved. Throws NumericalError if it is singular or its
/// estimated condition number exceeds kAltMinMaxCondition.
MatrixXd solve_u_least_squares(const MatrixXd& b, const MeasurementSlice& slice);

/// solve_u_least_squares followed by a positive-diagonal thin QR.
MatrixXd update_u_full_ls(const MatrixXd& b, const MeasurementSlice& slice);

/// AltMin baseline: the same init and B-update as AltGDmin, with the U
/// gradient step replaced by update_u_full_ls. Same report schema.
RunResult run_altmin(const ProblemInstance& instance, const SolverConfig& cfg);

}  // namespace lrcs
