#pragma once

#include <Eigen/Dense>

namespace lrcs::linalg {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// max_ij |(UᵀU − I)_ij|
double orthonormality_error(const MatrixXd& u);

/// Thin QR with the R diagonal forced positive, returning the n×r Q factor.
/// Throws NumericalError (carrying the input) if a diagonal entry of R is
/// negligible relative to the input norm.
MatrixXd thin_q(const MatrixXd& a);

/// Flip each column so its largest-magnitude entry is nonnegative
/// (first index wins ties).
void canonicalize_signs(MatrixXd& vectors);

/// Leading singular value (0 for an empty matrix).
double sigma_max(const MatrixXd& a);

struct TopSingular {
    MatrixXd left;          // n×r, orthonormal, sign-canonical
    VectorXd values;        // r leading singular values
    Index numerical_rank;   // among the first r
};

/// Top-r left singular vectors. Columns beyond the numerical rank are an
/// orthonormal completion, so `left` is always orthonormal.
TopSingular top_left_singular(const MatrixXd& a, Index r);

}  // namespace lrcs::linalg
