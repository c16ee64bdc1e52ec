#include "lrcs/metrics.hpp"

#include "lrcs/linalg.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace lrcs {

double sd2(const Eigen::MatrixXd& u1, const Eigen::MatrixXd& u2) {
    if (u1.rows() != u2.rows()) throw std::invalid_argument("sd2: row counts differ");
    if (linalg::orthonormality_error(u1) > kSd2OrthoTol ||
        linalg::orthonormality_error(u2) > kSd2OrthoTol) {
        throw std::invalid_argument("sd2: inputs must have orthonormal columns");
    }
    if (u2.cols() == 0) return 0.0;
    const Eigen::MatrixXd residual = u2 - u1 * (u1.transpose() * u2);
    const double s = linalg::sigma_max(residual);
    return std::min(s, 1.0);
}

ErrorSummary frob_error(const Eigen::MatrixXd& x_hat, const Eigen::MatrixXd& x_star) {
    if (x_hat.rows() != x_star.rows() || x_hat.cols() != x_star.cols()) {
        throw std::invalid_argument("frob_error: shape mismatch");
    }
    ErrorSummary out;
    out.frob_abs = (x_hat - x_star).norm();
    const double spectral = linalg::sigma_max(x_star);
    if (spectral > 0.0) {
        out.frob_rel = out.frob_abs / spectral;
    } else {
        out.frob_rel = out.frob_abs == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    return out;
}

}  // namespace lrcs
