#include "lrcs/linalg.hpp"

#include "lrcs/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace lrcs::linalg {

double orthonormality_error(const MatrixXd& u) {
    if (u.cols() == 0) return 0.0;
    const MatrixXd gram = u.transpose() * u;
    return (gram - MatrixXd::Identity(u.cols(), u.cols())).cwiseAbs().maxCoeff();
}

MatrixXd thin_q(const MatrixXd& a) {
    const Index n = a.rows();
    const Index r = a.cols();
    if (r > n) {
        throw NumericalError("thin_q: more columns than rows (" + std::to_string(r) + " > " +
                             std::to_string(n) + ")");
    }
    Eigen::HouseholderQR<MatrixXd> qr(a);
    MatrixXd q = qr.householderQ() * MatrixXd::Identity(n, r);
    const auto& packed = qr.matrixQR();
    const double scale = std::max(a.norm(), std::numeric_limits<double>::min());
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * scale;
    for (Index j = 0; j < r; ++j) {
        const double diag = packed(j, j);
        if (!(std::abs(diag) > floor)) {
            throw NumericalError("thin_q: rank-deficient input, |R(" + std::to_string(j) + "," +
                                     std::to_string(j) + ")| = " + std::to_string(std::abs(diag)),
                                 a);
        }
        if (diag < 0.0) q.col(j) *= -1.0;
    }
    return q;
}

void canonicalize_signs(MatrixXd& vectors) {
    for (Index j = 0; j < vectors.cols(); ++j) {
        Index arg = 0;
        double best = -1.0;
        for (Index i = 0; i < vectors.rows(); ++i) {
            const double mag = std::abs(vectors(i, j));
            if (mag > best) {
                best = mag;
                arg = i;
            }
        }
        if (vectors.rows() > 0 && vectors(arg, j) < 0.0) vectors.col(j) *= -1.0;
    }
}

double sigma_max(const MatrixXd& a) {
    if (a.size() == 0) return 0.0;
    Eigen::JacobiSVD<MatrixXd> svd(a);
    return svd.singularValues()(0);
}

TopSingular top_left_singular(const MatrixXd& a, Index r) {
    const Index n = a.rows();
    if (r > n) throw ConfigError("top_left_singular: r exceeds row count");

    Eigen::BDCSVD<MatrixXd> svd(a, Eigen::ComputeThinU);
    if (svd.info() != Eigen::Success) {
        throw NumericalError("top_left_singular: SVD did not converge", a);
    }
    const VectorXd& s = svd.singularValues();
    const Index available = std::min<Index>(r, s.size());
    const double tol = std::max<double>(n, a.cols()) * std::numeric_limits<double>::epsilon() *
                       (s.size() > 0 ? s(0) : 0.0);

    TopSingular out;
    out.values = VectorXd::Zero(r);
    out.values.head(available) = s.head(available);
    out.numerical_rank = 0;
    for (Index j = 0; j < available; ++j) {
        if (s(j) > tol && s(j) > 0.0) ++out.numerical_rank;
    }

    // Keep the well-determined vectors; complete the rest from canonical
    // directions by Gram-Schmidt against what is already kept.
    MatrixXd basis(n, r);
    const Index keep = out.numerical_rank;
    basis.leftCols(keep) = svd.matrixU().leftCols(keep);
    Index filled = keep;
    for (Index e = 0; e < n && filled < r; ++e) {
        VectorXd v = VectorXd::Unit(n, e);
        for (int pass = 0; pass < 2; ++pass) {
            v -= basis.leftCols(filled) * (basis.leftCols(filled).transpose() * v);
        }
        const double norm = v.norm();
        if (norm > 1e-8) basis.col(filled++) = v / norm;
    }
    canonicalize_signs(basis);
    out.left = std::move(basis);
    return out;
}

}  // namespace lrcs::linalg
