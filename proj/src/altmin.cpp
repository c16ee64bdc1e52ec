#include "lrcs/altmin.hpp"

#include "lrcs/errors.hpp"
#include "lrcs/linalg.hpp"
#include "solver_common.hpp"

#include <string>

namespace lrcs {

MatrixXd solve_u_least_squares(const MatrixXd& b, const MeasurementSlice& slice) {
    const Index n = slice.n();
    const Index r = b.rows();
    const Index dim = n * r;
    if (b.cols() != slice.q()) throw ConfigError("update_u_full_ls: B has the wrong column count");

    MatrixXd normal = MatrixXd::Zero(dim, dim);
    VectorXd rhs = VectorXd::Zero(dim);
    MatrixXd gram(n, n);
    for (Index k = 0; k < slice.q(); ++k) {
        const auto a = slice.a(k);
        gram.setZero();
        gram.selfadjointView<Eigen::Lower>().rankUpdate(a.transpose());
        const VectorXd aty = a.transpose() * slice.y(k);
        for (Index l = 0; l < r; ++l) {
            rhs.segment(l * n, n) += b(l, k) * aty;
            for (Index lp = 0; lp <= l; ++lp) {
                normal.block(l * n, lp * n, n, n).triangularView<Eigen::Lower>() +=
                    (b(l, k) * b(lp, k)) * gram;
            }
        }
    }
    // Off-diagonal blocks lie wholly in the lower triangle of the normal
    // matrix; each is symmetric because G_k is, so mirror its lower part.
    for (Index l = 0; l < r; ++l) {
        for (Index lp = 0; lp < l; ++lp) {
            auto block = normal.block(l * n, lp * n, n, n);
            block.triangularView<Eigen::StrictlyUpper>() = block.transpose();
        }
    }

    Eigen::LLT<MatrixXd> llt(normal.selfadjointView<Eigen::Lower>());
    const std::string dims = "nr = " + std::to_string(dim) + " unknowns from mq = " +
                             std::to_string(slice.m() * slice.q()) + " measurements";
    if (llt.info() != Eigen::Success) {
        throw NumericalError("update_u_full_ls: rank-deficient design (" + dims + ")");
    }
    const double rcond = llt.rcond();
    if (!(rcond * kAltMinMaxCondition >= 1.0)) {
        throw NumericalError("update_u_full_ls: design too ill-conditioned (" + dims +
                             ", estimated condition " + std::to_string(1.0 / rcond) + ")");
    }
    const VectorXd vec_u = llt.solve(rhs);
    return Eigen::Map<const MatrixXd>(vec_u.data(), n, r);
}

MatrixXd update_u_full_ls(const MatrixXd& b, const MeasurementSlice& slice) {
    return linalg::thin_q(solve_u_least_squares(b, slice));
}

RunResult run_altmin(const ProblemInstance& instance, const SolverConfig& cfg) {
    cfg.validate();
    const SplitPlan plan(instance, cfg.split_mode, cfg.max_iters);
    if (plan.rows_per_split() * instance.q() < instance.n() * cfg.r) {
        throw ConfigError("altmin: need mq >= nr (mq = " +
                          std::to_string(plan.rows_per_split() * instance.q()) +
                          ", nr = " + std::to_string(instance.n() * cfg.r) + ")");
    }
    detail::DriverOptions opts;
    opts.solver = "altmin";
    auto step = [](const MatrixXd& u, const MatrixXd& b, const MeasurementSlice& u_slice,
                   const detail::DriverContext&) {
        detail::UStepOutcome out;
        const auto start = detail::Clock::now();
        out.u = update_u_full_ls(b, u_slice);
        out.u_ms = detail::ms_since(start);
        out.grad_norm = gradient_u(u, b, u_slice).norm();
        return out;
    };
    return detail::drive(instance, cfg, opts, step);
}

}  // namespace lrcs
