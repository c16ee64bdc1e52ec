#include "lrcs/gdmin.hpp"

#include "lrcs/errors.hpp"
#include "lrcs/linalg.hpp"
#include "solver_common.hpp"

#include <cmath>
#include <string>

namespace lrcs {

std::string_view to_string(SplitMode mode) {
    return mode == SplitMode::kNoSplit ? "no-split" : "paper-split";
}

std::string_view to_string(EtaMode mode) {
    switch (mode) {
        case EtaMode::kFromB: return "from-b";
        case EtaMode::kFromInit: return "from-init";
        case EtaMode::kOracle: return "oracle";
    }
    return "from-b";
}

SplitMode parse_split_mode(std::string_view text) {
    if (text == "no-split") return SplitMode::kNoSplit;
    if (text == "paper-split") return SplitMode::kPaperSplit;
    throw ConfigError("unknown split mode '" + std::string(text) + "'");
}

EtaMode parse_eta_mode(std::string_view text) {
    if (text == "from-b") return EtaMode::kFromB;
    if (text == "from-init") return EtaMode::kFromInit;
    if (text == "oracle") return EtaMode::kOracle;
    throw ConfigError("unknown eta mode '" + std::string(text) + "'");
}

void SolverConfig::validate() const {
    if (r < 1) throw ConfigError("solver: r must be at least 1");
    if (max_iters < 1) throw ConfigError("solver: max_iters must be at least 1");
    if (!(tol > 0.0)) throw ConfigError("solver: tol must be positive");
    if (!(eta_scale > 0.0) || !std::isfinite(eta_scale)) {
        throw ConfigError("solver: eta_scale must be positive");
    }
    if (theory_mode && eta_scale > 0.5) {
        throw ConfigError("solver: theory mode requires eta_scale <= 0.5");
    }
    if (!(init_sigma_scale > 0.0)) throw ConfigError("solver: init_sigma_scale must be positive");
    if (guard_window < 1) throw ConfigError("solver: guard_window must be at least 1");
    if (init) init->validate();
}

SplitPlan::SplitPlan(const ProblemInstance& instance, SplitMode mode, Index max_iters)
    : instance_(&instance), mode_(mode), max_iters_(max_iters), rows_(instance.m) {
    if (mode == SplitMode::kPaperSplit) {
        const Index parts = 2 * max_iters + 1;
        if (instance.m % parts != 0) {
            throw ConfigError("paper-split: m = " + std::to_string(instance.m) +
                              " is not divisible into 2T+1 = " + std::to_string(parts) + " sets");
        }
        rows_ = instance.m / parts;
    }
}

MeasurementSlice SplitPlan::slice(Index tau) const {
    if (mode_ == SplitMode::kNoSplit) return MeasurementSlice(*instance_);
    return MeasurementSlice(*instance_, tau * rows_, rows_);
}

MatrixXd update_b(const MatrixXd& u, const MeasurementSlice& slice, double* objective) {
    const Index r = u.cols();
    if (u.rows() != slice.n()) throw ConfigError("update_b: U has the wrong row count");
    MatrixXd b(r, slice.q());
    double total = 0.0;
    MatrixXd design(slice.m(), r);
    for (Index k = 0; k < slice.q(); ++k) {
        design.noalias() = slice.a(k) * u;
        Eigen::ColPivHouseholderQR<MatrixXd> qr(design);
        qr.setThreshold(1e-12);
        if (qr.rank() < r) {
            throw RankDeficientError("update_b: A_k U is rank deficient at column k = " +
                                         std::to_string(k) + " (rank " + std::to_string(qr.rank()) +
                                         " < " + std::to_string(r) + ")",
                                     k);
        }
        const VectorXd y = slice.y(k);
        b.col(k) = qr.solve(y);
        if (objective) total += (y - design * b.col(k)).squaredNorm();
    }
    if (objective) *objective = total;
    return b;
}

MatrixXd gradient_u(const MatrixXd& u, const MatrixXd& b, const MeasurementSlice& slice) {
    if (u.rows() != slice.n() || b.cols() != slice.q() || u.cols() != b.rows()) {
        throw ConfigError("gradient_u: shape mismatch");
    }
    MatrixXd grad = MatrixXd::Zero(u.rows(), u.cols());
    VectorXd residual(slice.m());
    VectorXd back(slice.n());
    for (Index k = 0; k < slice.q(); ++k) {
        residual.noalias() = slice.a(k) * (u * b.col(k));
        residual -= slice.y(k);
        back.noalias() = slice.a(k).transpose() * residual;
        grad.noalias() += back * b.col(k).transpose();
    }
    return grad;
}

double objective(const MatrixXd& u, const MatrixXd& b, const MeasurementSlice& slice) {
    double total = 0.0;
    for (Index k = 0; k < slice.q(); ++k) {
        total += (slice.y(k) - slice.a(k) * (u * b.col(k))).squaredNorm();
    }
    return total;
}

SolverState gd_step(const SolverState& state, const MatrixXd& grad, double eta, Index m) {
    if (!(eta >= 0.0) || !std::isfinite(eta)) throw ConfigError("gd_step: eta must be finite and >= 0");
    if (m < 1) throw ConfigError("gd_step: m must be at least 1");
    if (grad.rows() != state.u.rows() || grad.cols() != state.u.cols()) {
        throw ConfigError("gd_step: gradient shape mismatch");
    }
    SolverState next = state;
    if (eta == 0.0 || grad.isZero(0.0)) return next;
    next.u = linalg::thin_q(state.u - (eta / static_cast<double>(m)) * grad);
    return next;
}

RunResult run(const ProblemInstance& instance, const SolverConfig& cfg) {
    if (cfg.eta_mode == EtaMode::kOracle && !instance.truth) {
        throw ConfigError("eta mode 'oracle' needs the planted truth");
    }
    double fixed_sigma = 0.0;
    detail::DriverOptions opts;
    opts.solver = "altgdmin";
    opts.use_guard = true;
    opts.on_init = [&](const InitResult& init) {
        if (cfg.eta_mode == EtaMode::kOracle) {
            fixed_sigma = instance.truth->sigma_max();
        } else if (cfg.eta_mode == EtaMode::kFromInit) {
            fixed_sigma = init.singular_values(0) * cfg.init_sigma_scale;
        }
    };

    auto step = [&](const MatrixXd& u, const MatrixXd& b, const MeasurementSlice& grad_slice,
                    const detail::DriverContext& ctx) {
        const auto start = detail::Clock::now();
        detail::UStepOutcome out;
        const MatrixXd grad = gradient_u(u, b, grad_slice);
        const double sigma = cfg.eta_mode == EtaMode::kFromB ? linalg::sigma_max(b) : fixed_sigma;
        if (!(sigma > 0.0)) {
            throw NumericalError("step size undefined: sigma_max estimate is zero", b);
        }
        out.eta = ctx.eta_multiplier * cfg.eta_scale / (sigma * sigma);
        SolverState current;
        current.u = u;
        out.u = gd_step(current, grad, out.eta, grad_slice.m()).u;
        out.u_ms = detail::ms_since(start);
        out.grad_norm = grad.norm();
        return out;
    };

    return detail::drive(instance, cfg, opts, step);
}

}  // namespace lrcs
