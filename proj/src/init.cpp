#include "lrcs/init.hpp"

#include "lrcs/errors.hpp"
#include "lrcs/linalg.hpp"
#include "lrcs/rng.hpp"

#include <cmath>
#include <numbers>

namespace lrcs {

InitConfig InitConfig::from_constants(double kappa, double mu) {
    InitConfig cfg;
    cfg.kappa = kappa;
    cfg.mu = mu;
    cfg.c_tilde = 9.0 * kappa * kappa * mu * mu;
    cfg.validate();
    return cfg;
}

InitConfig InitConfig::measured(const GroundTruth& truth) {
    const auto rep = incoherence(truth);
    return from_constants(rep.kappa, rep.mu);
}

InitConfig InitConfig::untruncated() {
    InitConfig cfg;
    cfg.c_tilde = std::numeric_limits<double>::infinity();
    return cfg;
}

void InitConfig::validate() const {
    if (!(c_tilde > 0.0)) throw ConfigError("init: c_tilde must be positive");
}

double compute_alpha(const MeasurementSlice& slice, const InitConfig& cfg) {
    cfg.validate();
    if (std::isinf(cfg.c_tilde)) return std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (Index k = 0; k < slice.q(); ++k) sum += slice.y(k).squaredNorm();
    return cfg.c_tilde * sum / (static_cast<double>(slice.m()) * static_cast<double>(slice.q()));
}

VectorXd truncate(const VectorXd& y, double alpha) {
    if (!(alpha >= 0.0)) throw ConfigError("truncate: alpha must be nonnegative");
    const double bound = std::sqrt(alpha);
    return y.unaryExpr([bound](double v) { return std::abs(v) <= bound ? v : 0.0; });
}

AssembledX0 assemble_x0(const MeasurementSlice& slice, double alpha) {
    if (!(alpha >= 0.0)) throw ConfigError("assemble_x0: alpha must be nonnegative");
    const double bound = std::sqrt(alpha);
    const double inv_m = 1.0 / static_cast<double>(slice.m());
    AssembledX0 out;
    out.x0.resize(slice.n(), slice.q());
    for (Index k = 0; k < slice.q(); ++k) {
        VectorXd kept(slice.m());
        const auto y = slice.y(k);
        for (Index i = 0; i < slice.m(); ++i) {
            const bool keep = std::abs(y(i)) <= bound;
            kept(i) = keep ? y(i) : 0.0;
            if (!keep) ++out.truncated;
        }
        out.x0.col(k).noalias() = inv_m * (slice.a(k).transpose() * kept);
    }
    return out;
}

InitResult spectral_init(const MeasurementSlice& slice, Index r, const InitConfig& cfg,
                         bool keep_x0) {
    if (r < 1 || r > std::min(slice.n(), slice.q())) {
        throw ConfigError("spectral_init: need 1 <= r <= min(n, q)");
    }
    InitResult res;
    res.alpha = compute_alpha(slice, cfg);
    auto assembled = assemble_x0(slice, res.alpha);
    res.truncation_fraction = static_cast<double>(assembled.truncated) /
                              (static_cast<double>(slice.m()) * static_cast<double>(slice.q()));

    auto top = linalg::top_left_singular(assembled.x0, r);
    res.u0 = std::move(top.left);
    res.singular_values = std::move(top.values);
    res.degenerate = top.numerical_rank < r;
    if (keep_x0) res.x0 = std::move(assembled.x0);
    return res;
}

double truncated_second_moment(double gamma) {
    if (!(gamma >= 0.0)) throw ConfigError("truncated_second_moment: gamma must be nonnegative");
    if (std::isinf(gamma)) return 1.0;
    const double tail = gamma * std::sqrt(2.0 / std::numbers::pi) * std::exp(-0.5 * gamma * gamma);
    return std::max(0.0, std::erf(gamma / std::numbers::sqrt2) - tail);
}

MatrixXd expected_x0(const GroundTruth& truth, double sigma_v, double alpha) {
    if (!(alpha >= 0.0)) throw ConfigError("expected_x0: alpha must be nonnegative");
    MatrixXd out = truth.x_star();
    const double root_alpha = std::sqrt(alpha);
    for (Index k = 0; k < out.cols(); ++k) {
        const double spread = std::sqrt(truth.x_star().col(k).squaredNorm() + sigma_v * sigma_v);
        double w = 0.0;
        if (std::isinf(alpha)) {
            w = 1.0;
        } else if (spread > 0.0) {
            w = truncated_second_moment(root_alpha / spread);
        }
        out.col(k) *= w;
    }
    return out;
}

double population_alpha(const GroundTruth& truth, double sigma_v, double c_tilde) {
    return c_tilde * (truth.x_star().squaredNorm() / static_cast<double>(truth.q()) +
                      sigma_v * sigma_v);
}

InitExpectationCheck verify_init_expectation(const GroundTruth& truth, Index m, double sigma_v,
                                             double alpha, Index repetitions, std::uint64_t seed) {
    if (repetitions < 1) throw ConfigError("verify_init_expectation: repetitions must be >= 1");
    MatrixXd sum = MatrixXd::Zero(truth.n(), truth.q());
    double truncated = 0.0;
    for (Index rep = 0; rep < repetitions; ++rep) {
        const auto draw_seed = derive_seed(
            seed, {static_cast<std::uint64_t>(StreamTag::kMonteCarlo), static_cast<std::uint64_t>(rep)});
        const auto inst = measure(truth, m, sigma_v, draw_seed);
        const auto assembled = assemble_x0(MeasurementSlice(inst), alpha);
        sum += assembled.x0;
        truncated += static_cast<double>(assembled.truncated);
    }
    const MatrixXd mean = sum / static_cast<double>(repetitions);
    const MatrixXd expected = expected_x0(truth, sigma_v, alpha);

    InitExpectationCheck check;
    check.alpha = alpha;
    check.repetitions = repetitions;
    check.rel_frob_deviation = (mean - expected).norm() / expected.norm();
    for (Index k = 0; k < expected.cols(); ++k) {
        const double denom = expected.col(k).norm();
        if (denom > 0.0) {
            check.max_col_rel_deviation =
                std::max(check.max_col_rel_deviation, (mean.col(k) - expected.col(k)).norm() / denom);
        }
    }
    double min_w = 1.0;
    for (Index k = 0; k < truth.q(); ++k) {
        const double spread = std::sqrt(truth.x_star().col(k).squaredNorm() + sigma_v * sigma_v);
        if (spread > 0.0 && !std::isinf(alpha)) {
            min_w = std::min(min_w, truncated_second_moment(std::sqrt(alpha) / spread));
        }
    }
    check.min_weight = min_w;
    check.mean_truncation_fraction =
        truncated / (static_cast<double>(repetitions) * static_cast<double>(m * truth.q()));
    return check;
}

}  // namespace lrcs
