#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <vector>

namespace lrcs {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Planted rank-r matrix X* = U* Σ* V*ᵀ = U* B*.
///
/// Immutable after construction. The factory validates orthonormality of
/// both factors (1e-10, max-abs), a positive nonincreasing spectrum, and
/// r ≤ min(n, q); B* and X* are cached.
class GroundTruth {
public:
    static GroundTruth from_factors(MatrixXd u_star, VectorXd sigma_star, MatrixXd v_star);

    Index n() const noexcept { return u_star_.rows(); }
    Index q() const noexcept { return v_star_.rows(); }
    Index r() const noexcept { return sigma_star_.size(); }

    const MatrixXd& u_star() const noexcept { return u_star_; }
    const VectorXd& sigma_star() const noexcept { return sigma_star_; }
    const MatrixXd& v_star() const noexcept { return v_star_; }
    const MatrixXd& b_star() const noexcept { return b_star_; }
    const MatrixXd& x_star() const noexcept { return x_star_; }

    double sigma_max() const noexcept { return sigma_star_(0); }
    double sigma_min() const noexcept { return sigma_star_(r() - 1); }
    double kappa() const noexcept { return sigma_max() / sigma_min(); }

private:
    GroundTruth() = default;

    MatrixXd u_star_;
    VectorXd sigma_star_;
    MatrixXd v_star_;
    MatrixXd b_star_;
    MatrixXd x_star_;
};

/// Column-wise compressive measurements y_k = A_k x*_k + n_k.
///
/// A_k is stored per column (m×n, column-major) and never concatenated.
struct ProblemInstance {
    std::optional<GroundTruth> truth;
    std::vector<MatrixXd> matrices;
    std::vector<VectorXd> observations;
    double sigma_v = 0.0;
    Index m = 0;
    std::uint64_t seed = 0;

    Index n() const { return matrices.empty() ? 0 : matrices.front().cols(); }
    Index q() const { return static_cast<Index>(matrices.size()); }

    /// Shape checks: q observation vectors of length m, each A_k m×n, and
    /// the truth (when present) agreeing with n and q.
    void validate() const;
};

struct IncoherenceReport {
    double mu = 0.0;
    double kappa = 0.0;
    double max_col_norm = 0.0;
    double mu_bound = std::numeric_limits<double>::infinity();
    bool within_bound = true;
};

/// Orthonormal U*, V* from QR of Gaussian matrices; σ* log-linear from
/// kappa_target down to 1. Pure function of its arguments.
GroundTruth generate_ground_truth(Index n, Index q, Index r, double kappa_target,
                                  std::uint64_t seed);

/// Draw A_k and n_k for every column. Column k uses its own RNG substreams
/// keyed by (seed, k), so the result does not depend on generation order.
/// A_k is filled row by row: the first m' rows for any m' < m coincide
/// with measure(truth, m', ...). Noise is σ_v times a fixed standard
/// normal draw, so instances differing only in σ_v share everything else.
ProblemInstance measure(const GroundTruth& truth, Index m, double sigma_v, std::uint64_t seed);

struct ColumnMeasurement {
    MatrixXd a;
    VectorXd y;
};

/// Column k of measure(); safe to call concurrently for different k.
ColumnMeasurement measure_column(const GroundTruth& truth, Index k, Index m, double sigma_v,
                                 std::uint64_t seed);

/// μ = max_k ‖b*_k‖ · sqrt(q/r) / σ_max*, κ = σ_max*/σ_min*.
IncoherenceReport incoherence(const GroundTruth& truth,
                              double mu_bound = std::numeric_limits<double>::infinity());

/// q σ_v² / σ_min*².
double nsr(const GroundTruth& truth, double sigma_v);

/// Noise level giving the requested NSR for this truth.
double sigma_v_for_nsr(const GroundTruth& truth, double target_nsr);

/// Write `meta.json` and the raw little-endian float64 matrix files into
/// `dir` (created if missing). Layout is documented in README.md.
void save_instance(const ProblemInstance& instance, const std::filesystem::path& dir);

/// Inverse of save_instance. Truth is restored when Ustar.bin/Bstar.bin are present.
ProblemInstance load_instance(const std::filesystem::path& dir);

}  // namespace lrcs
