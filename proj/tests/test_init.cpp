#include "lrcs/errors.hpp"
#include "lrcs/init.hpp"
#include "lrcs/linalg.hpp"
#include "lrcs/metrics.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

using namespace lrcs;

namespace {

ProblemInstance hand_instance(std::vector<MatrixXd> a, std::vector<VectorXd> y) {
    ProblemInstance inst;
    inst.m = y.front().size();
    inst.matrices = std::move(a);
    inst.observations = std::move(y);
    return inst;
}

ProblemInstance permute_columns(const ProblemInstance& inst, const std::vector<Index>& perm) {
    ProblemInstance out = inst;
    out.truth.reset();
    for (std::size_t k = 0; k < perm.size(); ++k) {
        out.matrices[k] = inst.matrices[perm[k]];
        out.observations[k] = inst.observations[perm[k]];
    }
    return out;
}

}  // namespace

TEST(ComputeAlpha, ZeroObservations) {
    const auto inst = hand_instance({MatrixXd::Ones(3, 2), MatrixXd::Ones(3, 2)}, {VectorXd::Zero(3), VectorXd::Zero(3)});
    EXPECT_EQ(compute_alpha(MeasurementSlice(inst), InitConfig::from_constants(2.0, 1.5)), 0.0);
}

TEST(ComputeAlpha, SingleMeasurement) {
    const auto inst = hand_instance({MatrixXd::Ones(1, 1)}, {VectorXd::Constant(1, 2.0)});
    const auto cfg = InitConfig::from_constants(1.0, 1.0);
    EXPECT_DOUBLE_EQ(cfg.c_tilde, 9.0);
    EXPECT_DOUBLE_EQ(compute_alpha(MeasurementSlice(inst), cfg), 36.0);
}

TEST(ComputeAlpha, HomogeneousOfDegreeTwo) {
    auto inst = fixtures::planted(10, 6, 2, 8, 2.0, 0.1, 3);
    const auto cfg = InitConfig::measured(*inst.truth);
    const double base = compute_alpha(MeasurementSlice(inst), cfg);
    const auto big = fixtures::scaled(inst, 10.0);
    EXPECT_NEAR(compute_alpha(MeasurementSlice(big), cfg) / base, 100.0, 1e-12);
}

TEST(Truncate, KeepsBoundaryAndZerosLargeEntries) {
    const VectorXd y = (VectorXd(3) << 1.0, -3.0, 2.0).finished();
    const VectorXd out = truncate(y, 4.0);
    EXPECT_EQ(out, (VectorXd(3) << 1.0, 0.0, 2.0).finished());
    EXPECT_EQ(truncate(out, 4.0), out);
    EXPECT_EQ(truncate(y, 0.0), VectorXd::Zero(3));
    EXPECT_EQ(truncate(y, std::numeric_limits<double>::infinity()), y);
    EXPECT_THROW(truncate(y, -1.0), ConfigError);
}

TEST(TruncatedSecondMoment, Endpoints) {
    EXPECT_EQ(truncated_second_moment(0.0), 0.0);
    EXPECT_NEAR(truncated_second_moment(40.0), 1.0, 1e-12);
    EXPECT_EQ(truncated_second_moment(std::numeric_limits<double>::infinity()), 1.0);
    EXPECT_THROW(truncated_second_moment(-0.1), ConfigError);
}

TEST(TruncatedSecondMoment, FrozenHighPrecisionValues) {
    EXPECT_NEAR(truncated_second_moment(0.5), fixtures::kTruncatedMomentAt0_5, 1e-14);
    EXPECT_NEAR(truncated_second_moment(1.0), fixtures::kTruncatedMomentAt1, 1e-14);
    EXPECT_NEAR(truncated_second_moment(2.0), fixtures::kTruncatedMomentAt2, 1e-14);
    EXPECT_NEAR(truncated_second_moment(3.0), fixtures::kTruncatedMomentAt3, 1e-14);
    EXPECT_GE(truncated_second_moment(3.0), 0.92);
}

TEST(TruncatedSecondMoment, MatchesAdaptiveQuadrature) {
    for (double g = 0.0; g <= 8.0; g += 0.25) {
        EXPECT_NEAR(truncated_second_moment(g), fixtures::truncated_moment_quadrature(g), 1e-10) << g;
    }
}

TEST(TruncatedSecondMoment, MonotoneNondecreasing) {
    double prev = 0.0;
    for (double g = 0.0; g <= 12.0; g += 0.01) {
        const double w = truncated_second_moment(g);
        EXPECT_GE(w, prev);
        EXPECT_LE(w, 1.0);
        prev = w;
    }
}

TEST(ExpectedX0, LimitsOfAlpha) {
    const auto gt = generate_ground_truth(8, 5, 2, 2.0, 4);
    EXPECT_EQ(expected_x0(gt, 0.3, std::numeric_limits<double>::infinity()), gt.x_star());
    EXPECT_EQ(expected_x0(gt, 0.3, 0.0), MatrixXd::Zero(8, 5));
}

TEST(ExpectedX0, SingleUnitColumnAtAlphaNine) {
    const auto gt = GroundTruth::from_factors(fixtures::random_orthonormal(4, 1, 1), VectorXd::Ones(1),
                                              MatrixXd::Ones(1, 1));
    ASSERT_NEAR(gt.x_star().norm(), 1.0, 1e-15);
    const MatrixXd e = expected_x0(gt, 0.0, 9.0);
    EXPECT_LE((e - gt.x_star() * fixtures::truncated_moment_quadrature(3.0)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(SpectralInit, ManySamplesRecoverSubspace) {
    const auto inst = fixtures::planted(10, 10, 2, 2000, 1.0, 0.0, 12);
    const auto res = spectral_init(inst, 2, InitConfig::measured(*inst.truth));
    EXPECT_LE(sd2(res.u0, inst.truth->u_star()), 0.1);
    EXPECT_LE(linalg::orthonormality_error(res.u0), 1e-10);
    EXPECT_FALSE(res.degenerate);
    ASSERT_TRUE(res.x0.has_value());
    EXPECT_EQ(res.x0->rows(), 10);
}

TEST(SpectralInit, ZeroObservationsAreDegenerate) {
    auto inst = fixtures::planted(6, 4, 2, 5, 1.0, 0.0, 1);
    for (auto& y : inst.observations) y.setZero();
    const auto res = spectral_init(inst, 2, InitConfig::from_constants(1.0, 1.0));
    EXPECT_TRUE(res.degenerate);
    EXPECT_EQ(*res.x0, MatrixXd::Zero(6, 4));
    EXPECT_EQ(res.alpha, 0.0);
    EXPECT_LE(linalg::orthonormality_error(res.u0), 1e-12);
    EXPECT_EQ(res.u0.cols(), 2);
}

TEST(SpectralInit, RejectsBadRank) {
    const auto inst = fixtures::planted(6, 4, 2, 5, 1.0, 0.0, 1);
    EXPECT_THROW(spectral_init(inst, 5, InitConfig{}), ConfigError);
    EXPECT_THROW(spectral_init(inst, 0, InitConfig{}), ConfigError);
}

TEST(SpectralInit, TruncationFractionSmallWithDefaultConstant) {
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto inst = fixtures::planted(20, 10, 2, 50, 2.0, 0.2, 500 + seed);
        const auto res = spectral_init(inst, 2, InitConfig::measured(*inst.truth), false);
        worst = std::max(worst, res.truncation_fraction);
        const auto untruncated = spectral_init(inst, 2, InitConfig::untruncated(), false);
        EXPECT_EQ(untruncated.truncation_fraction, 0.0);
    }
    EXPECT_LE(worst, 0.05);
}

TEST(SpectralInit, ColumnPermutationInvariant) {
    const auto inst = fixtures::planted(30, 12, 3, 25, 2.0, 0.1, 8);
    std::vector<Index> perm(12);
    std::iota(perm.begin(), perm.end(), 0);
    std::reverse(perm.begin(), perm.end());
    std::swap(perm[2], perm[7]);
    const auto cfg = InitConfig::from_constants(2.0, 1.5);
    const auto a = spectral_init(inst, 3, cfg);
    const auto b = spectral_init(permute_columns(inst, perm), 3, cfg);
    EXPECT_LE(sd2(a.u0, b.u0), 1e-8);
}

TEST(SpectralInit, TruncationFractionNonincreasingInAlpha) {
    const auto inst = fixtures::planted(15, 8, 2, 40, 1.5, 0.3, 5);
    double prev = 1.0;
    for (double alpha = 0.0; alpha <= 20.0; alpha += 0.25) {
        const auto assembled = assemble_x0(MeasurementSlice(inst), alpha);
        const double frac = static_cast<double>(assembled.truncated) / (40.0 * 8.0);
        EXPECT_LE(frac, prev);
        prev = frac;
    }
}

TEST(InitExpectation, DefaultThresholdMonteCarloMean) {
    const auto gt = generate_ground_truth(20, 10, 2, 1.0, 77);
    const double sigma_v = 0.5;
    const double alpha = population_alpha(gt, sigma_v, InitConfig::measured(gt).c_tilde);
    const auto coarse = verify_init_expectation(gt, 50, sigma_v, alpha, 2000, 9);
    const auto fine = verify_init_expectation(gt, 50, sigma_v, alpha, 8000, 9);
    EXPECT_LE(coarse.rel_frob_deviation, 0.05);
    EXPECT_LE(fine.rel_frob_deviation, 0.025);
    // Quadrupling N should roughly halve the error.
    EXPECT_LT(fine.rel_frob_deviation, 0.8 * coarse.rel_frob_deviation);
    EXPECT_GT(fine.rel_frob_deviation, 0.2 * coarse.rel_frob_deviation);
}

TEST(InitExpectation, AggressiveTruncationResolvesAttenuation) {
    // c_tilde = 1 puts D(α) far from the identity; the empirical mean must
    // track X* D(α), not X*.
    const auto gt = generate_ground_truth(20, 10, 2, 1.0, 77);
    const double sigma_v = 0.5;
    const double alpha = population_alpha(gt, sigma_v, 1.0);
    const auto check = verify_init_expectation(gt, 50, sigma_v, alpha, 8000, 9);
    EXPECT_LT(check.min_weight, 0.5);
    EXPECT_GT(check.mean_truncation_fraction, 0.2);
    EXPECT_LE(check.rel_frob_deviation, 0.05);

    const MatrixXd attenuated = expected_x0(gt, sigma_v, alpha);
    const double gap = (attenuated - gt.x_star()).norm() / attenuated.norm();
    EXPECT_GT(gap, 10.0 * check.rel_frob_deviation);
}

TEST(TruncatedSecondMoment, AgreesWithMonteCarlo) {
    std::uint64_t seed = 2024;
    for (double g : {0.5, 1.0, 2.0, 3.0}) {
        const auto est = fixtures::truncated_moment_monte_carlo(g, 1000000, seed++);
        EXPECT_LE(std::abs(est.mean - truncated_second_moment(g)), 3.0 * est.std_error) << g;
    }
}
