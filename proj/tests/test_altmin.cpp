#include "lrcs/altmin.hpp"
#include "lrcs/errors.hpp"
#include "lrcs/linalg.hpp"
#include "lrcs/metrics.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace lrcs;

TEST(UpdateUFullLs, ExactCoefficientsRecoverSubspace) {
    const auto inst = fixtures::planted(30, 40, 2, 10, 2.0, 0.0, 3);
    const MatrixXd u = update_u_full_ls(inst.truth->b_star(), MeasurementSlice(inst));
    EXPECT_LE(sd2(u, inst.truth->u_star()), 1e-8);
    EXPECT_LE(linalg::orthonormality_error(u), 1e-12);
}

TEST(UpdateUFullLs, RankOneSingleColumnMatchesDenseSolve) {
    ProblemInstance inst;
    inst.m = 8;
    inst.matrices = {fixtures::gaussian(8, 4, 1)};
    inst.observations = {fixtures::gaussian(8, 1, 2).col(0)};
    const double coeff = 1.7;
    const MatrixXd raw = solve_u_least_squares(MatrixXd::Constant(1, 1, coeff), MeasurementSlice(inst));
    const MatrixXd design = coeff * inst.matrices[0];
    const VectorXd oracle = design.colPivHouseholderQr().solve(inst.observations[0]);
    EXPECT_LE((raw.col(0) - oracle).cwiseAbs().maxCoeff(), 1e-10);
    const MatrixXd u = update_u_full_ls(MatrixXd::Constant(1, 1, coeff), MeasurementSlice(inst));
    EXPECT_NEAR(std::abs(u.col(0).dot(oracle.normalized())), 1.0, 1e-12);
}

TEST(UpdateUFullLs, ZeroCoefficientsAreRankDeficient) {
    const auto inst = fixtures::planted(10, 10, 2, 8, 1.0, 0.0, 3);
    try {
        update_u_full_ls(MatrixXd::Zero(2, 10), MeasurementSlice(inst));
        FAIL() << "expected NumericalError";
    } catch (const NumericalError& err) {
        EXPECT_NE(std::string(err.what()).find("nr = 20"), std::string::npos) << err.what();
    }
}

TEST(UpdateUFullLs, FirstOrderOptimality) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto inst = fixtures::planted(15, 20, 2, 6, 1.5, 0.3, 10 + seed);
        const MeasurementSlice slice(inst);
        const MatrixXd b = fixtures::gaussian(2, 20, 50 + seed);
        const MatrixXd u = solve_u_least_squares(b, slice);
        const double best = objective(u, b, slice);
        for (std::uint64_t trial = 0; trial < 5; ++trial) {
            const MatrixXd g = fixtures::gaussian(15, 2, 1000 * seed + trial);
            for (double sign : {1.0, -1.0}) {
                EXPECT_GE(objective(u + sign * 1e-4 * g, b, slice), best * (1.0 - 1e-8));
            }
        }
    }
}

TEST(RunAltMin, ConvergesFasterInIterations) {
    const auto inst = fixtures::planted(100, 100, 2, 40, 1.0, 0.0, 2);
    SolverConfig cfg;
    cfg.r = 2;
    cfg.max_iters = 150;
    const auto alt = run_altmin(inst, cfg);
    const auto gd = run(inst, cfg);
    EXPECT_LE(alt.report.final_error->sd2, 1e-8);
    EXPECT_LE(gd.report.final_error->sd2, 1e-8);
    EXPECT_LT(alt.report.iterations, gd.report.iterations);
    EXPECT_EQ(alt.report.meta.solver, "altmin");
    EXPECT_EQ(alt.report.init_sd2, gd.report.init_sd2);
}

TEST(RunAltMin, SdHistoryNonincreasing) {
    const auto inst = fixtures::planted(50, 60, 2, 20, 1.5, 0.0, 8);
    SolverConfig cfg;
    cfg.r = 2;
    cfg.max_iters = 40;
    const auto res = run_altmin(inst, cfg);
    const auto& h = res.report.history;
    for (std::size_t t = 1; t < h.size(); ++t) {
        EXPECT_LE(*h[t].sd2_to_truth, *h[t - 1].sd2_to_truth * (1.0 + 1e-6) + 1e-13);
    }
}

TEST(RunAltMin, TooFewMeasurementsRejected) {
    const auto inst = fixtures::planted(50, 10, 2, 5, 1.0, 0.0, 1);
    SolverConfig cfg;
    cfg.r = 2;
    EXPECT_THROW(run_altmin(inst, cfg), ConfigError);
}
