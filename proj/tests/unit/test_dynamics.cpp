#include <gtest/gtest.h>

#include <cmath>

#include "womops/dynamics.hpp"
#include "womops/errors.hpp"

using namespace womops;

namespace {

FeedbackSystem table_system(double c2, double tau = 2) {
    FeedbackSystem sys;
    sys.params.tau = tau;
    sys.response.c2 = c2;
    sys.fee = 10;
    return sys;
}

}  // namespace

TEST(Step, TableSevenFirstTransition) {
    const StepResult st = step(table_system(1), 450);
    EXPECT_NEAR(st.solution.policy.t3, 1.4907, 1e-4);
    EXPECT_NEAR(st.next_lambda_p, 335.41, 0.005);
}

TEST(Step, TableEightFirstTransition) {
    EXPECT_NEAR(step(table_system(3), 450).next_lambda_p, 186.34, 0.005);
}

TEST(Step, RejectsDemandOutsidePotential) {
    EXPECT_THROW(step(table_system(1), 451), InvalidParams);
    EXPECT_THROW(step(table_system(1), -1), InvalidParams);
}

TEST(Step, SmallMarketIsAbsorbing) {
    FeedbackSystem sys = table_system(1, 1);  // threshold 1000 > 450
    for (double seed : {0.0, 100.0, 450.0}) EXPECT_NEAR(step(sys, seed).next_lambda_p, 450, 1e-9);
}

TEST(Simulate, TableSevenTrace) {
    const double expected[] = {450.00, 335.41, 388.50, 360.98, 374.49, 367.67,
                               371.07, 369.37, 370.22, 369.79, 370.00};
    const DynamicsTrace tr = simulate(table_system(1), 450, {10, 1e-4, false});
    ASSERT_EQ(tr.iterations.size(), 11u);
    for (int k = 0; k <= 10; ++k) {
        EXPECT_NEAR(tr.iterations[k].lambda_p, expected[k], 0.02) << k;
        EXPECT_EQ(tr.iterations[k].k, k);
    }
}

TEST(Simulate, TableSevenConvergesAtCoarseTolerance) {
    const DynamicsTrace tr = simulate(table_system(1), 450, {100, 0.01, true});
    EXPECT_EQ(tr.classification.kind, LongRunKind::ConvergedInterior);
    EXPECT_NEAR(tr.classification.limit, 370.00, 0.1);
    ASSERT_TRUE(tr.prediction);
    EXPECT_NEAR(tr.prediction->limit, 450 * std::cbrt(250.0 / 450.0), 1e-9);
}

TEST(Simulate, TableEightCycles) {
    const DynamicsTrace tr = simulate(table_system(3), 450);
    EXPECT_EQ(tr.classification.kind, LongRunKind::Cycle2);
    EXPECT_NEAR(tr.classification.cycle_high, 450.0, 1e-9);
    EXPECT_NEAR(tr.classification.cycle_low, 186.34, 0.005);
    EXPECT_EQ(tr.settled_at, 0);
}

TEST(Simulate, SmallMarketConvergesToPotentialInOneStep) {
    const DynamicsTrace tr = simulate(table_system(1, 1), 200);
    EXPECT_EQ(tr.classification.kind, LongRunKind::ConvergedToPotential);
    EXPECT_NEAR(tr.iterations[1].lambda_p, 450, 1e-9);
    EXPECT_EQ(tr.settled_at, 1);
}

TEST(Simulate, InsensitiveCustomersConvergeImmediately) {
    const DynamicsTrace tr = simulate(table_system(0), 123);
    EXPECT_EQ(tr.classification.kind, LongRunKind::ConvergedToPotential);
    EXPECT_EQ(tr.iterations.size(), 3u);
    EXPECT_DOUBLE_EQ(tr.iterations[1].lambda_p, 450);
}

TEST(Simulate, SeedAtFixedPointStaysPut) {
    const double fixed = 450 * std::cbrt(250.0 / 450.0);
    const DynamicsTrace tr = simulate(table_system(1), fixed, {5, 1e-4, false});
    for (const auto& row : tr.iterations) EXPECT_NEAR(row.lambda_p, fixed, 1e-9);
}

TEST(Simulate, ZeroIterationsIsSeedOnly) {
    const DynamicsTrace tr = simulate(table_system(1), 450, {0, 1e-4, true});
    ASSERT_EQ(tr.iterations.size(), 1u);
    EXPECT_EQ(tr.classification.kind, LongRunKind::Undetermined);
    EXPECT_EQ(tr.settled_at, -1);
}

TEST(Simulate, ProfitIncludesFeeRevenue) {
    const FeedbackSystem sys = table_system(1);
    const DynamicsTrace tr = simulate(sys, 450, {1, 1e-4, false});
    const auto& row = tr.iterations[0];
    EXPECT_NEAR(row.profit, profit_m2(sys.params, sys.fee_model, row.policy, sys.fee, 450), 1e-12);
}

TEST(Simulate, IteratesStayInsidePotential) {
    for (double c2 : {0.5, 1.0, 2.5}) {
        const DynamicsTrace tr = simulate(table_system(c2, 3), 450, {40, 1e-6, false});
        for (const auto& row : tr.iterations) {
            EXPECT_GE(row.lambda_p, 0.0);
            EXPECT_LE(row.lambda_p, 450 + 1e-9);
        }
    }
}

TEST(Simulate, ErrorShrinksOnceAboveThreshold) {
    const FeedbackSystem sys = table_system(1);
    const double limit = theorem1_predict(sys).limit;
    const DynamicsTrace tr = simulate(sys, 450, {30, 1e-9, false});
    for (std::size_t k = 1; k < tr.iterations.size(); ++k) {
        if (tr.iterations[k - 1].lambda_p <= sys.params.binding_threshold()) continue;
        EXPECT_LE(std::abs(tr.iterations[k].lambda_p - limit),
                  std::abs(tr.iterations[k - 1].lambda_p - limit) + 1e-9);
    }
}

TEST(Prediction, Regimes) {
    EXPECT_EQ(theorem1_predict(table_system(1, 1)).kind, LongRunKind::ConvergedToPotential);
    const LongRunClass cyc = theorem1_predict(table_system(3));
    EXPECT_EQ(cyc.kind, LongRunKind::Cycle2);
    EXPECT_NEAR(cyc.cycle_low, 450 * std::pow(250.0 / 450.0, 1.5), 1e-9);
    EXPECT_NEAR(cyc.cycle_low, 186.34, 0.005);
    const LongRunClass conv = theorem1_predict(table_system(1));
    EXPECT_EQ(conv.kind, LongRunKind::ConvergedInterior);
    EXPECT_NEAR(conv.limit, 369.93, 0.005);
    EXPECT_EQ(theorem1_predict(table_system(0)).kind, LongRunKind::ConvergedToPotential);
}

TEST(Prediction, ThresholdBoundaryConvergesToPotential) {
    FeedbackSystem sys = table_system(1);
    sys.params.K = 450 * sys.params.h * 4 / 2;  // 2K/(h tau^2) = 450
    EXPECT_EQ(theorem1_predict(sys).kind, LongRunKind::ConvergedToPotential);
}

TEST(Prediction, AgreesWithSimulationAcrossGrid) {
    for (double tau : {1.0, 2.0, 3.0, 5.0}) {
        for (double c2 : {0.2, 1.0, 1.8, 2.0, 3.0}) {
            const FeedbackSystem sys = table_system(c2, tau);
            const LongRunClass pred = theorem1_predict(sys);
            const DynamicsTrace tr = simulate(sys, sys.potential(), {5000, 1e-7, true});
            ASSERT_EQ(tr.classification.kind, pred.kind) << tau << " " << c2;
            if (pred.kind == LongRunKind::Cycle2) {
                EXPECT_NEAR(tr.classification.cycle_low, pred.cycle_low, 1e-5);
                EXPECT_NEAR(tr.classification.cycle_high, pred.cycle_high, 1e-5);
            } else {
                EXPECT_NEAR(tr.classification.limit, pred.limit, 1e-5);
            }
        }
    }
}

TEST(Prediction, RequiresMdt) {
    FeedbackSystem sys = table_system(1);
    sys.signal = SignalSpec::nps();
    EXPECT_THROW(theorem1_predict(sys), UnsupportedSignal);
    EXPECT_FALSE(simulate(sys, 450, {3, 1e-4, false}).prediction);
}
