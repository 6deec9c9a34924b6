#include "aoma/analytic.hpp"
#include "aoma/mdp.hpp"
#include "aoma/oracle.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace aoma;

TEST(TruncatedStateSpace, IndexRoundTrip) {
    TruncatedStateSpace sp(7);
    EXPECT_EQ(sp.size(), 16u);
    for (std::size_t i = 0; i < sp.size(); ++i) EXPECT_EQ(sp.index(sp.state(i)), i);
    EXPECT_EQ(sp.index(SystemState::missed_alarm(50)), sp.index(SystemState::missed_alarm(7)));
    EXPECT_EQ(sp.index(SystemState::false_alarm(9)), sp.index(SystemState::false_alarm(7)));
    EXPECT_THROW(sp.state(16), std::out_of_range);
}

TEST(TruncatedMdp, RowsAreStochasticAndCostsMatchKernel) {
    const auto m = ModelParams::make(0.2, 0.3, 0.9, 0.8, 8.0);
    const auto mdp = build_truncated_mdp(m, 10);
    for (std::size_t i = 0; i < mdp.size(); ++i)
        for (Action a : {Action::Idle, Action::Transmit}) {
            double s = 0.0;
            for (const auto& e : mdp.row(i, a).edges) s += e.probability;
            EXPECT_NEAR(s, 1.0, 1e-15);
        }
    // interior states price exactly like the untruncated kernel
    const auto s = SystemState::missed_alarm(4);
    EXPECT_NEAR(mdp.row(mdp.space.index(s), Action::Transmit).cost, expected_stage_cost(m, s, Action::Transmit), 1e-14);
    // at the boundary the age stays at N
    const auto& b = mdp.row(mdp.space.index(SystemState::missed_alarm(10)), Action::Idle);
    EXPECT_NEAR(b.cost, 0.7 * 0.8 * 10.0, 1e-13);
    EXPECT_THROW(build_truncated_mdp(m, 1), std::invalid_argument);
}

TEST(Rvi, FindsSwitchingOptimumAtReferenceParameters) {
    const auto m = ModelParams::make(0.2, 0.3, 0.9, 0.8, 8.0);
    const auto sol = rvi_solve(build_truncated_mdp(m, 100));
    const auto st = check_switching_structure(sol.policy);
    ASSERT_TRUE(st.is_switching());
    EXPECT_EQ(*st.as_switching(100), (SwitchingPolicy{2, 22}));
    EXPECT_NEAR(sol.value.rho, switching_metrics(m, {2, 22}).objective, 1e-8);
    EXPECT_EQ(sol.value.h[0], 0.0);
    EXPECT_LT(sol.span, 1e-10);
}

TEST(Rvi, RhoEqualsOracleCostOfGreedyPolicy) {
    prop::Draws g(21);
    for (int i = 0; i < 10; ++i) {
        const auto m = g.params(0.2, 0.8, 0.5, 10.0);
        const auto mdp = build_truncated_mdp(m, 60);
        const auto sol = rvi_solve(mdp);
        const auto orc = oracle::solve(mdp, oracle::rule(sol.policy));
        EXPECT_NEAR(sol.value.rho, orc.metrics.objective, 1e-8);
    }
}

TEST(Rvi, ReportsNonConvergence) {
    const auto m = ModelParams::make(0.2, 0.3, 0.9, 0.8, 8.0);
    try {
        rvi_solve(build_truncated_mdp(m, 30), 1e-12, 3);
        FAIL() << "expected ConvergenceError";
    } catch (const ConvergenceError& e) {
        EXPECT_EQ(e.iterations(), 3u);
        EXPECT_GT(e.last_span(), 1e-12);
    }
    EXPECT_THROW(rvi_solve(build_truncated_mdp(m, 30), 0.0, 10), std::invalid_argument);
}

TEST(Rvi, FreeTransmissionOnPerfectChannelAlwaysTransmits) {
    const auto m = ModelParams::make(0.3, 0.2, 1.0, 0.5, 0.0);
    const auto sol = rvi_solve(build_truncated_mdp(m, 20));
    EXPECT_NEAR(sol.value.rho, 0.0, 1e-12);
    const auto st = check_switching_structure(sol.policy);
    EXPECT_EQ(st.synced0_action, Action::Transmit);
    EXPECT_EQ(st.synced1_action, Action::Transmit);
}

TEST(Rvi, TiesGoToIdle) {
    // beta = 0 and lambda = 0: in Synced(0) both actions cost nothing
    const auto m = ModelParams::make(0.3, 0.2, 0.9, 0.0, 0.0);
    const auto mdp = build_truncated_mdp(m, 5);
    const std::vector<double> h(mdp.size(), 0.0);
    EXPECT_DOUBLE_EQ(q_value(mdp, h, 0, Action::Idle), q_value(mdp, h, 0, Action::Transmit));
    EXPECT_EQ(greedy_action(mdp, h, 0), Action::Idle);
}

TEST(PolicyTable, FromSwitchingAgreesWithPolicy) {
    const SwitchingPolicy pol{0, 6};
    const auto t = PolicyTable::from_switching(pol, 10);
    for (std::size_t i = 0; i < t.space.size(); ++i)
        EXPECT_EQ(t.actions[i], pol.decide(t.space.state(i)));
    EXPECT_EQ(t.decide(SystemState::false_alarm(80)), Action::Transmit);
    EXPECT_THROW(PolicyTable(10, std::vector<Action>(5)), std::invalid_argument);
}

TEST(StructureCheck, RecognisesSwitchingAndNonMonotoneTables) {
    for (auto pol : {SwitchingPolicy{0, 0}, SwitchingPolicy{3, 0}, SwitchingPolicy{2, 7}}) {
        const auto st = check_switching_structure(PolicyTable::from_switching(pol, 12));
        ASSERT_TRUE(st.is_switching());
        EXPECT_EQ(*st.as_switching(12), pol);
    }
    auto t = PolicyTable::from_switching({2, 5}, 12);
    t.at(SystemState::missed_alarm(4)) = Action::Idle;
    const auto st = check_switching_structure(t);
    EXPECT_FALSE(st.missed.monotone);
    EXPECT_TRUE(st.falsed.monotone);
    EXPECT_FALSE(st.as_switching(12).has_value());

    const auto never = check_switching_structure(PolicyTable::constant(8, Action::Idle));
    EXPECT_EQ(*never.as_switching(8), (SwitchingPolicy{9, 9}));
}
