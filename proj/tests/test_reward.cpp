#include <gtest/gtest.h>

#include <vector>

#include "fairbalance/city.hpp"
#include "fairbalance/error.hpp"
#include "fairbalance/reward.hpp"
#include "fairbalance/sim.hpp"
#include "support/oracles.hpp"

using namespace fairbalance;

TEST(ClutterLoss, Examples) {
    EXPECT_EQ(clutter_loss(20, 20, 3), 0.0);
    EXPECT_NEAR(clutter_loss(30, 20, 6.9), 3.1, 1e-12);
    EXPECT_EQ(clutter_loss(10, 20, 6.9), clutter_loss(20, 10, 6.9));
}

TEST(ClutterLoss, ZeroExactlyInsideBand) {
    for (int v = 0; v <= 100; ++v) {
        const double l = clutter_loss(v, 40.0, 6.5);
        EXPECT_GE(l, 0.0);
        EXPECT_EQ(l == 0.0, std::abs(v - 40.0) <= 6.5) << v;
    }
}

TEST(ClutterLoss, ConvexOnIntegerGrid) {
    for (double zeta : {0.0, 0.15, 3.0, 6.9}) {
        for (int a = 0; a <= 100; ++a) {
            for (int b = a; b <= 100; b += 2) {
                const double mid = clutter_loss((a + b) / 2, 20.0, zeta);
                EXPECT_LE(mid, 0.5 * (clutter_loss(a, 20.0, zeta) + clutter_loss(b, 20.0, zeta)) + 1e-12);
            }
        }
    }
}

TEST(LocalReward, Examples) {
    const auto sc = build_scenario(5);
    // Category 1, morning: mu = 2, zeta = 0.15; vehicles 2 sits in the band.
    EXPECT_EQ(local_reward(5, 0, 2, sc.category(1), sc, Period::morning).total, -20.0);
    EXPECT_EQ(local_reward(0, 3, 2, sc.category(1), sc, Period::morning).total, -3.0);
    // Category 5, morning: mu = 7, zeta = 6.9, vehicles 17 gives loss 3.1.
    const auto t = local_reward(-5, 2, 17, sc.category(5), sc, Period::morning);
    EXPECT_NEAR(t.total, -4.93, 1e-12);
    EXPECT_NEAR(t.rebalance_cost, 2.0, 1e-15);
    EXPECT_EQ(t.failure_penalty, 2.0);
    EXPECT_NEAR(t.clutter_penalty, 0.93, 1e-12);
    EXPECT_EQ(t.fairness_penalty, 0.0);
}

TEST(LocalReward, IndicatorChargesEveryNonzeroActionAlike) {
    const auto sc = build_scenario(4);
    for (int m = 1; m <= 4; ++m) {
        const double base = local_reward(5, 0, 3, sc.category(m), sc, Period::evening).rebalance_cost;
        for (int a : sc.actions()) {
            const double c = local_reward(a, 0, 3, sc.category(m), sc, Period::evening).rebalance_cost;
            EXPECT_EQ(c, a == 0 ? 0.0 : base);
        }
    }
    EXPECT_EQ(rebalance_indicator(0), 0);
    EXPECT_EQ(rebalance_indicator(-30), 1);
}

TEST(LocalReward, InvalidAction) {
    const auto sc = build_scenario(5);
    EXPECT_THROW(local_reward(4, 0, 0, sc.category(1), sc, Period::morning), InvalidActionError);
}

TEST(FairLocalReward, ZeroBetaEqualsLocal) {
    const auto sc = build_scenario(5);
    for (int m = 1; m <= 5; ++m) {
        for (int a : {-30, 0, 15}) {
            for (int f : {0, 1, 9}) {
                const auto plain = local_reward(a, f, 12, sc.category(m), sc, Period::evening);
                const auto fair = fair_local_reward(a, f, 12, sc.category(m), sc, Period::evening);
                EXPECT_EQ(plain.total, fair.total);
            }
        }
    }
}

TEST(FairLocalReward, Examples) {
    auto sc = build_scenario(5);
    sc.beta = 1.0;
    // Category 1 morning (mu 2, zeta 0.15) and category 5 morning (mu 7, zeta 6.9), both in band.
    EXPECT_EQ(fair_local_reward(0, 2, 2, sc.category(1), sc, Period::morning).total, -4.0);
    EXPECT_EQ(fair_local_reward(0, 2, 7, sc.category(5), sc, Period::morning).total, 0.0);
}

TEST(FairLocalReward, FailureCoefficientSign) {
    auto sc = build_scenario(5);
    for (double beta : {0.0, 0.3, 1.0}) {
        sc.beta = beta;
        for (int m = 1; m <= 5; ++m) {
            const double coef = 1.0 + beta * chi(sc, m);
            double prev = fair_local_reward(0, 0, 5, sc.category(m), sc, Period::morning).total;
            for (int f = 1; f <= 20; ++f) {
                const double cur = fair_local_reward(0, f, 5, sc.category(m), sc, Period::morning).total;
                if (coef > 0.0) {
                    EXPECT_LT(cur, prev);
                } else {
                    EXPECT_EQ(cur, prev);
                }
                prev = cur;
            }
        }
    }
}

TEST(GlobalReward, Additivity) {
    EXPECT_EQ(global_reward({}), 0.0);
    std::vector<RewardTerms> terms(2);
    terms[0].total = -3.0;
    terms[1].total = -4.93;
    EXPECT_NEAR(global_reward(terms), -7.93, 1e-15);
}

TEST(GlobalReward, MatchesDirectEvaluationOnFullNetwork) {
    RandomSource rng{160};
    for (int M = 2; M <= 5; ++M) {
        auto sc = build_scenario(M);
        for (int trial = 0; trial < 200; ++trial) {
            sc.beta = rng.uniform();
            const Period period = rng.uniform_index(2) == 0 ? Period::morning : Period::evening;
            std::vector<RewardTerms> terms;
            std::vector<oracle::AreaSample> areas;
            for (const auto& area : initial_network(sc)) {
                const auto& profile = sc.category(area.category);
                const int action = sc.action_value(static_cast<int>(rng.uniform_index(13)));
                const auto failures = static_cast<long>(rng.uniform_index(15));
                const int after = static_cast<int>(rng.uniform_index(101));
                terms.push_back(fair_local_reward(action, failures, after, profile, sc, period));
                areas.push_back({area.category, action, failures, after, profile.phi, profile.chi,
                                 profile.rates(period).departure, 0.5 * profile.rates(period).arrival});
            }
            const double expected = oracle::global_reward(areas, sc.alpha, sc.xi, sc.beta);
            EXPECT_NEAR(global_reward(terms), expected, 1e-12 * std::max(1.0, std::fabs(expected)));
        }
    }
}
