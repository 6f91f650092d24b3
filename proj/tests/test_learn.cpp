#include <gtest/gtest.h>

#include <sstream>
#include <vector>

#include "fairbalance/city.hpp"
#include "fairbalance/error.hpp"
#include "fairbalance/learn.hpp"

using namespace fairbalance;

namespace {

ScenarioConfig small_scenario(long train_days) {
    auto sc = build_scenario(2);
    sc.train_days = train_days;
    sc.eval_days = 5;
    sc.epsilon_decay = 1e-4;
    return sc;
}

ScenarioConfig zero_demand(long train_days) {
    return parse_scenario_overrides("M = 1\nnodes.1 = 3\nsigma = 20\neps_decay = 1e-3\neval_days = 10\ntrain_days = " +
                                        std::to_string(train_days) + "\n",
                                    std::nullopt);
}

std::vector<double> frequencies(const QTable& q, double eps, int draws, std::uint64_t seed) {
    RandomSource rng{seed};
    std::vector<double> f(static_cast<std::size_t>(q.action_count()), 0.0);
    for (int i = 0; i < draws; ++i) {
        f[static_cast<std::size_t>(q.action_index(select_action(q, eps, Period::morning, 4, rng)))] += 1.0 / draws;
    }
    return f;
}

} // namespace

TEST(QTableTest, ShapeAndIndexing) {
    QTable q(2, 100, 5, 30, 8.25e-7);
    EXPECT_EQ(q.action_count(), 13);
    EXPECT_EQ(q.values().size(), 2U * 101U * 13U);
    EXPECT_EQ(q.action_value(0), -30);
    EXPECT_EQ(q.action_index(30), 12);
    EXPECT_THROW(q.action_index(2), InvalidActionError);
    q.at(Period::evening, 100, 12) = 3.5;
    EXPECT_EQ(q.row(Period::evening, 100)[12], 3.5);
    EXPECT_EQ(q.max_value(Period::evening, 100), 3.5);
    EXPECT_EQ(q.max_value(Period::morning, 100), 0.0);
}

TEST(QTableTest, EpsilonSchedule) {
    QTable q(1, 10, 5, 30, 8.25e-7);
    for (std::uint64_t k : {0ULL, 1ULL, 1000ULL, 606060ULL, 1212121ULL, 1212122ULL, 5000000ULL}) {
        q.set_update_count(k);
        EXPECT_EQ(q.epsilon(), std::max(0.0, 1.0 - 8.25e-7 * static_cast<double>(k)));
    }
    EXPECT_EQ(q.epsilon(), 0.0);
}

TEST(SelectAction, UniqueArgmax) {
    QTable q(1, 10, 5, 30, 1e-3);
    q.at(Period::morning, 4, 12) = 5.0;
    RandomSource rng{0};
    for (int i = 0; i < 1000; ++i) {
        EXPECT_EQ(select_action(q, 0.0, Period::morning, 4, rng), 30);
    }
}

TEST(SelectAction, FullExplorationIsUniform) {
    QTable q(1, 10, 5, 30, 1e-3);
    q.at(Period::morning, 4, 3) = 1.0;
    for (double f : frequencies(q, 1.0, 1'000'000, 17)) {
        EXPECT_NEAR(f, 1.0 / 13.0, 0.005);
    }
}

TEST(SelectAction, TiesBrokenUniformly) {
    QTable q(1, 10, 5, 30, 1e-3);
    for (double f : frequencies(q, 0.0, 1'000'000, 23)) {
        EXPECT_NEAR(f, 1.0 / 13.0, 0.005);
    }
}

TEST(SelectAction, UsesTableEpsilon) {
    QTable q(1, 10, 5, 30, 1e-3);
    q.at(Period::morning, 4, 6) = 1.0;
    q.set_update_count(1000); // epsilon 0
    RandomSource rng{2};
    for (int i = 0; i < 100; ++i) {
        EXPECT_EQ(select_action(q, Period::morning, 4, rng), 0);
    }
}

TEST(GreedyAction, PrefersSmallMovesOnTies) {
    auto sc = small_scenario(0);
    auto set = empty_policies(sc, 0);
    EXPECT_EQ(set.greedy_action(1, Period::morning, 3), 0);
    auto& q = set.table(1);
    q.at(Period::morning, 3, q.action_index(10)) = 2.0;
    q.at(Period::morning, 3, q.action_index(-10)) = 2.0;
    EXPECT_EQ(set.greedy_action(1, Period::morning, 3), -10);
    EXPECT_THROW(set.table(3), IndexError);
}

TEST(QUpdate, Examples) {
    const auto sc = build_scenario(5);
    QTable q(1, 100, 5, 30, sc.epsilon_decay);
    q_update(q, {Period::morning, 3}, 5, 1.0, {Period::evening, 4}, sc);
    EXPECT_EQ(q.at(Period::morning, 3, q.action_index(5)), 0.01);
    EXPECT_EQ(q.update_count(), 1U);
    QTable z(1, 100, 5, 30, sc.epsilon_decay);
    q_update(z, {Period::evening, 0}, 0, 0.0, {Period::morning, 0}, sc);
    for (double v : z.values()) {
        EXPECT_EQ(v, 0.0);
    }
}

TEST(QUpdate, ConvergesToGeometricFixedPoint) {
    const auto sc = build_scenario(5);
    QTable q(1, 0, 5, 0, sc.epsilon_decay);
    ASSERT_EQ(q.action_count(), 1);
    for (int i = 0; i < 20000; ++i) {
        q_update(q, {Period::morning, 0}, 0, 1.0, {Period::morning, 0}, sc);
    }
    EXPECT_NEAR(q.at(Period::morning, 0, 0), 10.0, 0.01);
}

TEST(Train, ZeroDaysLeavesTablesUntouched) {
    const auto sc = small_scenario(0);
    const auto set = train(sc, 3);
    EXPECT_EQ(set, empty_policies(sc, 3));
}

TEST(Train, Deterministic) {
    const auto sc = small_scenario(150);
    const auto a = train(sc, 8);
    const auto b = train(sc, 8);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, train(sc, 9));
    EXPECT_GT(a.table(1).update_count(), 0U);
}

TEST(Train, UpdateCountsFollowAreaCounts) {
    const auto sc = small_scenario(40);
    const auto set = train(sc, 1);
    EXPECT_EQ(set.table(1).update_count(), 2U * 40U * 60U);
    EXPECT_EQ(set.table(2).update_count(), 2U * 40U * 10U);
}

TEST(Train, DailyCallbackSeesEveryDay) {
    const auto sc = small_scenario(25);
    long days = 0;
    TrainOptions opts;
    opts.on_day = [&](long day, double reward) {
        EXPECT_EQ(day, days);
        EXPECT_LE(reward, 0.0);
        ++days;
    };
    train(sc, 4, opts);
    EXPECT_EQ(days, 25);
}

TEST(Evaluate, ZeroDemandNeedsNoRebalancing) {
    const auto sc = zero_demand(3000);
    const auto set = train(sc, 5);
    for (const Period p : {Period::morning, Period::evening}) {
        EXPECT_EQ(set.greedy_action(1, p, 0), 0);
    }
    EvalTrace trace;
    const auto report = evaluate(set, sc, 6, &trace);
    EXPECT_EQ(report.C1, 0.0);
    EXPECT_EQ(report.C2, 0.0);
    EXPECT_EQ(report.C3, 0.0);
    EXPECT_EQ(trace.category_failures[0], 0);
    EXPECT_EQ(trace.epochs.size(), 20U);
    EXPECT_TRUE(report.failure_prob_undefined);
    EXPECT_TRUE(report.gini_undefined);
}

TEST(Evaluate, DeterministicAndTraced) {
    const auto sc = small_scenario(100);
    const auto set = train(sc, 2);
    std::ostringstream a_csv;
    std::ostringstream b_csv;
    TraceWriter wa{a_csv};
    TraceWriter wb{b_csv};
    const auto a = evaluate(set, sc, 11, nullptr, &wa);
    const auto b = evaluate(set, sc, 11, nullptr, &wb);
    EXPECT_EQ(a.gini, b.gini);
    EXPECT_EQ(a.global_cost, b.global_cost);
    EXPECT_EQ(a.failure_prob, b.failure_prob);
    EXPECT_EQ(a_csv.str(), b_csv.str());
    // Header plus one row per area and epoch.
    const std::string text = a_csv.str();
    const auto lines = std::count(text.begin(), text.end(), '\n');
    EXPECT_EQ(lines, 1 + 70 * 2 * sc.eval_days);
}

TEST(Evaluate, CostsMatchTrace) {
    const auto sc = small_scenario(100);
    const auto set = train(sc, 2);
    EvalTrace trace;
    const auto r = evaluate(set, sc, 12, &trace);
    double c1 = 0.0;
    for (const auto& e : trace.epochs) {
        c1 += e.rebalancing;
    }
    EXPECT_NEAR(r.C1, c1 / static_cast<double>(trace.epochs.size()), 1e-12);
    EXPECT_NEAR(r.global_cost, r.C1 + 10.0 * r.C2 + 0.01 * r.C3, 1e-9);
    for (int m = 0; m < 2; ++m) {
        EXPECT_EQ(r.failure_prob[static_cast<std::size_t>(m)],
                  static_cast<double>(trace.category_failures[static_cast<std::size_t>(m)]) /
                      static_cast<double>(trace.category_attempts[static_cast<std::size_t>(m)]));
    }
}

TEST(Evaluate, ShapeMismatch) {
    const auto set = empty_policies(build_scenario(2), 0);
    EXPECT_THROW(evaluate(set, build_scenario(3), 0), MismatchError);
    auto other_sigma = build_scenario(2);
    other_sigma.sigma = 50;
    EXPECT_THROW(evaluate(set, other_sigma, 0), MismatchError);
}

TEST(Policies, SaveLoadRoundTrip) {
    auto sc = small_scenario(60);
    sc.beta = 0.3;
    const auto set = train(sc, 21);
    std::stringstream buffer;
    save_policies(set, buffer);
    const auto back = load_policies(buffer);
    EXPECT_EQ(back, set);
}

TEST(Policies, MalformedInput) {
    std::istringstream bad("not-a-policy v1\n");
    EXPECT_THROW(load_policies(bad), ConfigError);
    std::stringstream truncated;
    save_policies(train(small_scenario(2), 1), truncated);
    const std::string text = truncated.str();
    std::istringstream cut(text.substr(0, text.size() / 2));
    EXPECT_THROW(load_policies(cut), ConfigError);
}
