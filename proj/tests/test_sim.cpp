#include <gtest/gtest.h>

#include <sstream>

#include "fairbalance/city.hpp"
#include "fairbalance/error.hpp"
#include "fairbalance/sim.hpp"

using namespace fairbalance;

namespace {

CategoryProfile profile_with(double arrival, double departure) {
    CategoryProfile p;
    p.morning_rates = {arrival, departure};
    p.evening_rates = {arrival, departure};
    p.refresh_zeta();
    return p;
}

} // namespace

TEST(StepHour, EmptyAreaCountsEveryDepartureAsFailure) {
    const auto profile = profile_with(0.0, 60.0);
    RandomSource rng{3};
    std::int64_t total_failures = 0;
    for (int h = 0; h < 100; ++h) {
        AreaState s{0, 1, 0, 0, 0};
        const auto out = step_hour(s, profile, Period::morning, 100, rng);
        EXPECT_EQ(s.vehicles, 0);
        EXPECT_EQ(out.served_departures, 0);
        EXPECT_EQ(out.failures, s.window_demand);
        total_failures += out.failures;
    }
    EXPECT_GT(total_failures, 0);
}

TEST(StepHour, NoDeparturesOnlyAddsUpToCap) {
    const auto profile = profile_with(120.0, 0.0);
    RandomSource rng{4};
    for (int h = 0; h < 100; ++h) {
        AreaState s{0, 1, 50, 0, 0};
        const auto out = step_hour(s, profile, Period::morning, 55, rng);
        EXPECT_EQ(out.failures, 0);
        EXPECT_EQ(s.vehicles, std::min<std::int64_t>(50 + out.arrivals, 55));
    }
}

TEST(StepHour, ConservationAndBounds) {
    const auto s5 = build_scenario(5);
    RandomSource rng{11};
    for (int trial = 0; trial < 20000; ++trial) {
        const auto& profile = s5.category(1 + static_cast<int>(rng.uniform_index(5)));
        const Period period = rng.uniform_index(2) == 0 ? Period::morning : Period::evening;
        const int sigma = 1 + static_cast<int>(rng.uniform_index(30));
        AreaState s{0, profile.index, static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(sigma) + 1)), 0, 0};
        const int before = s.vehicles;
        const auto out = step_hour(s, profile, period, sigma, rng);
        ASSERT_GE(s.vehicles, 0);
        ASSERT_LE(s.vehicles, sigma);
        EXPECT_EQ(out.attempts(), s.window_demand);
        const std::int64_t applied = s.vehicles - before + out.served_departures;
        EXPECT_GE(applied, 0);
        EXPECT_LE(applied, out.arrivals);
        if (applied < out.arrivals) {
            // Dropped arrivals need the cap to be reachable within the hour.
            EXPECT_GT(before + out.arrivals, sigma);
        }
    }
}

TEST(StepHour, DriftFarFromBoundaries) {
    const auto profile = build_scenario(5).category(5);
    const auto demand = HourlyDemand::from(profile, Period::morning);
    RandomSource rng{2718};
    double total = 0.0;
    constexpr int kHours = 1'000'000;
    for (int h = 0; h < kHours; ++h) {
        AreaState s{0, 5, 500, 0, 0};
        step_hour(s, demand, 1000, rng);
        total += s.vehicles - 500;
    }
    const double expected = (13.8 - 7.0) / 12.0;
    EXPECT_NEAR(total / kHours, expected, 0.01 * expected);
}

TEST(ApplyAction, Examples) {
    const auto sc = build_scenario(5);
    AreaState s{0, 1, 5, 3, 9};
    const auto up = apply_action(s, 5, sc);
    EXPECT_EQ(up.vehicles, 10);
    EXPECT_EQ(up.window_failures, 0);
    EXPECT_EQ(up.window_demand, 0);
    EXPECT_EQ(apply_action(s, -30, sc).vehicles, 0);
    s.vehicles = 98;
    EXPECT_EQ(apply_action(s, 5, sc).vehicles, 100);
    EXPECT_THROW(apply_action(s, 3, sc), InvalidActionError);
    EXPECT_THROW(apply_action(s, 35, sc), InvalidActionError);
}

TEST(ExpectedDemand, Examples) {
    const auto sc = build_scenario(5);
    EXPECT_EQ(expected_demand(sc.category(5), Period::morning), 7.0);
    EXPECT_EQ(expected_demand(sc.category(1), Period::evening), 0.3);
    EXPECT_EQ(expected_demand(profile_with(3.0, 0.0), Period::morning), 0.0);
}

TEST(InitialNetwork, GroupedByCategory) {
    const auto sc = build_scenario(5);
    const auto net = initial_network(sc);
    ASSERT_EQ(net.size(), 160U);
    EXPECT_EQ(net.front().category, 1);
    EXPECT_EQ(net.front().vehicles, 2);
    EXPECT_EQ(net.back().category, 5);
    EXPECT_EQ(net.back().vehicles, 7);
    for (std::size_t i = 0; i < net.size(); ++i) {
        EXPECT_EQ(net[i].area_id, static_cast<int>(i));
        if (i > 0) {
            EXPECT_LE(net[i - 1].category, net[i].category);
        }
    }
}

TEST(RunWindow, ZeroRatesLeaveStatesUnchanged) {
    auto sc = parse_scenario_overrides("M = 1\nnodes.1 = 4\n", std::nullopt);
    auto net = initial_network(sc);
    net[2].vehicles = 9;
    const auto before = net;
    RandomSource rng{1};
    const auto out = run_window(net, sc, Period::evening, rng);
    for (std::size_t i = 0; i < net.size(); ++i) {
        EXPECT_EQ(out[i], WindowOutcome{});
        EXPECT_EQ(net[i].vehicles, before[i].vehicles);
    }
}

TEST(RunWindow, FixedSeedReplays) {
    const auto sc = build_scenario(3);
    auto a = initial_network(sc);
    auto b = initial_network(sc);
    RandomSource ra{77};
    RandomSource rb{77};
    for (int w = 0; w < 10; ++w) {
        const Period p = w % 2 == 0 ? Period::morning : Period::evening;
        EXPECT_EQ(run_window(a, sc, p, ra), run_window(b, sc, p, rb));
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].vehicles, b[i].vehicles);
    }
}

TEST(RunWindow, WindowEqualsSumOfHours) {
    const auto sc = build_scenario(5);
    auto by_window = initial_network(sc);
    auto by_hour = by_window;
    RandomSource rw{5};
    RandomSource rh{5};
    const auto out = run_window(by_window, sc, Period::morning, rw);
    const auto demands = hourly_demands(sc);
    for (std::size_t i = 0; i < by_hour.size(); ++i) {
        WindowOutcome sum;
        for (int h = 0; h < kHoursPerWindow; ++h) {
            sum += step_hour(by_hour[i], demands[static_cast<std::size_t>(by_hour[i].category - 1)][0], sc.sigma, rh);
        }
        EXPECT_EQ(sum, out[i]);
        EXPECT_EQ(by_hour[i].window_failures, out[i].failures);
    }
}

TEST(SimClockTest, EpochsAtEndOfHalfDays) {
    SimClock c;
    int epochs = 0;
    for (int h = 0; h < 48; ++h) {
        if (c.is_rebalancing_epoch()) {
            ++epochs;
            EXPECT_EQ(c.period(), c.hour == 11 ? Period::morning : Period::evening);
        }
        c.advance();
    }
    EXPECT_EQ(epochs, 4);
    EXPECT_EQ(c.day, 2);
    EXPECT_EQ(c.hour, 0);
}

TEST(TraceWriterTest, HeaderAndRow) {
    std::ostringstream out;
    TraceWriter w{out};
    w.write({3, 11, 7, 2, 4, -5, 0, 1, 6});
    EXPECT_EQ(out.str(),
              "day,hour,area_id,category,vehicles_before,action,vehicles_after,failures,demand\n3,11,7,2,4,-5,0,1,6\n");
}
