#pragma once

#include <array>
#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "fairbalance/city.hpp"
#include "fairbalance/stochastic.hpp"

namespace fairbalance {

inline constexpr int kHoursPerWindow = 12;

/// Live state of one service area.
struct AreaState {
    int area_id = 0;
    int category = 1;
    int vehicles = 0;
    std::int64_t window_failures = 0; ///< failures since the last rebalance
    std::int64_t window_demand = 0;   ///< departure attempts since the last rebalance
};

/// Hour-of-day clock. Rebalancing happens at the end of hours 11 and 23.
struct SimClock {
    long day = 0;
    int hour = 0;

    Period period() const noexcept { return hour < kHoursPerWindow ? Period::morning : Period::evening; }
    bool is_rebalancing_epoch() const noexcept { return hour == 11 || hour == 23; }
    void advance() noexcept;
};

struct WindowOutcome {
    std::int64_t arrivals = 0; ///< arrival events drawn, including any dropped at the cap
    std::int64_t served_departures = 0;
    std::int64_t failures = 0;

    std::int64_t attempts() const noexcept { return served_departures + failures; }
    WindowOutcome& operator+=(const WindowOutcome& other) noexcept;
    friend bool operator==(const WindowOutcome&, const WindowOutcome&) = default;
};

/// Hourly Poisson samplers for one category in one period (rates / 12).
struct HourlyDemand {
    PoissonSampler arrivals;
    PoissonSampler departures;

    static HourlyDemand from(const CategoryProfile& profile, Period period);
};

/// Simulates one hour of one area.
///
/// Draws the arrival count then the departure-attempt count. When the order
/// of events cannot matter (enough vehicles for every attempt and no risk of
/// reaching the cap) they are applied in bulk; otherwise each event gets a
/// uniform time in the hour (arrivals first, then departures, one word each)
/// and events are processed chronologically. Arrivals at sigma are dropped;
/// departures from an empty area are failures.
WindowOutcome step_hour(AreaState& state, const HourlyDemand& demand, int sigma, RandomSource& rng);

WindowOutcome step_hour(AreaState& state, const CategoryProfile& profile, Period period, int sigma,
                        RandomSource& rng);

/// Applies a rebalancing action: clamps to [0, sigma] and resets the window
/// tallies. Throws InvalidActionError for actions outside the action set.
AreaState apply_action(const AreaState& state, int action, const ScenarioConfig& scenario);

/// Expected departures over the half-day window of `period`.
double expected_demand(const CategoryProfile& profile, Period period) noexcept;

/// Initial network: areas grouped by category in ascending order, each
/// holding round(morning departure rate) vehicles.
std::vector<AreaState> initial_network(const ScenarioConfig& scenario);

/// Precomputed hourly samplers, indexed [category - 1][period].
std::vector<std::array<HourlyDemand, 2>> hourly_demands(const ScenarioConfig& scenario);

/// Runs the 12 hours of one window for every area, area by area in index order.
std::vector<WindowOutcome> run_window(std::span<AreaState> states, const ScenarioConfig& scenario, Period period,
                                      RandomSource& rng);

/// Same as above with samplers built once by the caller.
std::vector<WindowOutcome> run_window(std::span<AreaState> states,
                                      std::span<const std::array<HourlyDemand, 2>> demands, int sigma,
                                      Period period, RandomSource& rng);

/// One row of the rebalancing trace, emitted after the window that follows
/// the action has been simulated.
struct TraceRow {
    long day = 0;
    int hour = 0;
    int area_id = 0;
    int category = 1;
    int vehicles_before = 0;
    int action = 0;
    int vehicles_after = 0;
    std::int64_t failures = 0;
    std::int64_t demand = 0;
};

/// CSV trace writer: day,hour,area_id,category,vehicles_before,action,vehicles_after,failures,demand
class TraceWriter {
  public:
    explicit TraceWriter(std::ostream& out);
    void write(const TraceRow& row);

  private:
    std::ostream& out_;
};

} // namespace fairbalance
