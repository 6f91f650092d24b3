#include "fairbalance/sim.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace fairbalance {

void SimClock::advance() noexcept {
    if (++hour == 24) {
        hour = 0;
        ++day;
    }
}

WindowOutcome& WindowOutcome::operator+=(const WindowOutcome& other) noexcept {
    arrivals += other.arrivals;
    served_departures += other.served_departures;
    failures += other.failures;
    return *this;
}

HourlyDemand HourlyDemand::from(const CategoryProfile& profile, Period period) {
    const auto& rates = profile.rates(period);
    return {PoissonSampler{rates.arrival / kHoursPerWindow}, PoissonSampler{rates.departure / kHoursPerWindow}};
}

WindowOutcome step_hour(AreaState& state, const HourlyDemand& demand, int sigma, RandomSource& rng) {
    const auto n_arrivals = static_cast<std::int64_t>(demand.arrivals(rng));
    const auto n_departures = static_cast<std::int64_t>(demand.departures(rng));
    WindowOutcome out;
    out.arrivals = n_arrivals;
    if (n_arrivals + n_departures == 0) {
        return out;
    }

    if (state.vehicles >= n_departures && state.vehicles + n_arrivals <= sigma) {
        state.vehicles += static_cast<int>(n_arrivals - n_departures);
        out.served_departures = n_departures;
    } else {
        // Event times: (time, is_departure).
        std::vector<std::pair<double, bool>> events;
        events.reserve(static_cast<std::size_t>(n_arrivals + n_departures));
        for (std::int64_t i = 0; i < n_arrivals; ++i) {
            events.emplace_back(rng.uniform(), false);
        }
        for (std::int64_t i = 0; i < n_departures; ++i) {
            events.emplace_back(rng.uniform(), true);
        }
        std::stable_sort(events.begin(), events.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        for (const auto& [time, is_departure] : events) {
            if (!is_departure) {
                if (state.vehicles < sigma) {
                    ++state.vehicles;
                }
            } else if (state.vehicles > 0) {
                --state.vehicles;
                ++out.served_departures;
            } else {
                ++out.failures;
            }
        }
    }
    state.window_failures += out.failures;
    state.window_demand += n_departures;
    return out;
}

WindowOutcome step_hour(AreaState& state, const CategoryProfile& profile, Period period, int sigma,
                        RandomSource& rng) {
    return step_hour(state, HourlyDemand::from(profile, period), sigma, rng);
}

AreaState apply_action(const AreaState& state, int action, const ScenarioConfig& scenario) {
    scenario.action_index(action);
    AreaState next = state;
    next.vehicles = std::clamp(state.vehicles + action, 0, scenario.sigma);
    next.window_failures = 0;
    next.window_demand = 0;
    return next;
}

double expected_demand(const CategoryProfile& profile, Period period) noexcept {
    return profile.rates(period).departure;
}

std::vector<AreaState> initial_network(const ScenarioConfig& scenario) {
    std::vector<AreaState> areas;
    areas.reserve(static_cast<std::size_t>(scenario.total_nodes()));
    int id = 0;
    for (const auto& profile : scenario.categories) {
        const int start = std::min(static_cast<int>(std::lround(profile.morning_rates.departure)), scenario.sigma);
        for (int k = 0; k < profile.node_count; ++k) {
            areas.push_back({id++, profile.index, start, 0, 0});
        }
    }
    return areas;
}

std::vector<std::array<HourlyDemand, 2>> hourly_demands(const ScenarioConfig& scenario) {
    std::vector<std::array<HourlyDemand, 2>> out;
    out.reserve(scenario.categories.size());
    for (const auto& profile : scenario.categories) {
        out.push_back({HourlyDemand::from(profile, Period::morning), HourlyDemand::from(profile, Period::evening)});
    }
    return out;
}

std::vector<WindowOutcome> run_window(std::span<AreaState> states,
                                      std::span<const std::array<HourlyDemand, 2>> demands, int sigma,
                                      Period period, RandomSource& rng) {
    std::vector<WindowOutcome> outcomes(states.size());
    const auto p = static_cast<std::size_t>(period);
    for (std::size_t i = 0; i < states.size(); ++i) {
        const auto& demand = demands[static_cast<std::size_t>(states[i].category - 1)][p];
        for (int h = 0; h < kHoursPerWindow; ++h) {
            outcomes[i] += step_hour(states[i], demand, sigma, rng);
        }
    }
    return outcomes;
}

std::vector<WindowOutcome> run_window(std::span<AreaState> states, const ScenarioConfig& scenario, Period period,
                                      RandomSource& rng) {
    const auto demands = hourly_demands(scenario);
    return run_window(states, demands, scenario.sigma, period, rng);
}

TraceWriter::TraceWriter(std::ostream& out) : out_{out} {
    out_ << "day,hour,area_id,category,vehicles_before,action,vehicles_after,failures,demand\n";
}

void TraceWriter::write(const TraceRow& row) {
    out_ << row.day << ',' << row.hour << ',' << row.area_id << ',' << row.category << ',' << row.vehicles_before
         << ',' << row.action << ',' << row.vehicles_after << ',' << row.failures << ',' << row.demand << '\n';
}

} // namespace fairbalance
