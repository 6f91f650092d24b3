#include "fairbalance/reward.hpp"

#include <cmath>

#include "fairbalance/sim.hpp"

namespace fairbalance {

double clutter_loss(double vehicles, double mu, double zeta) noexcept {
    return std::max(0.0, std::fabs(vehicles - mu) - zeta);
}

RewardTerms local_reward(int action, std::int64_t failures, int vehicles_after, const CategoryProfile& profile,
                         const ScenarioConfig& scenario, Period period) {
    scenario.action_index(action);
    RewardTerms terms;
    terms.rebalance_cost = scenario.alpha * profile.phi * rebalance_indicator(action);
    terms.failure_penalty = static_cast<double>(failures);
    terms.clutter_penalty =
        scenario.xi * clutter_loss(vehicles_after, expected_demand(profile, period), profile.zeta(period));
    terms.total = -terms.rebalance_cost - terms.failure_penalty - terms.clutter_penalty;
    return terms;
}

RewardTerms fair_local_reward(int action, std::int64_t failures, int vehicles_after, const CategoryProfile& profile,
                              const ScenarioConfig& scenario, Period period) {
    RewardTerms terms = local_reward(action, failures, vehicles_after, profile, scenario, period);
    terms.fairness_penalty = scenario.beta * profile.chi * static_cast<double>(failures);
    terms.total -= terms.fairness_penalty;
    return terms;
}

double global_reward(std::span<const RewardTerms> terms) noexcept {
    double sum = 0.0;
    for (const auto& t : terms) {
        sum += t.total;
    }
    return sum;
}

} // namespace fairbalance
