#pragma once

#include <cstdint>
#include <span>

#include "fairbalance/city.hpp"

namespace fairbalance {

/// Decomposed per-area reward. All penalties are subtracted from zero:
/// total = -rebalance_cost - failure_penalty - fairness_penalty - clutter_penalty.
struct RewardTerms {
    double rebalance_cost = 0.0;   ///< alpha * phi(kappa) * [a != 0]
    double failure_penalty = 0.0;  ///< failures
    double fairness_penalty = 0.0; ///< beta * chi(kappa) * failures, may be negative
    double clutter_penalty = 0.0;  ///< xi * clutter_loss
    double total = 0.0;
};

/// Zero/one indicator of a rebalancing operation.
inline constexpr int rebalance_indicator(int action) noexcept { return action != 0 ? 1 : 0; }

/// Distance beyond the tolerance band: max(0, |vehicles - mu| - zeta).
double clutter_loss(double vehicles, double mu, double zeta) noexcept;

/// Profit-only reward of one area for the window following `action`.
/// `period` is the period of that window; it selects mu and zeta.
RewardTerms local_reward(int action, std::int64_t failures, int vehicles_after, const CategoryProfile& profile,
                         const ScenarioConfig& scenario, Period period);

/// local_reward minus the fairness term beta * chi(kappa) * failures.
RewardTerms fair_local_reward(int action, std::int64_t failures, int vehicles_after, const CategoryProfile& profile,
                              const ScenarioConfig& scenario, Period period);

/// Network reward: sum of per-area totals.
double global_reward(std::span<const RewardTerms> terms) noexcept;

} // namespace fairbalance
