#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fairbalance {

/// Half-day demand regime. Morning covers hours 0-11, evening hours 12-23.
enum class Period : int { morning = 0, evening = 1 };

inline constexpr Period other(Period p) noexcept {
    return p == Period::morning ? Period::evening : Period::morning;
}

std::string_view to_string(Period p) noexcept;

/// Expected arrivals and departures over one half-day window.
struct DemandRates {
    double arrival = 0.0;
    double departure = 0.0;
};

/// One area category. Index 1 is the most peripheral, M the most central.
struct CategoryProfile {
    int index = 1;
    int node_count = 1;
    DemandRates morning_rates;
    DemandRates evening_rates;
    double phi = 1.0; ///< rebalancing-cost factor
    double chi = 1.0; ///< fairness weight
    double zeta_morning = 0.0;
    double zeta_evening = 0.0;

    const DemandRates& rates(Period p) const noexcept {
        return p == Period::morning ? morning_rates : evening_rates;
    }
    double zeta(Period p) const noexcept { return p == Period::morning ? zeta_morning : zeta_evening; }

    /// Sets both clutter tolerances to half the period's expected arrivals.
    void refresh_zeta() noexcept {
        zeta_morning = 0.5 * morning_rates.arrival;
        zeta_evening = 0.5 * evening_rates.arrival;
    }
};

struct CostWeights {
    double rebalancing = 1.0; ///< omega_1
    double failures = 10.0;   ///< omega_2
    double vehicles = 0.01;   ///< omega_3
};

/// Full experiment configuration: network, reward constants, learning
/// hyperparameters and evaluation cost weights.
struct ScenarioConfig {
    int M = 0;
    std::vector<CategoryProfile> categories;
    double alpha = 20.0;
    double xi = 0.3;
    double beta = 0.0;
    double gamma = 0.9;
    int sigma = 100;
    double learning_rate = 0.01;
    double epsilon_decay = 8.25e-7;
    long train_days = 100'000;
    long eval_days = 100;
    CostWeights cost_weights;
    int action_step = 5;
    int max_action = 30;

    int total_nodes() const noexcept;
    int action_count() const noexcept { return 2 * (max_action / action_step) + 1; }
    /// Action values in ascending order, -max_action .. +max_action.
    std::vector<int> actions() const;
    bool is_valid_action(int action) const noexcept;
    int action_index(int action) const; ///< throws InvalidActionError
    int action_value(int index) const noexcept { return -max_action + index * action_step; }

    /// Throws IndexError unless 1 <= m <= M.
    const CategoryProfile& category(int m) const;

    /// Checks every structural invariant; throws ConfigError with the first violation.
    void validate() const;
};

/// Built-in scenario for M in {2, 3, 4, 5} with default constants.
/// Throws ConfigError for any other M.
ScenarioConfig build_scenario(int M);

/// Rebalancing-cost factor of category m. Throws IndexError when out of range.
double phi(const ScenarioConfig& config, int m);

/// Fairness weight of category m. Throws IndexError when out of range.
double chi(const ScenarioConfig& config, int m);

/// Applies a flat key-value override text to a scenario.
///
/// Lines are `key = value`; blank lines and `#` comments are skipped. Keys:
/// M, nodes.<m>, rates.morning.<m>, rates.evening.<m> (two comma-separated
/// reals), phi.<m>, chi.<m>, alpha, xi, beta, gamma, sigma, lr, eps_decay,
/// train_days, eval_days, omega1..omega3, action_step, action_max.
/// A file that sets M starts from build_scenario(M) when M is built in, and
/// from an empty M-category table otherwise; without M it starts from `base`.
/// Unknown or duplicate keys, malformed values and invariant violations
/// throw ConfigError.
ScenarioConfig parse_scenario_overrides(std::string_view text, const std::optional<ScenarioConfig>& base);

ScenarioConfig load_scenario_file(const std::filesystem::path& path, const std::optional<ScenarioConfig>& base);

/// True when the override text names M explicitly.
bool overrides_set_m(std::string_view text);

} // namespace fairbalance
