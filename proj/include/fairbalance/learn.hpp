#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "fairbalance/city.hpp"
#include "fairbalance/metrics.hpp"
#include "fairbalance/sim.hpp"
#include "fairbalance/stochastic.hpp"

namespace fairbalance {

/// Observation of one area agent: the period of the upcoming window and the
/// vehicle count before the action.
struct QState {
    Period period = Period::morning;
    int vehicles = 0;
};

/// Action-value table of one category agent over 2 x (sigma + 1) states.
/// Epsilon anneals linearly with the number of updates this table received.
class QTable {
  public:
    QTable(int category, int sigma, int action_step, int max_action, double epsilon_decay);

    int category() const noexcept { return category_; }
    int sigma() const noexcept { return sigma_; }
    int action_step() const noexcept { return action_step_; }
    int max_action() const noexcept { return max_action_; }
    int action_count() const noexcept { return action_count_; }
    double epsilon_decay() const noexcept { return epsilon_decay_; }
    std::uint64_t update_count() const noexcept { return update_count_; }
    void set_update_count(std::uint64_t count) noexcept { update_count_ = count; }

    /// max(0, 1 - epsilon_decay * update_count)
    double epsilon() const noexcept;

    int action_value(int index) const noexcept { return -max_action_ + index * action_step_; }
    int action_index(int action) const; ///< throws InvalidActionError

    std::span<double> row(Period p, int vehicles);
    std::span<const double> row(Period p, int vehicles) const;
    double& at(Period p, int vehicles, int action_index);
    double at(Period p, int vehicles, int action_index) const;
    double max_value(Period p, int vehicles) const;

    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }

    friend bool operator==(const QTable&, const QTable&) = default;

  private:
    std::size_t offset(Period p, int vehicles) const;

    int category_;
    int sigma_;
    int action_step_;
    int max_action_;
    int action_count_;
    double epsilon_decay_;
    std::uint64_t update_count_ = 0;
    std::vector<double> values_;
};

/// Trained agents, one per category, plus the run fingerprint.
struct PolicySet {
    int M = 0;
    int sigma = 0;
    double beta = 0.0;
    std::uint64_t seed = 0;
    std::vector<QTable> tables; ///< index m - 1

    QTable& table(int m);
    const QTable& table(int m) const;

    /// Deterministic greedy action: highest value, ties resolved toward the
    /// smallest |action| and then the removal side.
    int greedy_action(int m, Period p, int vehicles) const;

    friend bool operator==(const PolicySet&, const PolicySet&) = default;
};

/// All-zero tables shaped for the scenario.
PolicySet empty_policies(const ScenarioConfig& scenario, std::uint64_t seed);

/// Epsilon-greedy choice with the table's current epsilon. Exploration draws
/// one uniform (skipped when epsilon is 0) and one index; ties among
/// maximisers are broken uniformly with one more index draw.
int select_action(const QTable& q, Period p, int vehicles, RandomSource& rng);

/// Same with an explicit exploration rate; 0 gives the greedy policy.
int select_action(const QTable& q, double epsilon, Period p, int vehicles, RandomSource& rng);

/// Q(s,a) += lr * (r + gamma * max_a' Q(s',a') - Q(s,a)); bumps update_count.
void q_update(QTable& q, const QState& s, int action, double reward, const QState& next,
              const ScenarioConfig& scenario);

struct TrainOptions {
    /// Called after each simulated day with that day's summed network reward.
    std::function<void(long day, double reward)> on_day;
};

/// Continuing-task training over scenario.train_days days.
///
/// Day 0 opens with an uncontrolled morning window. Each epoch then visits
/// the areas in index order: observe, choose with the category's table,
/// apply, simulate the following 12 hours, score with fair_local_reward and
/// update toward the state at the next epoch. Every table update checks
/// |Q| <= max|r| / (1 - gamma) and throws std::logic_error on violation.
PolicySet train(const ScenarioConfig& scenario, std::uint64_t seed, const TrainOptions& options = {});

/// Greedy (epsilon = 0) evaluation over scenario.eval_days days from a fresh
/// network. Throws MismatchError when the policies do not fit the scenario.
/// `trace_out` receives the raw tallies; `writer` one row per area and epoch.
EvalReport evaluate(const PolicySet& policies, const ScenarioConfig& scenario, std::uint64_t seed,
                    EvalTrace* trace_out = nullptr, TraceWriter* writer = nullptr);

/// Text dump: header line, fingerprint line, then per table a
/// `table <m> updates <n>` line and 2(sigma+1) rows of hexadecimal floats.
void save_policies(const PolicySet& policies, std::ostream& out);

/// Inverse of save_policies; lossless. Throws ConfigError on malformed input.
PolicySet load_policies(std::istream& in);

} // namespace fairbalance
