#include "fairbalance/learn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "fairbalance/error.hpp"
#include "fairbalance/reward.hpp"

namespace fairbalance {

namespace {

constexpr const char* kPolicyMagic = "fairbalance-policy-set";
constexpr int kPolicyFormatVersion = 1;

std::string hex_real(double v) {
    char buffer[40];
    std::snprintf(buffer, sizeof buffer, "%a", v);
    return buffer;
}

double parse_hex_real(const std::string& token) {
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end == token.c_str() || *end != '\0') {
        throw ConfigError("policy file: bad real '" + token + "'");
    }
    return v;
}

void expect_token(std::istream& in, const std::string& want) {
    std::string token;
    if (!(in >> token) || token != want) {
        throw ConfigError("policy file: expected '" + want + "', found '" + token + "'");
    }
}

template <typename T>
T read_value(std::istream& in, const char* what) {
    T value{};
    if (!(in >> value)) {
        throw ConfigError(std::string("policy file: cannot read ") + what);
    }
    return value;
}

} // namespace

QTable::QTable(int category, int sigma, int action_step, int max_action, double epsilon_decay)
    : category_{category},
      sigma_{sigma},
      action_step_{action_step},
      max_action_{max_action},
      action_count_{action_step > 0 ? 2 * (max_action / action_step) + 1 : 0},
      epsilon_decay_{epsilon_decay} {
    if (sigma < 0 || action_step < 1 || max_action < 0 || max_action % action_step != 0) {
        throw ConfigError("QTable: invalid shape");
    }
    values_.assign(2 * static_cast<std::size_t>(sigma + 1) * static_cast<std::size_t>(action_count_), 0.0);
}

double QTable::epsilon() const noexcept {
    return std::max(0.0, 1.0 - epsilon_decay_ * static_cast<double>(update_count_));
}

int QTable::action_index(int action) const {
    if (action % action_step_ != 0 || action < -max_action_ || action > max_action_) {
        throw InvalidActionError("action " + std::to_string(action) + " outside the table's action set");
    }
    return (action + max_action_) / action_step_;
}

std::size_t QTable::offset(Period p, int vehicles) const {
    return (static_cast<std::size_t>(p) * static_cast<std::size_t>(sigma_ + 1) + static_cast<std::size_t>(vehicles)) *
           static_cast<std::size_t>(action_count_);
}

std::span<double> QTable::row(Period p, int vehicles) {
    return {values_.data() + offset(p, vehicles), static_cast<std::size_t>(action_count_)};
}

std::span<const double> QTable::row(Period p, int vehicles) const {
    return {values_.data() + offset(p, vehicles), static_cast<std::size_t>(action_count_)};
}

double& QTable::at(Period p, int vehicles, int action_index) {
    return values_[offset(p, vehicles) + static_cast<std::size_t>(action_index)];
}

double QTable::at(Period p, int vehicles, int action_index) const {
    return values_[offset(p, vehicles) + static_cast<std::size_t>(action_index)];
}

double QTable::max_value(Period p, int vehicles) const {
    const auto r = row(p, vehicles);
    return *std::max_element(r.begin(), r.end());
}

QTable& PolicySet::table(int m) {
    if (m < 1 || static_cast<std::size_t>(m) > tables.size()) {
        throw IndexError("no table for category " + std::to_string(m));
    }
    return tables[static_cast<std::size_t>(m - 1)];
}

const QTable& PolicySet::table(int m) const {
    if (m < 1 || static_cast<std::size_t>(m) > tables.size()) {
        throw IndexError("no table for category " + std::to_string(m));
    }
    return tables[static_cast<std::size_t>(m - 1)];
}

int PolicySet::greedy_action(int m, Period p, int vehicles) const {
    const QTable& q = table(m);
    const auto r = q.row(p, vehicles);
    int best = 0;
    for (int i = 1; i < q.action_count(); ++i) {
        const double v = r[static_cast<std::size_t>(i)];
        const double b = r[static_cast<std::size_t>(best)];
        const int ai = std::abs(q.action_value(i));
        const int ab = std::abs(q.action_value(best));
        if (v > b || (v == b && ai < ab)) {
            best = i;
        }
    }
    return q.action_value(best);
}

PolicySet empty_policies(const ScenarioConfig& scenario, std::uint64_t seed) {
    PolicySet set;
    set.M = scenario.M;
    set.sigma = scenario.sigma;
    set.beta = scenario.beta;
    set.seed = seed;
    for (int m = 1; m <= scenario.M; ++m) {
        set.tables.emplace_back(m, scenario.sigma, scenario.action_step, scenario.max_action, scenario.epsilon_decay);
    }
    return set;
}

int select_action(const QTable& q, double epsilon, Period p, int vehicles, RandomSource& rng) {
    const auto n = static_cast<std::uint64_t>(q.action_count());
    if (epsilon > 0.0 && rng.uniform() < epsilon) {
        return q.action_value(static_cast<int>(rng.uniform_index(n)));
    }
    const auto r = q.row(p, vehicles);
    double best = r[0];
    int ties = 1;
    for (std::size_t i = 1; i < r.size(); ++i) {
        if (r[i] > best) {
            best = r[i];
            ties = 1;
        } else if (r[i] == best) {
            ++ties;
        }
    }
    auto pick = ties == 1 ? 0 : static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(ties)));
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (r[i] == best && pick-- == 0) {
            return q.action_value(static_cast<int>(i));
        }
    }
    return q.action_value(0); // unreachable
}

int select_action(const QTable& q, Period p, int vehicles, RandomSource& rng) {
    return select_action(q, q.epsilon(), p, vehicles, rng);
}

void q_update(QTable& q, const QState& s, int action, double reward, const QState& next,
              const ScenarioConfig& scenario) {
    double& value = q.at(s.period, s.vehicles, q.action_index(action));
    const double target = reward + scenario.gamma * q.max_value(next.period, next.vehicles);
    value += scenario.learning_rate * (target - value);
    q.set_update_count(q.update_count() + 1);
}

PolicySet train(const ScenarioConfig& scenario, std::uint64_t seed, const TrainOptions& options) {
    scenario.validate();
    PolicySet policies = empty_policies(scenario, seed);
    if (scenario.train_days == 0) {
        return policies;
    }

    RandomSource rng{seed};
    auto areas = initial_network(scenario);
    const auto demands = hourly_demands(scenario);
    run_window(areas, demands, scenario.sigma, Period::morning, rng);

    const double horizon = 1.0 / (1.0 - scenario.gamma);
    double reward_bound = 0.0;
    double day_reward = 0.0;
    const long epochs = 2 * scenario.train_days;
    for (long epoch = 0; epoch < epochs; ++epoch) {
        const Period upcoming = epoch % 2 == 0 ? Period::evening : Period::morning;
        const auto p = static_cast<std::size_t>(upcoming);
        for (auto& area : areas) {
            const auto c = static_cast<std::size_t>(area.category - 1);
            const CategoryProfile& profile = scenario.categories[c];
            QTable& q = policies.tables[c];

            const QState state{upcoming, area.vehicles};
            const int action = select_action(q, upcoming, area.vehicles, rng);
            area = apply_action(area, action, scenario);
            const int after = area.vehicles;
            for (int h = 0; h < kHoursPerWindow; ++h) {
                step_hour(area, demands[c][p], scenario.sigma, rng);
            }
            const double reward =
                fair_local_reward(action, area.window_failures, after, profile, scenario, upcoming).total;
            q_update(q, state, action, reward, {other(upcoming), area.vehicles}, scenario);

            reward_bound = std::max(reward_bound, std::fabs(reward));
            const double updated = q.at(state.period, state.vehicles, q.action_index(action));
            if (!(std::fabs(updated) <= reward_bound * horizon * (1.0 + 1e-9) + 1e-9)) {
                throw std::logic_error("Q-value escaped the reward bound: " + std::to_string(updated));
            }
            day_reward += reward;
        }
        if (epoch % 2 == 1) {
            if (options.on_day) {
                options.on_day(epoch / 2, day_reward);
            }
            day_reward = 0.0;
        }
    }
    return policies;
}

EvalReport evaluate(const PolicySet& policies, const ScenarioConfig& scenario, std::uint64_t seed,
                    EvalTrace* trace_out, TraceWriter* writer) {
    scenario.validate();
    if (policies.M != scenario.M || policies.sigma != scenario.sigma ||
        policies.tables.size() != static_cast<std::size_t>(scenario.M)) {
        throw MismatchError("policy set (M=" + std::to_string(policies.M) + ", sigma=" +
                            std::to_string(policies.sigma) + ") does not match scenario (M=" +
                            std::to_string(scenario.M) + ", sigma=" + std::to_string(scenario.sigma) + ")");
    }
    for (const auto& t : policies.tables) {
        if (t.action_step() != scenario.action_step || t.max_action() != scenario.max_action) {
            throw MismatchError("policy action set does not match scenario");
        }
    }

    RandomSource rng{seed};
    auto areas = initial_network(scenario);
    const auto demands = hourly_demands(scenario);
    run_window(areas, demands, scenario.sigma, Period::morning, rng);

    EvalTrace trace;
    trace.category_failures.assign(static_cast<std::size_t>(scenario.M), 0);
    trace.category_attempts.assign(static_cast<std::size_t>(scenario.M), 0);
    const long epochs = 2 * scenario.eval_days;
    trace.epochs.reserve(static_cast<std::size_t>(epochs));
    for (long epoch = 0; epoch < epochs; ++epoch) {
        const Period upcoming = epoch % 2 == 0 ? Period::evening : Period::morning;
        const auto p = static_cast<std::size_t>(upcoming);
        EpochCosts costs;
        for (auto& area : areas) {
            const auto c = static_cast<std::size_t>(area.category - 1);
            const CategoryProfile& profile = scenario.categories[c];
            const int before = area.vehicles;
            const int action = select_action(policies.tables[c], 0.0, upcoming, before, rng);
            area = apply_action(area, action, scenario);
            const int after = area.vehicles;
            for (int h = 0; h < kHoursPerWindow; ++h) {
                step_hour(area, demands[c][p], scenario.sigma, rng);
            }
            costs.rebalancing += scenario.alpha * profile.phi * rebalance_indicator(action);
            costs.vehicles += after;
            const double mu = expected_demand(profile, upcoming);
            if (mu > 0.0) {
                costs.failure_rate += static_cast<double>(area.window_failures) / mu;
            }
            trace.category_failures[c] += area.window_failures;
            trace.category_attempts[c] += area.window_demand;
            if (writer != nullptr) {
                writer->write({epoch / 2, epoch % 2 == 0 ? 11 : 23, area.area_id, area.category, before, action, after,
                               area.window_failures, area.window_demand});
            }
        }
        trace.epochs.push_back(costs);
    }

    EvalReport report = make_report(trace, scenario, seed);
    if (trace_out != nullptr) {
        *trace_out = std::move(trace);
    }
    return report;
}

void save_policies(const PolicySet& policies, std::ostream& out) {
    out << kPolicyMagic << " v" << kPolicyFormatVersion << '\n';
    const int step = policies.tables.empty() ? 5 : policies.tables.front().action_step();
    const int max_action = policies.tables.empty() ? 30 : policies.tables.front().max_action();
    const double decay = policies.tables.empty() ? 0.0 : policies.tables.front().epsilon_decay();
    out << "M " << policies.M << " sigma " << policies.sigma << " action_step " << step << " action_max "
        << max_action << " beta " << hex_real(policies.beta) << " seed " << policies.seed << " eps_decay "
        << hex_real(decay) << '\n';
    for (const auto& q : policies.tables) {
        out << "table " << q.category() << " updates " << q.update_count() << '\n';
        for (const Period p : {Period::morning, Period::evening}) {
            for (int v = 0; v <= q.sigma(); ++v) {
                const auto r = q.row(p, v);
                for (std::size_t i = 0; i < r.size(); ++i) {
                    out << (i == 0 ? "" : " ") << hex_real(r[i]);
                }
                out << '\n';
            }
        }
    }
}

PolicySet load_policies(std::istream& in) {
    expect_token(in, kPolicyMagic);
    expect_token(in, "v" + std::to_string(kPolicyFormatVersion));
    PolicySet set;
    expect_token(in, "M");
    set.M = read_value<int>(in, "M");
    expect_token(in, "sigma");
    set.sigma = read_value<int>(in, "sigma");
    expect_token(in, "action_step");
    const int step = read_value<int>(in, "action_step");
    expect_token(in, "action_max");
    const int max_action = read_value<int>(in, "action_max");
    expect_token(in, "beta");
    set.beta = parse_hex_real(read_value<std::string>(in, "beta"));
    expect_token(in, "seed");
    set.seed = read_value<std::uint64_t>(in, "seed");
    expect_token(in, "eps_decay");
    const double decay = parse_hex_real(read_value<std::string>(in, "eps_decay"));
    if (set.M < 0 || set.M > 64 || set.sigma < 0) {
        throw ConfigError("policy file: implausible header");
    }
    for (int m = 1; m <= set.M; ++m) {
        expect_token(in, "table");
        if (read_value<int>(in, "table index") != m) {
            throw ConfigError("policy file: tables out of order");
        }
        expect_token(in, "updates");
        QTable q(m, set.sigma, step, max_action, decay);
        q.set_update_count(read_value<std::uint64_t>(in, "update count"));
        for (double& v : q.values()) {
            v = parse_hex_real(read_value<std::string>(in, "Q value"));
        }
        set.tables.push_back(std::move(q));
    }
    return set;
}

} // namespace fairbalance
