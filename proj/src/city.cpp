#include "fairbalance/city.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "fairbalance/error.hpp"

namespace fairbalance {

namespace {

struct CategoryRow {
    int nodes;
    DemandRates morning;
    DemandRates evening;
};

// Node counts and half-day (arrival, departure) rates per scenario,
// ordered from most peripheral to most central.
const std::map<int, std::vector<CategoryRow>>& builtin_rows() {
    static const std::map<int, std::vector<CategoryRow>> rows{
        {2, {{60, {0.3, 2}, {1.5, 0.3}}, {10, {13.8, 7}, {10, 13.8}}}},
        {3, {{60, {0.3, 2}, {1.5, 0.3}}, {30, {3.3, 1.5}, {1.5, 3.3}}, {10, {13.8, 7}, {10, 13.8}}}},
        {4,
         {{60, {0.3, 2}, {1.5, 0.3}},
          {40, {0.45, 3}, {2.25, 0.45}},
          {20, {9.2, 5.1}, {6.6, 9.2}},
          {10, {13.8, 7}, {10, 13.8}}}},
        {5,
         {{60, {0.3, 2}, {1.5, 0.3}},
          {40, {0.45, 3}, {2.25, 0.45}},
          {30, {3.3, 1.5}, {1.5, 3.3}},
          {20, {9.2, 5.1}, {6.6, 9.2}},
          {10, {13.8, 7}, {10, 13.8}}}},
    };
    return rows;
}

// (phi, chi) per category. M = 5 is the reference array pair; smaller M keep
// the endpoints and mirror symmetry of chi about the middle category.
const std::map<int, std::vector<std::pair<double, double>>>& builtin_weights() {
    static const std::map<int, std::vector<std::pair<double, double>>> weights{
        {2, {{1.0, 1.0}, {0.1, -1.0}}},
        {3, {{1.0, 1.0}, {0.4, 0.0}, {0.1, -1.0}}},
        {4, {{1.0, 1.0}, {0.8, 0.5}, {0.3, -0.5}, {0.1, -1.0}}},
        {5, {{1.0, 1.0}, {0.8, 0.5}, {0.4, 0.4}, {0.3, -0.5}, {0.1, -1.0}}},
    };
    return weights;
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_real(std::string_view text, std::string_view key) {
    text = trim(text);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value)) {
        throw ConfigError("invalid real value '" + std::string(text) + "' for key " + std::string(key));
    }
    return value;
}

long parse_integer(std::string_view text, std::string_view key) {
    text = trim(text);
    long value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw ConfigError("invalid integer value '" + std::string(text) + "' for key " + std::string(key));
    }
    return value;
}

DemandRates parse_rates(std::string_view text, std::string_view key) {
    const auto comma = text.find(',');
    if (comma == std::string_view::npos || text.find(',', comma + 1) != std::string_view::npos) {
        throw ConfigError("key " + std::string(key) + " expects two comma-separated reals");
    }
    return {parse_real(text.substr(0, comma), key), parse_real(text.substr(comma + 1), key)};
}

std::vector<std::pair<std::string, std::string>> parse_lines(std::string_view text) {
    std::vector<std::pair<std::string, std::string>> entries;
    std::map<std::string, int> seen;
    int line_no = 0;
    while (!text.empty()) {
        const auto eol = text.find('\n');
        std::string_view line = text.substr(0, eol);
        text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        }
        std::string key(trim(line.substr(0, eq)));
        std::string value(trim(line.substr(eq + 1)));
        if (key.empty()) {
            throw ConfigError("line " + std::to_string(line_no) + ": empty key");
        }
        if (seen.count(key) != 0) {
            throw ConfigError("duplicate key " + key);
        }
        seen[key] = line_no;
        entries.emplace_back(std::move(key), std::move(value));
    }
    return entries;
}

// Splits "prefix.<m>" and returns m, or nullopt when the key has another prefix.
std::optional<int> indexed_key(std::string_view key, std::string_view prefix) {
    if (key.size() <= prefix.size() || key.substr(0, prefix.size()) != prefix) {
        return std::nullopt;
    }
    return static_cast<int>(parse_integer(key.substr(prefix.size()), key));
}

bool strictly_decreasing(const std::vector<CategoryProfile>& cats, double CategoryProfile::*field) {
    for (std::size_t i = 1; i < cats.size(); ++i) {
        if (!(cats[i].*field < cats[i - 1].*field)) {
            return false;
        }
    }
    return true;
}

} // namespace

std::string_view to_string(Period p) noexcept {
    return p == Period::morning ? "morning" : "evening";
}

int ScenarioConfig::total_nodes() const noexcept {
    int total = 0;
    for (const auto& c : categories) {
        total += c.node_count;
    }
    return total;
}

std::vector<int> ScenarioConfig::actions() const {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(action_count()));
    for (int i = 0; i < action_count(); ++i) {
        out.push_back(action_value(i));
    }
    return out;
}

bool ScenarioConfig::is_valid_action(int action) const noexcept {
    return action_step > 0 && action % action_step == 0 && action >= -max_action && action <= max_action;
}

int ScenarioConfig::action_index(int action) const {
    if (!is_valid_action(action)) {
        throw InvalidActionError("action " + std::to_string(action) + " is not a multiple of " +
                                 std::to_string(action_step) + " within +-" + std::to_string(max_action));
    }
    return (action + max_action) / action_step;
}

const CategoryProfile& ScenarioConfig::category(int m) const {
    if (m < 1 || m > M || static_cast<std::size_t>(m) > categories.size()) {
        throw IndexError("category index " + std::to_string(m) + " outside [1, " + std::to_string(M) + "]");
    }
    return categories[static_cast<std::size_t>(m - 1)];
}

void ScenarioConfig::validate() const {
    auto fail = [](const std::string& what) { throw ConfigError(what); };
    if (M < 1) {
        fail("M must be at least 1");
    }
    if (categories.size() != static_cast<std::size_t>(M)) {
        fail("expected " + std::to_string(M) + " categories, found " + std::to_string(categories.size()));
    }
    for (int m = 1; m <= M; ++m) {
        const auto& c = categories[static_cast<std::size_t>(m - 1)];
        const std::string tag = "category " + std::to_string(m) + ": ";
        if (c.index != m) {
            fail(tag + "index mismatch");
        }
        if (c.node_count < 1) {
            fail(tag + "node count must be positive");
        }
        for (const auto* r : {&c.morning_rates, &c.evening_rates}) {
            if (!(r->arrival >= 0.0) || !(r->departure >= 0.0)) {
                fail(tag + "rates must be nonnegative");
            }
        }
        if (!(c.phi >= 0.0 && c.phi <= 1.0)) {
            fail(tag + "phi outside [0, 1]");
        }
        if (!(c.chi >= -1.0 && c.chi <= 1.0)) {
            fail(tag + "chi outside [-1, 1]");
        }
        if (c.zeta_morning != 0.5 * c.morning_rates.arrival || c.zeta_evening != 0.5 * c.evening_rates.arrival) {
            fail(tag + "zeta must equal half the period's arrival rate");
        }
    }
    if (categories.front().phi != 1.0 || !strictly_decreasing(categories, &CategoryProfile::phi)) {
        fail("phi must be strictly decreasing with phi(1) = 1");
    }
    if (categories.front().chi != 1.0 || !strictly_decreasing(categories, &CategoryProfile::chi) ||
        (M >= 2 && categories.back().chi != -1.0)) {
        fail("chi must be strictly decreasing with chi(1) = 1 and chi(M) = -1");
    }
    if (!(alpha > 0.0) || !(xi > 0.0)) {
        fail("alpha and xi must be positive");
    }
    if (!(beta >= 0.0) || !std::isfinite(beta)) {
        fail("beta must be nonnegative");
    }
    if (!(gamma >= 0.0 && gamma < 1.0)) {
        fail("gamma must lie in [0, 1)");
    }
    if (sigma < 1) {
        fail("sigma must be positive");
    }
    if (!(learning_rate > 0.0 && learning_rate <= 1.0)) {
        fail("learning rate must lie in (0, 1]");
    }
    if (!(epsilon_decay > 0.0)) {
        fail("epsilon decay must be positive");
    }
    if (train_days < 0 || eval_days < 1) {
        fail("train_days must be >= 0 and eval_days >= 1");
    }
    if (!(cost_weights.rebalancing > 0.0) || !(cost_weights.failures > 0.0) || !(cost_weights.vehicles > 0.0)) {
        fail("cost weights must be positive");
    }
    if (action_step < 1 || max_action < 0 || max_action % action_step != 0) {
        fail("max_action must be a nonnegative multiple of a positive action_step");
    }
}

ScenarioConfig build_scenario(int M) {
    const auto& rows = builtin_rows();
    const auto it = rows.find(M);
    if (it == rows.end()) {
        throw ConfigError("unsupported scenario M = " + std::to_string(M) + " (built-ins: 2, 3, 4, 5)");
    }
    const auto& weights = builtin_weights().at(M);
    ScenarioConfig config;
    config.M = M;
    for (int m = 1; m <= M; ++m) {
        const auto& row = it->second[static_cast<std::size_t>(m - 1)];
        CategoryProfile profile;
        profile.index = m;
        profile.node_count = row.nodes;
        profile.morning_rates = row.morning;
        profile.evening_rates = row.evening;
        profile.phi = weights[static_cast<std::size_t>(m - 1)].first;
        profile.chi = weights[static_cast<std::size_t>(m - 1)].second;
        profile.refresh_zeta();
        config.categories.push_back(profile);
    }
    return config;
}

double phi(const ScenarioConfig& config, int m) {
    return config.category(m).phi;
}

double chi(const ScenarioConfig& config, int m) {
    return config.category(m).chi;
}

bool overrides_set_m(std::string_view text) {
    for (const auto& [key, value] : parse_lines(text)) {
        if (key == "M") {
            return true;
        }
    }
    return false;
}

ScenarioConfig parse_scenario_overrides(std::string_view text, const std::optional<ScenarioConfig>& base) {
    const auto entries = parse_lines(text);

    ScenarioConfig config;
    const auto m_entry =
        std::find_if(entries.begin(), entries.end(), [](const auto& e) { return e.first == "M"; });
    if (m_entry != entries.end()) {
        const long M = parse_integer(m_entry->second, "M");
        if (M < 1 || M > 64) {
            throw ConfigError("M out of range: " + std::to_string(M));
        }
        if (builtin_rows().count(static_cast<int>(M)) != 0) {
            config = build_scenario(static_cast<int>(M));
        } else {
            config.M = static_cast<int>(M);
            config.categories.resize(static_cast<std::size_t>(M));
            for (int m = 1; m <= M; ++m) {
                config.categories[static_cast<std::size_t>(m - 1)].index = m;
            }
        }
    } else if (base) {
        config = *base;
    } else {
        throw ConfigError("override file does not set M and no base scenario was given");
    }

    auto profile_for = [&](const std::string& key, std::string_view prefix) -> CategoryProfile* {
        const auto m = indexed_key(key, prefix);
        if (!m) {
            return nullptr;
        }
        if (*m < 1 || *m > config.M) {
            throw ConfigError("key " + key + " refers to a category outside [1, " + std::to_string(config.M) + "]");
        }
        return &config.categories[static_cast<std::size_t>(*m - 1)];
    };

    for (const auto& [key, value] : entries) {
        if (key == "M") {
            continue;
        }
        if (auto* p = profile_for(key, "nodes.")) {
            p->node_count = static_cast<int>(parse_integer(value, key));
        } else if (auto* p = profile_for(key, "rates.morning.")) {
            p->morning_rates = parse_rates(value, key);
        } else if (auto* p = profile_for(key, "rates.evening.")) {
            p->evening_rates = parse_rates(value, key);
        } else if (auto* p = profile_for(key, "phi.")) {
            p->phi = parse_real(value, key);
        } else if (auto* p = profile_for(key, "chi.")) {
            p->chi = parse_real(value, key);
        } else if (key == "alpha") {
            config.alpha = parse_real(value, key);
        } else if (key == "xi") {
            config.xi = parse_real(value, key);
        } else if (key == "beta") {
            config.beta = parse_real(value, key);
        } else if (key == "gamma") {
            config.gamma = parse_real(value, key);
        } else if (key == "sigma") {
            config.sigma = static_cast<int>(parse_integer(value, key));
        } else if (key == "lr") {
            config.learning_rate = parse_real(value, key);
        } else if (key == "eps_decay") {
            config.epsilon_decay = parse_real(value, key);
        } else if (key == "train_days") {
            config.train_days = parse_integer(value, key);
        } else if (key == "eval_days") {
            config.eval_days = parse_integer(value, key);
        } else if (key == "omega1") {
            config.cost_weights.rebalancing = parse_real(value, key);
        } else if (key == "omega2") {
            config.cost_weights.failures = parse_real(value, key);
        } else if (key == "omega3") {
            config.cost_weights.vehicles = parse_real(value, key);
        } else if (key == "action_step") {
            config.action_step = static_cast<int>(parse_integer(value, key));
        } else if (key == "action_max") {
            config.max_action = static_cast<int>(parse_integer(value, key));
        } else {
            throw ConfigError("unknown key " + key);
        }
    }
    for (auto& c : config.categories) {
        c.refresh_zeta();
    }
    config.validate();
    return config;
}

ScenarioConfig load_scenario_file(const std::filesystem::path& path, const std::optional<ScenarioConfig>& base) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open scenario file " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario_overrides(buffer.str(), base);
}

} // namespace fairbalance
