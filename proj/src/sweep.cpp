#include "fairbalance/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "json.hpp"

#include "fairbalance/error.hpp"

namespace fairbalance {

namespace {

constexpr long kDeskTrainDays = 20'000;
constexpr double kDeskDecayFactor = 5.0;
constexpr int kMinResultColumns = 5;

using RunKey = std::tuple<int, long, std::uint64_t>;

long beta_milli(double beta) {
    return std::lround(beta * 1000.0);
}

RunKey key_of(const EvalReport& r) {
    return {r.M, beta_milli(r.beta), r.seed};
}

double round_grid(double v) {
    return std::round(v * 1e9) / 1e9;
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view text, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    for (;;) {
        const auto pos = text.find(sep, start);
        parts.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) {
            return parts;
        }
        start = pos + 1;
    }
}

template <typename T>
std::optional<T> parse_number(std::string_view text) {
    text = trim(text);
    T value{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
        return std::nullopt;
    }
    return value;
}

double require_real(std::string_view text, const char* what) {
    const auto v = parse_number<double>(text);
    if (!v || !std::isfinite(*v)) {
        throw ConfigError(std::string("invalid ") + what + " '" + std::string(trim(text)) + "'");
    }
    return *v;
}

std::uint64_t require_seed(std::string_view text) {
    const auto v = parse_number<std::uint64_t>(text);
    if (!v) {
        throw ConfigError("invalid seed '" + std::string(trim(text)) + "'");
    }
    return *v;
}

std::optional<EvalReport> parse_result_row(std::string_view line) {
    const auto fields = split(trim(line), ',');
    if (fields.size() < 8) {
        return std::nullopt;
    }
    EvalReport r;
    const auto beta = parse_number<double>(fields[0]);
    const auto seed = parse_number<std::uint64_t>(fields[1]);
    const auto M = parse_number<int>(fields[2]);
    const auto g = parse_number<double>(fields[3]);
    const auto c1 = parse_number<double>(fields[4]);
    const auto c2 = parse_number<double>(fields[5]);
    const auto c3 = parse_number<double>(fields[6]);
    const auto cost = parse_number<double>(fields[7]);
    if (!beta || !seed || !M || !g || !c1 || !c2 || !c3 || !cost || *M < 1 ||
        fields.size() < 8 + static_cast<std::size_t>(*M)) {
        return std::nullopt;
    }
    r.beta = *beta;
    r.seed = *seed;
    r.M = *M;
    r.gini = *g;
    r.C1 = *c1;
    r.C2 = *c2;
    r.C3 = *c3;
    r.global_cost = *cost;
    for (int m = 0; m < *M; ++m) {
        const auto x = parse_number<double>(fields[8 + static_cast<std::size_t>(m)]);
        if (!x) {
            return std::nullopt;
        }
        r.failure_prob.push_back(*x);
    }
    return r;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file_atomically(const std::filesystem::path& path, const std::string& contents) {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot write " + tmp);
        }
        out << contents;
        if (!out) {
            throw std::runtime_error("write failed for " + tmp);
        }
    }
    std::filesystem::rename(tmp, path);
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    return out;
}

nlohmann::json optional_pct(double value, double base) {
    if (base == 0.0) {
        return nullptr;
    }
    return 100.0 * (value - base) / base;
}

nlohmann::json summarize_scenario(int M, std::span<const BetaSummary> cells, const std::vector<bool>& efficient) {
    nlohmann::json out;
    out["M"] = M;
    const auto base_it = std::find_if(cells.begin(), cells.end(), [](const auto& c) { return c.beta == 0.0; });
    auto cell_json = [](const BetaSummary& c) {
        return nlohmann::json{{"beta", c.beta}, {"runs", c.runs},       {"gini", c.gini}, {"global_cost", c.global_cost},
                              {"C1", c.C1},     {"C2", c.C2},           {"C3", c.C3}};
    };
    out["baseline"] = base_it == cells.end() ? nlohmann::json(nullptr) : cell_json(*base_it);

    nlohmann::json per_beta = nlohmann::json::array();
    std::optional<std::size_t> best;
    double best_ratio = -1.0;
    bool best_unbounded = false;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        nlohmann::json row = cell_json(cells[i]);
        row["efficient"] = static_cast<bool>(efficient[i]);
        if (base_it != cells.end()) {
            row["gini_delta_pct"] = optional_pct(cells[i].gini, base_it->gini);
            row["cost_delta_pct"] = optional_pct(cells[i].global_cost, base_it->global_cost);
            if (cells[i].beta != 0.0 && base_it->gini > 0.0 && base_it->global_cost != 0.0) {
                const double dg = 100.0 * (cells[i].gini - base_it->gini) / base_it->gini;
                const double dc = 100.0 * (cells[i].global_cost - base_it->global_cost) / base_it->global_cost;
                if (dg < 0.0) {
                    // Ratio of Gini decrease to cost increase; a cheaper and fairer
                    // cell dominates the baseline outright.
                    const bool unbounded = dc <= 0.0;
                    const double ratio = unbounded ? 0.0 : -dg / dc;
                    const bool better = unbounded ? (!best_unbounded || -dg > best_ratio)
                                                  : (!best_unbounded && ratio > best_ratio);
                    if (better) {
                        best = i;
                        best_unbounded = unbounded;
                        best_ratio = unbounded ? -dg : ratio;
                    }
                }
            }
        }
        per_beta.push_back(std::move(row));
    }
    out["per_beta"] = std::move(per_beta);
    if (best) {
        const auto& c = cells[*best];
        out["best_ratio"] = {
            {"beta", c.beta},
            {"gini_delta_pct", 100.0 * (c.gini - base_it->gini) / base_it->gini},
            {"cost_delta_pct", 100.0 * (c.global_cost - base_it->global_cost) / base_it->global_cost},
            {"ratio", best_unbounded ? nlohmann::json(nullptr) : nlohmann::json(best_ratio)},
        };
    } else {
        out["best_ratio"] = nullptr;
    }
    return out;
}

} // namespace

std::vector<double> default_betas() {
    std::vector<double> betas;
    for (int i = 0; i <= 10; ++i) {
        betas.push_back(round_grid(0.1 * i));
    }
    return betas;
}

std::vector<double> parse_beta_list(std::string_view text) {
    text = trim(text);
    std::vector<double> betas;
    if (text.empty()) {
        return betas;
    }
    if (text.find(':') != std::string_view::npos) {
        const auto parts = split(text, ':');
        if (parts.size() != 3) {
            throw ConfigError("beta range must be start:stop:step");
        }
        const double start = require_real(parts[0], "beta start");
        const double stop = require_real(parts[1], "beta stop");
        const double step = require_real(parts[2], "beta step");
        if (!(step > 0.0) || stop < start) {
            throw ConfigError("beta range needs step > 0 and stop >= start");
        }
        const auto n = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
        for (long i = 0; i < n; ++i) {
            betas.push_back(round_grid(start + static_cast<double>(i) * step));
        }
    } else {
        for (const auto part : split(text, ',')) {
            if (trim(part).empty()) {
                continue;
            }
            betas.push_back(round_grid(require_real(part, "beta")));
        }
    }
    for (const double b : betas) {
        if (b < 0.0) {
            throw ConfigError("beta values must be nonnegative");
        }
    }
    return betas;
}

std::vector<std::uint64_t> parse_seed_list(std::string_view text) {
    text = trim(text);
    std::vector<std::uint64_t> seeds;
    if (text.empty()) {
        return seeds;
    }
    if (text.find(',') != std::string_view::npos) {
        for (const auto part : split(text, ',')) {
            if (!trim(part).empty()) {
                seeds.push_back(require_seed(part));
            }
        }
    } else if (const auto dots = text.find(".."); dots != std::string_view::npos) {
        const auto first = require_seed(text.substr(0, dots));
        const auto last = require_seed(text.substr(dots + 2));
        if (last < first) {
            throw ConfigError("seed range must be ascending");
        }
        for (auto s = first; s <= last; ++s) {
            seeds.push_back(s);
        }
    } else {
        const auto n = require_seed(text);
        for (std::uint64_t s = 0; s < n; ++s) {
            seeds.push_back(s);
        }
    }
    return seeds;
}

std::string run_id(int M, double beta, std::uint64_t seed) {
    return "M" + std::to_string(M) + "_b" + std::to_string(beta_milli(beta)) + "_s" + std::to_string(seed);
}

std::uint64_t evaluation_seed(std::uint64_t seed) noexcept {
    return derive_seed(seed, 1);
}

ScenarioConfig resolve_scenario(const SweepSpec& spec, int M, double beta) {
    ScenarioConfig config;
    if (spec.config) {
        std::optional<ScenarioConfig> base;
        if (M >= 2 && M <= 5) {
            base = build_scenario(M);
        }
        config = load_scenario_file(*spec.config, base);
    } else {
        config = build_scenario(M);
    }
    if (spec.desk) {
        config.train_days = kDeskTrainDays;
        config.epsilon_decay *= kDeskDecayFactor;
    }
    if (spec.train_days) {
        config.train_days = *spec.train_days;
    }
    if (!(spec.scale > 0.0)) {
        throw ConfigError("scale must be positive");
    }
    config.train_days = std::llround(spec.scale * static_cast<double>(config.train_days));
    if (spec.eval_days) {
        config.eval_days = *spec.eval_days;
    }
    config.beta = beta;
    config.validate();
    return config;
}

PolicySet train_with_curve(const ScenarioConfig& scenario, std::uint64_t seed, long window,
                           std::vector<CurvePoint>& curve) {
    if (window < 1) {
        throw ConfigError("learning-curve window must be at least one day");
    }
    double acc = 0.0;
    long in_window = 0;
    TrainOptions options;
    options.on_day = [&](long day, double reward) {
        acc += reward;
        if (++in_window == window) {
            curve.push_back({day + 1, acc / static_cast<double>(window)});
            acc = 0.0;
            in_window = 0;
        }
    };
    return train(scenario, seed, options);
}

std::vector<CurvePoint> emit_learning_curve(const ScenarioConfig& scenario, std::uint64_t seed, long window,
                                            std::ostream* csv) {
    std::vector<CurvePoint> curve;
    train_with_curve(scenario, seed, window, curve);
    if (csv != nullptr) {
        write_curve_csv(curve, *csv);
    }
    return curve;
}

void write_curve_csv(std::span<const CurvePoint> curve, std::ostream& out) {
    out << "day,mean_reward\n";
    for (const auto& p : curve) {
        out << p.day << ',' << format_real(p.mean_reward) << '\n';
    }
}

std::vector<BetaSummary> seed_means(std::span<const EvalReport> reports) {
    std::map<std::pair<int, long>, BetaSummary> cells;
    for (const auto& r : reports) {
        auto& c = cells[{r.M, beta_milli(r.beta)}];
        c.M = r.M;
        c.beta = r.beta;
        ++c.runs;
        c.gini += r.gini;
        c.global_cost += r.global_cost;
        c.C1 += r.C1;
        c.C2 += r.C2;
        c.C3 += r.C3;
    }
    std::vector<BetaSummary> out;
    for (auto& [key, c] : cells) {
        const auto n = static_cast<double>(c.runs);
        c.gini /= n;
        c.global_cost /= n;
        c.C1 /= n;
        c.C2 /= n;
        c.C3 /= n;
        out.push_back(c);
    }
    return out;
}

std::vector<EvalReport> read_results_csv(std::istream& in) {
    std::vector<EvalReport> reports;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (header) {
            header = false;
            if (line.rfind("beta,", 0) == 0) {
                continue;
            }
        }
        if (auto r = parse_result_row(line)) {
            reports.push_back(std::move(*r));
        }
    }
    return reports;
}

SweepResult run_sweep(const SweepSpec& spec) {
    if (spec.scenarios.empty() || spec.betas.empty() || spec.seeds.empty()) {
        throw ConfigError("empty sweep");
    }
    if (spec.workers < 1) {
        throw ConfigError("workers must be at least 1");
    }
    if (spec.curve_window && *spec.curve_window < 1) {
        throw ConfigError("learning-curve window must be at least one day");
    }

    std::vector<int> scenario_ms = spec.scenarios;
    if (spec.config) {
        const std::string text = read_text(*spec.config);
        if (overrides_set_m(text)) {
            scenario_ms = {load_scenario_file(*spec.config, std::nullopt).M};
        }
    }
    std::sort(scenario_ms.begin(), scenario_ms.end());
    scenario_ms.erase(std::unique(scenario_ms.begin(), scenario_ms.end()), scenario_ms.end());

    // Resolve every cell up front so configuration errors surface before any work.
    std::map<std::pair<int, long>, ScenarioConfig> configs;
    for (const int M : scenario_ms) {
        for (const double beta : spec.betas) {
            configs.emplace(std::pair{M, beta_milli(beta)}, resolve_scenario(spec, M, beta));
        }
    }

    std::filesystem::create_directories(spec.out_dir);
    const auto results_path = spec.out_dir / "results.csv";

    std::vector<EvalReport> reports;
    std::set<RunKey> done;
    if (std::filesystem::exists(results_path)) {
        std::ifstream in(results_path);
        for (auto& r : read_results_csv(in)) {
            if (done.insert(key_of(r)).second) {
                reports.push_back(std::move(r));
            }
        }
    }

    struct Task {
        int M;
        double beta;
        std::uint64_t seed;
    };
    std::vector<Task> tasks;
    std::set<RunKey> planned;
    for (const int M : scenario_ms) {
        for (const double beta : spec.betas) {
            for (const auto seed : spec.seeds) {
                const RunKey key{M, beta_milli(beta), seed};
                if (done.count(key) == 0 && planned.insert(key).second) {
                    tasks.push_back({M, beta, seed});
                }
            }
        }
    }

    int max_m = kMinResultColumns;
    for (const int M : scenario_ms) {
        max_m = std::max(max_m, M);
    }
    for (const auto& r : reports) {
        max_m = std::max(max_m, r.M);
    }

    // Rewrite what survived (drops any torn line) before appending.
    {
        std::string contents = report_csv_header(max_m) + '\n';
        for (const auto& r : reports) {
            contents += report_csv_row(r, max_m) + '\n';
        }
        write_file_atomically(results_path, contents);
    }

    SweepResult result;
    result.skipped = reports.size();

    std::ofstream appender(results_path, std::ios::binary | std::ios::app);
    if (!appender) {
        throw std::runtime_error("cannot append to " + results_path.string());
    }
    std::mutex writer_mutex;
    std::atomic<std::size_t> next{0};
    std::atomic<bool> abort{false};
    std::exception_ptr failure;
    std::size_t finished = 0;

    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size() || abort.load()) {
                return;
            }
            const Task& task = tasks[i];
            try {
                const auto started = std::chrono::steady_clock::now();
                const ScenarioConfig& config = configs.at({task.M, beta_milli(task.beta)});
                const std::string id = run_id(task.M, task.beta, task.seed);

                PolicySet policies;
                if (spec.curve_window) {
                    std::vector<CurvePoint> curve;
                    policies = train_with_curve(config, task.seed, *spec.curve_window, curve);
                    auto out = open_output(spec.out_dir / ("curve_" + id + ".csv"));
                    write_curve_csv(curve, out);
                } else {
                    policies = train(config, task.seed);
                }
                if (spec.save_policies) {
                    auto out = open_output(spec.out_dir / ("policy_" + id + ".txt"));
                    save_policies(policies, out);
                }
                EvalReport report;
                if (spec.trace) {
                    auto out = open_output(spec.out_dir / ("trace_" + id + ".csv"));
                    TraceWriter writer(out);
                    report = evaluate(policies, config, evaluation_seed(task.seed), nullptr, &writer);
                } else {
                    report = evaluate(policies, config, evaluation_seed(task.seed));
                }
                // Reports carry the run seed, not the derived evaluation seed.
                report.seed = task.seed;
                const double seconds =
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

                std::lock_guard lock(writer_mutex);
                appender << report_csv_row(report, max_m) << '\n';
                appender.flush();
                if (!appender) {
                    throw std::runtime_error("append failed for " + results_path.string());
                }
                reports.push_back(report);
                ++finished;
                ++result.executed;
                if (spec.log) {
                    std::ostringstream msg;
                    msg << '[' << finished << '/' << tasks.size() << "] " << id << " gini=" << report.gini
                        << " cost=" << report.global_cost << " (" << seconds << " s)";
                    spec.log(msg.str());
                }
            } catch (...) {
                std::lock_guard lock(writer_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
                abort = true;
                return;
            }
        }
    };

    const int n_threads = std::min<int>(spec.workers, static_cast<int>(std::max<std::size_t>(tasks.size(), 1)));
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < n_threads; ++t) {
            pool.emplace_back(worker);
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    appender.close();
    if (failure) {
        std::rethrow_exception(failure);
    }

    std::sort(reports.begin(), reports.end(),
              [](const EvalReport& a, const EvalReport& b) { return key_of(a) < key_of(b); });
    {
        std::string contents = report_csv_header(max_m) + '\n';
        for (const auto& r : reports) {
            contents += report_csv_row(r, max_m) + '\n';
        }
        write_file_atomically(results_path, contents);
    }

    const auto cells = seed_means(reports);
    nlohmann::json summary;
    summary["scenarios"] = nlohmann::json::array();
    std::set<int> ms;
    for (const auto& c : cells) {
        ms.insert(c.M);
    }
    for (const int M : ms) {
        std::vector<BetaSummary> group;
        for (const auto& c : cells) {
            if (c.M == M) {
                group.push_back(c);
            }
        }
        std::vector<CostGiniPoint> points;
        for (const auto& c : group) {
            points.push_back({c.global_cost, c.gini});
        }
        std::vector<bool> efficient(group.size(), false);
        for (const auto i : pareto_front_indices(points)) {
            efficient[i] = true;
        }
        std::string pareto = "beta,global_cost,gini,C1,C2,C3,runs,efficient\n";
        for (std::size_t i = 0; i < group.size(); ++i) {
            const auto& c = group[i];
            pareto += format_real(c.beta) + ',' + format_real(c.global_cost) + ',' + format_real(c.gini) + ',' +
                      format_real(c.C1) + ',' + format_real(c.C2) + ',' + format_real(c.C3) + ',' +
                      std::to_string(c.runs) + ',' + (efficient[i] ? "1" : "0") + '\n';
        }
        write_file_atomically(spec.out_dir / ("pareto_M" + std::to_string(M) + ".csv"), pareto);
        summary["scenarios"].push_back(summarize_scenario(M, group, efficient));
    }
    write_file_atomically(spec.out_dir / "summary.json", summary.dump(2) + '\n');

    result.reports = std::move(reports);
    return result;
}

} // namespace fairbalance
