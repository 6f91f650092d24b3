#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairbalance/city.hpp"
#include "fairbalance/learn.hpp"
#include "fairbalance/metrics.hpp"

namespace fairbalance {

/// One (M, beta, seed) grid of train + evaluate runs.
struct SweepSpec {
    std::vector<int> scenarios{5};
    std::vector<double> betas;
    std::vector<std::uint64_t> seeds;
    double scale = 1.0; ///< multiplies train_days
    std::optional<long> train_days;
    std::optional<long> eval_days;
    bool desk = false; ///< 2e4 training days and 5x faster epsilon decay
    int workers = 1;
    std::filesystem::path out_dir = "results";
    std::optional<std::filesystem::path> config;
    bool trace = false;
    std::optional<long> curve_window;
    bool save_policies = false;
    std::function<void(const std::string&)> log;
};

/// Default beta grid 0.0, 0.1, ..., 1.0.
std::vector<double> default_betas();

/// "0,0.5,1" (list) or "0:1:0.1" (start:stop:step, stop inclusive).
/// Values are rounded to 1e-9 to keep grids exact. Throws ConfigError.
std::vector<double> parse_beta_list(std::string_view text);

/// "10" (seeds 0..9), "3,5,8" (explicit list) or "4..7" (inclusive range).
std::vector<std::uint64_t> parse_seed_list(std::string_view text);

/// Run identifier "M<M>_b<round(1000 beta)>_s<seed>" used in file names.
std::string run_id(int M, double beta, std::uint64_t seed);

/// Scenario for one grid cell after applying config file, desk preset,
/// explicit day counts, scale and beta. Throws ConfigError.
ScenarioConfig resolve_scenario(const SweepSpec& spec, int M, double beta);

/// Seed used for evaluation runs, independent of the training stream.
std::uint64_t evaluation_seed(std::uint64_t seed) noexcept;

struct CurvePoint {
    long day = 0; ///< days completed at the end of the window
    double mean_reward = 0.0;
};

/// Trains while averaging the daily network reward over consecutive windows
/// of `window` days (a trailing partial window is dropped). Writes
/// `day,mean_reward` rows to `csv` when given.
PolicySet train_with_curve(const ScenarioConfig& scenario, std::uint64_t seed, long window,
                           std::vector<CurvePoint>& curve);

std::vector<CurvePoint> emit_learning_curve(const ScenarioConfig& scenario, std::uint64_t seed, long window,
                                            std::ostream* csv = nullptr);

void write_curve_csv(std::span<const CurvePoint> curve, std::ostream& out);

/// Seed-mean metrics of one (M, beta) cell.
struct BetaSummary {
    int M = 0;
    double beta = 0.0;
    int runs = 0;
    double gini = 0.0;
    double global_cost = 0.0;
    double C1 = 0.0;
    double C2 = 0.0;
    double C3 = 0.0;
};

/// Groups reports by (M, beta) and averages over seeds; sorted by (M, beta).
std::vector<BetaSummary> seed_means(std::span<const EvalReport> reports);

/// Parses a results.csv produced by run_sweep (header + rows). Lines that do
/// not parse, such as a torn final line, are skipped.
std::vector<EvalReport> read_results_csv(std::istream& in);

struct SweepResult {
    std::vector<EvalReport> reports; ///< every row of the final results.csv, sorted
    std::size_t executed = 0;
    std::size_t skipped = 0; ///< triples already present in results.csv
};

/// Runs every missing (M, beta, seed) triple and writes results.csv,
/// pareto_M<k>.csv and summary.json under spec.out_dir.
SweepResult run_sweep(const SweepSpec& spec);

} // namespace fairbalance
