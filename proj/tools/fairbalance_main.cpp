// fairbalance: trains and evaluates fairness-aware rebalancing policies over
// a grid of scenarios, fairness weights and seeds.

#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fairbalance/error.hpp"
#include "fairbalance/sweep.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fairness-aware rebalancing sweep: train, evaluate and summarise tabular Q-learning policies"};

    std::vector<int> scenarios;
    std::string beta_text;
    std::string seeds_text = "10";
    std::optional<long> train_days;
    std::optional<long> eval_days;
    double scale = 1.0;
    bool desk = false;
    int workers = 1;
    std::string out_dir = "results";
    std::optional<std::string> config;
    bool trace = false;
    std::optional<long> curve;
    bool save_policies = false;
    bool quiet = false;

    app.add_option("--scenario", scenarios, "Number of area categories M (repeatable; default 5)");
    app.add_option("--beta", beta_text, "Fairness weights: list 0,0.5,1 or range 0:1:0.1 (default 0:1:0.1)");
    app.add_option("--seeds", seeds_text, "Seed count n (seeds 0..n-1), list 1,4,9 or range 3..7")
        ->capture_default_str();
    app.add_option("--train-days", train_days, "Training days per run");
    app.add_option("--eval-days", eval_days, "Evaluation days per run");
    app.add_option("--scale", scale, "Multiplier applied to the training days")->capture_default_str();
    app.add_flag("--desk", desk, "Desk-scale preset: 2e4 training days, epsilon decay x5");
    app.add_option("--workers", workers, "Concurrent runs")->capture_default_str();
    app.add_option("--out", out_dir, "Output directory")->capture_default_str();
    app.add_option("--config", config, "Scenario override file (key = value)");
    app.add_flag("--trace", trace, "Write an evaluation trace CSV per run");
    app.add_option("--curve", curve, "Write a learning curve averaged over windows of this many days");
    app.add_flag("--save-policies", save_policies, "Write the trained Q-tables per run");
    app.add_flag("-q,--quiet", quiet, "Suppress per-run progress");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        fairbalance::SweepSpec spec;
        if (!scenarios.empty()) {
            spec.scenarios = scenarios;
        }
        spec.betas = app.count("--beta") != 0 ? fairbalance::parse_beta_list(beta_text) : fairbalance::default_betas();
        spec.seeds = fairbalance::parse_seed_list(seeds_text);
        spec.train_days = train_days;
        spec.eval_days = eval_days;
        spec.scale = scale;
        spec.desk = desk;
        spec.workers = workers;
        spec.out_dir = out_dir;
        if (config) {
            spec.config = *config;
        }
        spec.trace = trace;
        spec.curve_window = curve;
        spec.save_policies = save_policies;
        if (!quiet) {
            spec.log = [](const std::string& line) { std::cerr << line << std::endl; };
        }

        const auto result = fairbalance::run_sweep(spec);
        if (!quiet) {
            std::cerr << "done: " << result.executed << " runs executed, " << result.skipped
                      << " already present; results in " << out_dir << '\n';
        }
        return 0;
    } catch (const fairbalance::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}
