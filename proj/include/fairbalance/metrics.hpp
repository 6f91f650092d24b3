#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fairbalance/city.hpp"

namespace fairbalance {

/// Network-level quantities recorded at one rebalancing epoch.
struct EpochCosts {
    double rebalancing = 0.0;  ///< alpha * sum_i phi(kappa_i) [a_i != 0]
    double failure_rate = 0.0; ///< sum_i f_i / mu_i over areas with mu_i > 0
    double vehicles = 0.0;     ///< sum_i vehicles after the action
};

/// Tallies collected during greedy evaluation.
struct EvalTrace {
    std::vector<std::int64_t> category_failures; ///< index m - 1
    std::vector<std::int64_t> category_attempts; ///< index m - 1
    std::vector<EpochCosts> epochs;
};

struct CostComponents {
    double C1 = 0.0; ///< mean rebalancing cost per epoch
    double C2 = 0.0; ///< mean failure rate per epoch
    double C3 = 0.0; ///< mean fleet size per epoch
};

struct EvalReport {
    int M = 0;
    double beta = 0.0;
    std::uint64_t seed = 0;
    std::vector<double> failure_prob; ///< x_m, index m - 1
    double C1 = 0.0;
    double C2 = 0.0;
    double C3 = 0.0;
    double global_cost = 0.0;
    double gini = 0.0;
    bool gini_undefined = false;        ///< every x_m was zero; gini reported as 0
    bool failure_prob_undefined = false; ///< some category had no attempts; its x_m reported as 0
};

/// x_m = failures_m / attempts_m. Throws UndefinedProbabilityError when a
/// category recorded no attempts.
std::vector<double> failure_probabilities(std::span<const std::int64_t> failures,
                                          std::span<const std::int64_t> attempts);

/// Gini index (2 M^2 mean)^-1 sum_m sum_n |x_m - x_n| over categories.
/// An all-zero vector returns 0. Throws DomainError on empty input or
/// negative entries.
double gini(std::span<const double> x);

/// Per-epoch means of the recorded rebalancing, failure-rate and fleet terms.
CostComponents costs(const EvalTrace& trace) noexcept;

double global_cost(const CostComponents& c, const CostWeights& w) noexcept;

/// Builds the report for one evaluation run.
EvalReport make_report(const EvalTrace& trace, const ScenarioConfig& scenario, std::uint64_t seed);

struct CostGiniPoint {
    double cost = 0.0;
    double gini = 0.0;
    friend bool operator==(const CostGiniPoint&, const CostGiniPoint&) = default;
};

/// Indices of the non-dominated points (both coordinates minimised), ordered
/// by cost. Of several identical points only the first in input order is kept.
std::vector<std::size_t> pareto_front_indices(std::span<const CostGiniPoint> points);

std::vector<CostGiniPoint> pareto_front(std::span<const CostGiniPoint> points);

/// results.csv header with x_1 .. x_max_m columns.
std::string report_csv_header(int max_m);

/// beta,seed,M,gini,C1,C2,C3,global_cost,x_1..x_max_m; categories beyond the
/// report's M are left empty.
std::string report_csv_row(const EvalReport& report, int max_m);

/// Shortest decimal text that reads back to exactly `value`.
std::string format_real(double value);

} // namespace fairbalance
