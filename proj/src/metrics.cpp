#include "fairbalance/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "fairbalance/error.hpp"

namespace fairbalance {

std::vector<double> failure_probabilities(std::span<const std::int64_t> failures,
                                          std::span<const std::int64_t> attempts) {
    if (failures.size() != attempts.size()) {
        throw DomainError("failure_probabilities: mismatched category counts");
    }
    std::vector<double> x(failures.size());
    for (std::size_t m = 0; m < failures.size(); ++m) {
        if (attempts[m] <= 0) {
            throw UndefinedProbabilityError("category " + std::to_string(m + 1) + " recorded no departure attempts");
        }
        x[m] = static_cast<double>(failures[m]) / static_cast<double>(attempts[m]);
    }
    return x;
}

double gini(std::span<const double> x) {
    if (x.empty()) {
        throw DomainError("gini: empty input");
    }
    double total = 0.0;
    for (const double v : x) {
        if (!(v >= 0.0)) {
            throw DomainError("gini: entries must be nonnegative");
        }
        total += v;
    }
    if (total == 0.0) {
        return 0.0;
    }
    const auto M = static_cast<double>(x.size());
    const double mean = total / M;
    double spread = 0.0;
    for (const double a : x) {
        for (const double b : x) {
            spread += std::fabs(a - b);
        }
    }
    return spread / (2.0 * M * M * mean);
}

CostComponents costs(const EvalTrace& trace) noexcept {
    CostComponents c;
    if (trace.epochs.empty()) {
        return c;
    }
    for (const auto& e : trace.epochs) {
        c.C1 += e.rebalancing;
        c.C2 += e.failure_rate;
        c.C3 += e.vehicles;
    }
    const auto n = static_cast<double>(trace.epochs.size());
    c.C1 /= n;
    c.C2 /= n;
    c.C3 /= n;
    return c;
}

double global_cost(const CostComponents& c, const CostWeights& w) noexcept {
    return w.rebalancing * c.C1 + w.failures * c.C2 + w.vehicles * c.C3;
}

EvalReport make_report(const EvalTrace& trace, const ScenarioConfig& scenario, std::uint64_t seed) {
    EvalReport report;
    report.M = scenario.M;
    report.beta = scenario.beta;
    report.seed = seed;
    const bool any_empty = std::any_of(trace.category_attempts.begin(), trace.category_attempts.end(),
                                       [](std::int64_t a) { return a <= 0; });
    if (any_empty) {
        report.failure_prob_undefined = true;
        report.failure_prob.resize(trace.category_attempts.size(), 0.0);
        for (std::size_t m = 0; m < trace.category_attempts.size(); ++m) {
            if (trace.category_attempts[m] > 0) {
                report.failure_prob[m] = static_cast<double>(trace.category_failures[m]) /
                                         static_cast<double>(trace.category_attempts[m]);
            }
        }
    } else {
        report.failure_prob = failure_probabilities(trace.category_failures, trace.category_attempts);
    }
    report.gini_undefined =
        std::all_of(report.failure_prob.begin(), report.failure_prob.end(), [](double v) { return v == 0.0; });
    report.gini = report.failure_prob.empty() ? 0.0 : gini(report.failure_prob);
    const auto c = costs(trace);
    report.C1 = c.C1;
    report.C2 = c.C2;
    report.C3 = c.C3;
    report.global_cost = global_cost(c, scenario.cost_weights);
    return report;
}

std::vector<std::size_t> pareto_front_indices(std::span<const CostGiniPoint> points) {
    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (points[a].cost != points[b].cost) {
            return points[a].cost < points[b].cost;
        }
        return points[a].gini < points[b].gini;
    });
    // Sweep by increasing cost: a point survives iff its gini beats every
    // cheaper-or-equal point seen so far.
    std::vector<std::size_t> front;
    double best_gini = INFINITY;
    for (const std::size_t i : order) {
        if (points[i].gini < best_gini) {
            front.push_back(i);
            best_gini = points[i].gini;
        }
    }
    return front;
}

std::vector<CostGiniPoint> pareto_front(std::span<const CostGiniPoint> points) {
    std::vector<CostGiniPoint> out;
    for (const std::size_t i : pareto_front_indices(points)) {
        out.push_back(points[i]);
    }
    return out;
}

std::string format_real(double value) {
    char buffer[64];
    const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
    return std::string(buffer, ptr);
}

std::string report_csv_header(int max_m) {
    std::string header = "beta,seed,M,gini,C1,C2,C3,global_cost";
    for (int m = 1; m <= max_m; ++m) {
        header += ",x_" + std::to_string(m);
    }
    return header;
}

std::string report_csv_row(const EvalReport& report, int max_m) {
    std::string row = format_real(report.beta) + ',' + std::to_string(report.seed) + ',' + std::to_string(report.M) +
                      ',' + format_real(report.gini) + ',' + format_real(report.C1) + ',' + format_real(report.C2) +
                      ',' + format_real(report.C3) + ',' + format_real(report.global_cost);
    for (int m = 1; m <= max_m; ++m) {
        row += ',';
        if (static_cast<std::size_t>(m) <= report.failure_prob.size()) {
            row += format_real(report.failure_prob[static_cast<std::size_t>(m - 1)]);
        }
    }
    return row;
}

} // namespace fairbalance
