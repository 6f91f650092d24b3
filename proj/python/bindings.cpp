#include <pybind11/functional.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "fairbalance/city.hpp"
#include "fairbalance/error.hpp"
#include "fairbalance/learn.hpp"
#include "fairbalance/metrics.hpp"
#include "fairbalance/reward.hpp"
#include "fairbalance/stochastic.hpp"
#include "fairbalance/sweep.hpp"

namespace py = pybind11;
using namespace fairbalance;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Fairness-aware vehicle rebalancing core";

    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<OverflowError>(m, "OverflowError", PyExc_OverflowError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<InvalidActionError>(m, "InvalidActionError", PyExc_ValueError);
    py::register_exception<IndexError>(m, "IndexError", PyExc_IndexError);
    py::register_exception<MismatchError>(m, "MismatchError", PyExc_ValueError);
    py::register_exception<UndefinedProbabilityError>(m, "UndefinedProbabilityError", PyExc_ValueError);

    py::enum_<Period>(m, "Period").value("morning", Period::morning).value("evening", Period::evening);

    m.def("bessel_i", &bessel_i, py::arg("n"), py::arg("x"));
    m.def(
        "skellam_pmf",
        [](long n, double a, double d) { return skellam_pmf(n, SkellamParams{a, d}); }, py::arg("n"),
        py::arg("arrival"), py::arg("departure"));
    m.def(
        "censored_transition",
        [](long from, long to, double a, double d) { return censored_transition(from, to, SkellamParams{a, d}); },
        py::arg("m"), py::arg("n"), py::arg("arrival"), py::arg("departure"));
    m.def(
        "censored_transition_row",
        [](long from, long cap, double a, double d) {
            return censored_transition_row(from, cap, SkellamParams{a, d});
        },
        py::arg("m"), py::arg("cap"), py::arg("arrival"), py::arg("departure"));
    m.def("derive_seed", &derive_seed, py::arg("seed"), py::arg("stream"));

    py::class_<DemandRates>(m, "DemandRates")
        .def_readwrite("arrival", &DemandRates::arrival)
        .def_readwrite("departure", &DemandRates::departure);

    py::class_<CategoryProfile>(m, "CategoryProfile")
        .def_readonly("index", &CategoryProfile::index)
        .def_readonly("node_count", &CategoryProfile::node_count)
        .def_readonly("morning_rates", &CategoryProfile::morning_rates)
        .def_readonly("evening_rates", &CategoryProfile::evening_rates)
        .def_readonly("phi", &CategoryProfile::phi)
        .def_readonly("chi", &CategoryProfile::chi)
        .def_readonly("zeta_morning", &CategoryProfile::zeta_morning)
        .def_readonly("zeta_evening", &CategoryProfile::zeta_evening);

    py::class_<ScenarioConfig>(m, "ScenarioConfig")
        .def_readonly("M", &ScenarioConfig::M)
        .def_readonly("categories", &ScenarioConfig::categories)
        .def_readwrite("alpha", &ScenarioConfig::alpha)
        .def_readwrite("xi", &ScenarioConfig::xi)
        .def_readwrite("beta", &ScenarioConfig::beta)
        .def_readwrite("gamma", &ScenarioConfig::gamma)
        .def_readwrite("sigma", &ScenarioConfig::sigma)
        .def_readwrite("learning_rate", &ScenarioConfig::learning_rate)
        .def_readwrite("epsilon_decay", &ScenarioConfig::epsilon_decay)
        .def_readwrite("train_days", &ScenarioConfig::train_days)
        .def_readwrite("eval_days", &ScenarioConfig::eval_days)
        .def("total_nodes", &ScenarioConfig::total_nodes)
        .def("actions", &ScenarioConfig::actions)
        .def("validate", &ScenarioConfig::validate);

    m.def("build_scenario", &build_scenario, py::arg("M"));
    m.def(
        "parse_scenario_overrides",
        [](const std::string& text, const std::optional<ScenarioConfig>& base) {
            return parse_scenario_overrides(text, base);
        },
        py::arg("text"), py::arg("base") = std::nullopt);

    py::class_<RewardTerms>(m, "RewardTerms")
        .def_readonly("rebalance_cost", &RewardTerms::rebalance_cost)
        .def_readonly("failure_penalty", &RewardTerms::failure_penalty)
        .def_readonly("fairness_penalty", &RewardTerms::fairness_penalty)
        .def_readonly("clutter_penalty", &RewardTerms::clutter_penalty)
        .def_readonly("total", &RewardTerms::total);
    m.def("clutter_loss", &clutter_loss, py::arg("vehicles"), py::arg("mu"), py::arg("zeta"));
    m.def(
        "fair_local_reward",
        [](const ScenarioConfig& sc, int category, int action, std::int64_t failures, int vehicles_after,
           Period period) {
            return fair_local_reward(action, failures, vehicles_after, sc.category(category), sc, period);
        },
        py::arg("scenario"), py::arg("category"), py::arg("action"), py::arg("failures"),
        py::arg("vehicles_after"), py::arg("period"));

    py::class_<EvalReport>(m, "EvalReport")
        .def_readonly("M", &EvalReport::M)
        .def_readonly("beta", &EvalReport::beta)
        .def_readonly("seed", &EvalReport::seed)
        .def_readonly("failure_prob", &EvalReport::failure_prob)
        .def_readonly("C1", &EvalReport::C1)
        .def_readonly("C2", &EvalReport::C2)
        .def_readonly("C3", &EvalReport::C3)
        .def_readonly("global_cost", &EvalReport::global_cost)
        .def_readonly("gini", &EvalReport::gini)
        .def_readonly("gini_undefined", &EvalReport::gini_undefined)
        .def_readonly("failure_prob_undefined", &EvalReport::failure_prob_undefined);

    m.def(
        "gini", [](const std::vector<double>& x) { return gini(x); }, py::arg("x"));
    m.def(
        "pareto_front_indices",
        [](const std::vector<std::pair<double, double>>& pts) {
            std::vector<CostGiniPoint> points;
            points.reserve(pts.size());
            for (const auto& [cost, g] : pts) {
                points.push_back({cost, g});
            }
            return pareto_front_indices(points);
        },
        py::arg("points"));

    py::class_<PolicySet>(m, "PolicySet")
        .def_readonly("M", &PolicySet::M)
        .def_readonly("sigma", &PolicySet::sigma)
        .def_readonly("beta", &PolicySet::beta)
        .def_readonly("seed", &PolicySet::seed)
        .def("greedy_action", &PolicySet::greedy_action, py::arg("m"), py::arg("period"), py::arg("vehicles"))
        .def("dumps",
             [](const PolicySet& p) {
                 std::ostringstream out;
                 save_policies(p, out);
                 return out.str();
             })
        .def(py::self == py::self);
    m.def("loads_policies", [](const std::string& text) {
        std::istringstream in(text);
        return load_policies(in);
    });

    m.def(
        "train", [](const ScenarioConfig& sc, std::uint64_t seed) { return train(sc, seed); },
        py::arg("scenario"), py::arg("seed"), py::call_guard<py::gil_scoped_release>());
    m.def(
        "evaluate",
        [](const PolicySet& p, const ScenarioConfig& sc, std::uint64_t seed) { return evaluate(p, sc, seed); },
        py::arg("policies"), py::arg("scenario"), py::arg("seed"), py::call_guard<py::gil_scoped_release>());

    m.def(
        "run_sweep",
        [](const std::vector<int>& scenarios, const std::vector<double>& betas,
           const std::vector<std::uint64_t>& seeds, const std::filesystem::path& out_dir, double scale,
           std::optional<long> eval_days, bool desk, int workers) {
            SweepSpec spec;
            spec.scenarios = scenarios;
            spec.betas = betas;
            spec.seeds = seeds;
            spec.out_dir = out_dir;
            spec.scale = scale;
            spec.eval_days = eval_days;
            spec.desk = desk;
            spec.workers = workers;
            py::gil_scoped_release release;
            return run_sweep(spec).reports;
        },
        py::arg("scenarios"), py::arg("betas"), py::arg("seeds"), py::arg("out_dir"), py::arg("scale") = 1.0,
        py::arg("eval_days") = std::nullopt, py::arg("desk") = false, py::arg("workers") = 1);
}
