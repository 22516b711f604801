// Copyright 2026 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <limits>
#include <optional>

#include "vppfair/casestudy_pipeline.hpp"
#include "vppfair/consumer_model.hpp"
#include "vppfair/fairness_optimizer.hpp"
#include "vppfair/profit_optimizer.hpp"
#include "vppfair/regime_analyzer.hpp"
#include "vppfair/welfare_metrics.hpp"

namespace py = pybind11;
using namespace vppfair;

namespace {

// CNW / DCNW as float, with -inf for the sentinel.
double log_float(const LogWelfare& v) {
  return v.is_neg_infinity() ? -std::numeric_limits<double>::infinity() : v.value();
}

Population make_population(double a, double b, const std::vector<double>& caps,
                           const std::optional<std::vector<long>>& weights) {
  std::vector<ConsumerParams> cs;
  for (std::size_t i = 0; i < caps.size(); ++i) {
    cs.push_back({std::to_string(i + 1), caps[i],
                  weights ? weights->at(i) : 1L});
  }
  return Population(CostParams{a, b}, std::move(cs));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Fairness-constrained pricing for demand-response aggregation";

  py::register_exception<ModelError>(m, "ModelError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);

  py::class_<Population>(m, "Population")
      .def(py::init(&make_population), py::arg("a"), py::arg("b"),
           py::arg("capacities"), py::arg("weights") = py::none())
      .def_property_readonly("a", [](const Population& p) { return p.cost().a; })
      .def_property_readonly("b", [](const Population& p) { return p.cost().b; })
      .def_property_readonly("capacities", &Population::capacities)
      .def_property_readonly("weights", &Population::weights)
      .def("__len__", &Population::size)
      .def("total_capacity", &Population::total_capacity)
      .def("canonical_price", &Population::canonical_price);

  py::class_<MarketParams>(m, "Market")
      .def(py::init([](double pi, double d_s) { return MarketParams{pi, d_s}; }),
           py::arg("pi"), py::arg("d_s"))
      .def_static("from_fraction", &market_from_fraction, py::arg("population"),
                  py::arg("pi"), py::arg("fraction"))
      .def_readwrite("pi", &MarketParams::pi)
      .def_readwrite("d_s", &MarketParams::d_s);

  py::class_<EquilibriumSolution>(m, "Solution")
      .def_readonly("prices", &EquilibriumSolution::prices)
      .def_readonly("demands", &EquilibriumSolution::demands)
      .def_readonly("utilities", &EquilibriumSolution::utilities)
      .def_readonly("profit", &EquilibriumSolution::profit)
      .def_property_readonly("cap_multiplier",
                             [](const EquilibriumSolution& s) { return s.multipliers.lambda; });

  py::class_<PerformanceReport>(m, "Report")
      .def_property_readonly("cnw", [](const PerformanceReport& r) { return log_float(r.cnw); })
      .def_property_readonly("dcnw", [](const PerformanceReport& r) { return log_float(r.dcnw); })
      .def_readonly("total_utility", &PerformanceReport::total_utility)
      .def_readonly("social_welfare", &PerformanceReport::social_welfare)
      .def_readonly("profit", &PerformanceReport::profit);

  m.def("validate_market", &validate_market);
  m.def("best_response", [](double a, double b, double cap, double p) {
    return best_response(CostParams{a, b}, cap, p);
  });
  m.def("solve_two", &solve_two);
  m.def("solve_n", [](const Population& p, const MarketParams& mk) {
    return solve_n(p, mk).solution;
  });
  m.def("report", &report, py::arg("solution"), py::arg("population"),
        py::arg("market"));
  m.def("check_perfect_fairness", &check_perfect_fairness);
  m.def(
      "solve_fair",
      [](const Population& p, const MarketParams& mk, const std::string& crit,
         double alpha) {
        const Criterion c = parse_criterion(crit);
        return solve_fair(p, mk, make_spec(p, mk, c, alpha)).solution;
      },
      py::arg("population"), py::arg("market"), py::arg("criterion"),
      py::arg("alpha"));
  m.def(
      "disparity",
      [](const std::string& crit, const EquilibriumSolution& s,
         const Population& p) { return disparity(parse_criterion(crit), s, p); });
  m.def(
      "grid_oracle_profit",
      [](const Population& p, const MarketParams& mk, double resolution) {
        const OracleResult r = grid_oracle(p, mk, std::nullopt, resolution);
        return py::make_tuple(r.solution.profit, r.error_bound);
      },
      py::arg("population"), py::arg("market"), py::arg("resolution"));
  m.def(
      "sweep_regimes",
      [](const Population& p, const MarketParams& mk, const std::string& crit,
         double step) {
        const Criterion c = parse_criterion(crit);
        const auto recs = sweep(p, mk, c, grid_from_step(step));
        const Classification cls = classify(recs, p, c);
        py::list rows;
        for (const auto& r : recs) {
          rows.append(py::dict(py::arg("alpha") = r.alpha,
                               py::arg("prices") = r.solution.prices,
                               py::arg("demands") = r.solution.demands,
                               py::arg("utilities") = r.solution.utilities,
                               py::arg("profit") = r.report.profit,
                               py::arg("cnw") = log_float(r.report.cnw)));
        }
        return py::dict(py::arg("records") = rows,
                        py::arg("sequence") = cls.sequence,
                        py::arg("thresholds") = cls.thresholds,
                        py::arg("valid") = validate_transitions(cls, c).pass);
      },
      py::arg("population"), py::arg("market"), py::arg("criterion"),
      py::arg("step") = 0.01);
  m.def(
      "ols",
      [](const std::vector<double>& x, const std::vector<double>& y) {
        const OlsFit f = ordinary_least_squares(x, y);
        return py::make_tuple(f.slope, f.intercept, f.p_value);
      });
  m.def(
      "cluster_capacities",
      [](const std::vector<double>& caps, int k, std::uint64_t seed) {
        std::vector<std::pair<std::string, double>> in;
        for (std::size_t i = 0; i < caps.size(); ++i) in.emplace_back(std::to_string(i), caps[i]);
        const ClusteringResult r = cluster_households(in, k, seed);
        py::list out;
        for (const auto& c : r.clusters) out.append(py::make_tuple(c.mean_capacity, c.count));
        return out;
      },
      py::arg("capacities"), py::arg("k") = 3, py::arg("seed") = 20260101);
}
