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

// Profit-only aggregator problem: closed form for two consumers and a
// weighted water-filling solver for any population size.

#ifndef VPPFAIR_PROFIT_OPTIMIZER_HPP_
#define VPPFAIR_PROFIT_OPTIMIZER_HPP_

#include <cstddef>
#include <optional>
#include <vector>

#include "vppfair/consumer_model.hpp"

namespace vppfair {

struct WaterfillDiagnostics {
  double lambda = 0.0;  // shadow price of the aggregation cap
  int bisection_iters = 0;
  bool cap_binding = false;
};

/// Separable box-and-budget problem shared by all solvers:
///   max sum_i w_i (g_i D_i - a D_i^2)
///   s.t. lo_i <= D_i <= hi_i, sum_i w_i D_i <= budget.
/// The solution is D_i(lambda) = clamp((g_i - lambda) / (2a), lo_i, hi_i).
struct WaterfillProblem {
  std::vector<double> g;
  std::vector<double> lo;
  std::vector<double> hi;
  std::vector<double> w;
  double a = 1.0;
  double budget = 0.0;
};

struct WaterfillResult {
  std::vector<double> demands;
  WaterfillDiagnostics diagnostics;
};

/// Bisection on lambda until no breakpoint of the piecewise-linear demand
/// sum is left inside the bracket, then an exact linear solve. Returns
/// nullopt when even the lower bounds exceed the budget. Throws
/// std::runtime_error after `max_iters` bisection steps.
std::optional<WaterfillResult> water_fill(const WaterfillProblem& p,
                                          int max_iters = 200);

/// Marginal profit coefficient g_i = pi - b + a * capacity_i.
std::vector<double> marginal_coefficients(const Population& pop,
                                          const MarketParams& mkt);

/// Closed form for two unit-weight consumers with strictly ordered
/// capacities. Requires pi > b - a * min capacity.
EquilibriumSolution solve_two(const Population& pop, const MarketParams& mkt);

struct ProfitSolution {
  EquilibriumSolution solution;
  WaterfillDiagnostics diagnostics;
  // Consumers with g_i <= 0: they provide nothing at any lambda >= 0.
  std::vector<std::size_t> nonparticipants;
};

ProfitSolution solve_n(const Population& pop, const MarketParams& mkt);

/// Largest per-unit-weight violation of the profit-only KKT system at
/// (demands, lambda): stationarity with sign-constrained box multipliers,
/// primal feasibility, and complementary slackness of the cap.
double kkt_residual(const Population& pop, const MarketParams& mkt,
                    const std::vector<double>& demands, double lambda);

}  // namespace vppfair

#endif  // VPPFAIR_PROFIT_OPTIMIZER_HPP_
