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

// Fairness-constrained aggregator problem under energy, price, or utility
// fairness, plus an exhaustive price-grid oracle for cross-checks.
//
// All three solvers use the same reformulation: a pairwise cap
// |M_i - M_j| <= t holds iff every M_i lies in a band [L, L + t]. For a
// fixed L the problem is a boxed water-filling instance in the demands,
// and an outer one-dimensional search over L finishes the job.

#ifndef VPPFAIR_FAIRNESS_OPTIMIZER_HPP_
#define VPPFAIR_FAIRNESS_OPTIMIZER_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vppfair/consumer_model.hpp"

namespace vppfair {

enum class Criterion { kEnergy, kPrice, kUtility };

std::string to_string(Criterion c);
/// Accepts "energy", "price", "utility" (case-insensitive).
Criterion parse_criterion(std::string_view s);

/// Response branch of a consumer: D = 0, interior, or D = capacity.
enum class Branch { kBelow = 0, kInterior = 1, kSaturated = 2 };

struct Partition {
  std::vector<Branch> assignment;
  std::string to_string() const;  // e.g. "0,1,2"
};

struct FairnessSpec {
  Criterion criterion = Criterion::kEnergy;
  double alpha = 0.0;
  double baseline = 0.0;  // disparity of the profit-only solution

  double band() const { return (1.0 - alpha) * baseline; }
};

/// Per-consumer fairness metric: D_i / capacity_i, p_i, or U_i.
std::vector<double> metric_values(Criterion c, const EquilibriumSolution& sol,
                                  const Population& pop);

/// Largest pairwise metric gap over all consumers.
double disparity(Criterion c, const EquilibriumSolution& sol,
                 const Population& pop);

/// Disparity of the profit-only solution. Under price fairness consumers
/// with zero provision are left out, since their price is indeterminate.
double baseline_disparity(Criterion c, const EquilibriumSolution& profit_sol,
                          const Population& pop);

/// Spec with the baseline taken from solve_n.
FairnessSpec make_spec(const Population& pop, const MarketParams& mkt,
                       Criterion c, double alpha);

struct FairOptions {
  // Cells of the band-offset grid used by the utility solver.
  int utility_grid = 2000;
  // Local maxima of the grid that get a golden-section polish.
  int utility_polish = 4;
  double tol = 1e-9;
};

struct FairDiagnostics {
  Partition partition;           // winning branch assignment
  double band_low = 0.0;         // L
  double band_width = 0.0;       // t = (1 - alpha) * baseline
  double fairness_slack = 0.0;   // t minus achieved disparity
  double error_bound = 0.0;      // utility solver: grid-level bound
  int partitions_feasible = 0;
  bool short_circuit = false;    // baseline 0: profit-only returned
};

struct FairSolution {
  EquilibriumSolution solution;
  FairDiagnostics diagnostics;
};

FairSolution solve_energy_fair(const Population& pop, const MarketParams& mkt,
                               const FairnessSpec& spec,
                               const FairOptions& opt = {});
FairSolution solve_price_fair(const Population& pop, const MarketParams& mkt,
                              const FairnessSpec& spec,
                              const FairOptions& opt = {});
FairSolution solve_utility_fair(const Population& pop, const MarketParams& mkt,
                                const FairnessSpec& spec,
                                const FairOptions& opt = {});
/// Dispatches on spec.criterion.
FairSolution solve_fair(const Population& pop, const MarketParams& mkt,
                        const FairnessSpec& spec, const FairOptions& opt = {});

/// The only point fair under all three criteria at once: the uniform price
/// b - a * max capacity, zero provision everywhere, zero profit.
EquilibriumSolution check_perfect_fairness(const Population& pop,
                                           const MarketParams& mkt);

struct OracleResult {
  bool found = false;
  EquilibriumSolution solution;
  double resolution = 0.0;   // price step h
  double error_bound = 0.0;  // profit gap bound from the grid step
  double fairness_slack = 0.0;  // tolerance added to the band width
  long long points = 0;      // price tuples examined
};

/// Exhaustive search over per-consumer price grids with step `resolution`.
/// Without a spec only the cap applies. With a spec the band constraint is
/// checked with a slack of two grid steps times the metric's Lipschitz
/// constant. N <= 4. Test oracle only.
OracleResult grid_oracle(const Population& pop, const MarketParams& mkt,
                         const std::optional<FairnessSpec>& spec,
                         double resolution);

}  // namespace vppfair

#endif  // VPPFAIR_FAIRNESS_OPTIMIZER_HPP_
