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

// Sweeps the fairness level, classifies the welfare trends into regimes,
// and checks regime sequences against the admissible transition diagrams.

#ifndef VPPFAIR_REGIME_ANALYZER_HPP_
#define VPPFAIR_REGIME_ANALYZER_HPP_

#include <array>
#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

#include "vppfair/consumer_model.hpp"
#include "vppfair/fairness_optimizer.hpp"
#include "vppfair/welfare_metrics.hpp"

namespace vppfair {

struct SweepRecord {
  double alpha = 0.0;
  EquilibriumSolution solution;
  PerformanceReport report;
};

/// `points` evenly spaced values on [0, 1], endpoints included.
std::vector<double> uniform_grid(int points = 201);
/// Grid with spacing `step`; 1 / step must be (close to) an integer.
std::vector<double> grid_from_step(double step);

/// One fair solve per alpha. The baseline is computed once from the
/// profit-only solution. Solver failures are rethrown with the alpha.
std::vector<SweepRecord> sweep(const Population& pop, const MarketParams& mkt,
                               Criterion criterion,
                               const std::vector<double>& grid,
                               const FairOptions& opt = {});

enum class Trend { kUp, kFlat, kDown, kZero, kNegInfinity };

std::string to_string(Trend t);

/// Measures in a regime signature: group-1 utility, group-2 utility, CNW,
/// total utility, social welfare.
using Signature = std::array<Trend, 5>;

struct RegimeSegment {
  double alpha_lo = 0.0;
  double alpha_hi = 0.0;
  Signature signs{};
  std::vector<Trend> demand_signs;  // per consumer
  std::size_t split = 0;            // group 1 = consumers [0, split)
  int label = 0;                    // 1..4, or 0 when unmatched
  bool transition_cell = false;     // lone cell between two regimes
};

struct Classification {
  std::vector<RegimeSegment> segments;
  std::vector<int> sequence;        // labels with transition cells dropped
  std::vector<double> thresholds;   // one per change in `sequence`
  std::vector<int> record_labels;   // label per record, -1 on transitions
};

/// Regime table of a criterion: row r is the signature of Regime r + 1.
const std::vector<Signature>& regime_table(Criterion c);

/// Forward-difference trends per grid cell, merged into maximal segments.
/// Constancy threshold per measure: eps * (range over the sweep), floored at
/// 1e-12. With more than two consumers the population is split by capacity
/// order into two groups whose members move their demand the same way.
Classification classify(const std::vector<SweepRecord>& records,
                        const Population& pop, Criterion criterion,
                        double eps = 1e-6);

struct TransitionVerdict {
  bool pass = false;
  std::vector<int> sequence;
  std::vector<std::string> failures;
};

TransitionVerdict validate_transitions(const std::vector<int>& sequence,
                                       Criterion criterion);
TransitionVerdict validate_transitions(const Classification& c,
                                       Criterion criterion);

/// Sweep table: alpha, p_i, D_i, U_i per consumer, profit, total_utility,
/// cnw, social_welfare, regime_label.
void write_sweep_csv(std::ostream& os, const std::vector<SweepRecord>& records,
                     const Population& pop, const Classification& regimes);

void write_segments_csv(std::ostream& os, const Classification& regimes);

/// "R1".."R4", "unmatched", or "transition".
std::string label_name(int label);

}  // namespace vppfair

#endif  // VPPFAIR_REGIME_ANALYZER_HPP_
