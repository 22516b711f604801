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

// Performance measures of an equilibrium: profit, total utility, social
// welfare, consumer Nash welfare, and its energy-based counterpart.

#ifndef VPPFAIR_WELFARE_METRICS_HPP_
#define VPPFAIR_WELFARE_METRICS_HPP_

#include <compare>
#include <string>

#include "vppfair/consumer_model.hpp"

namespace vppfair {

/// A log-sum that may be minus infinity. The infinite case is an explicit
/// flag so that no IEEE -inf leaks into arithmetic or comparisons.
class LogWelfare {
 public:
  static LogWelfare neg_infinity() { return LogWelfare(true, 0.0); }
  static LogWelfare finite(double v) { return LogWelfare(false, v); }

  bool is_neg_infinity() const { return neg_inf_; }
  /// Throws std::logic_error on the sentinel.
  double value() const;
  /// "-inf" for the sentinel, otherwise %.12g.
  std::string to_string() const;

  friend bool operator==(const LogWelfare&, const LogWelfare&) = default;
  friend std::partial_ordering operator<=>(const LogWelfare& l,
                                           const LogWelfare& r);

 private:
  LogWelfare(bool neg_inf, double v) : neg_inf_(neg_inf), value_(v) {}
  bool neg_inf_;
  double value_;
};

struct PerformanceReport {
  LogWelfare cnw = LogWelfare::neg_infinity();
  double total_utility = 0.0;
  double social_welfare = 0.0;
  double profit = 0.0;
  LogWelfare dcnw = LogWelfare::neg_infinity();
};

/// Weighted measures of `sol`. Throws ModelError on a size mismatch.
PerformanceReport report(const EquilibriumSolution& sol, const Population& pop,
                         const MarketParams& mkt);

/// sum_i weight_i * log(a / 2). For interior solutions
/// cnw = offset + 2 * dcnw.
double dcnw_cnw_offset(const Population& pop);

/// Weighted log-sum with the sentinel when any value is <= 0.
LogWelfare weighted_log_sum(const Population& pop, const std::vector<double>& v);

}  // namespace vppfair

#endif  // VPPFAIR_WELFARE_METRICS_HPP_
