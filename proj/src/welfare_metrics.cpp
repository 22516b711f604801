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

#include "vppfair/welfare_metrics.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace vppfair {

double LogWelfare::value() const {
  if (neg_inf_) throw std::logic_error("LogWelfare: value of -inf requested");
  return value_;
}

std::string LogWelfare::to_string() const {
  if (neg_inf_) return "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", value_);
  return buf;
}

std::partial_ordering operator<=>(const LogWelfare& l, const LogWelfare& r) {
  if (l.neg_inf_ && r.neg_inf_) return std::partial_ordering::equivalent;
  if (l.neg_inf_) return std::partial_ordering::less;
  if (r.neg_inf_) return std::partial_ordering::greater;
  return l.value_ <=> r.value_;
}

LogWelfare weighted_log_sum(const Population& pop,
                            const std::vector<double>& v) {
  if (v.size() != pop.size()) {
    throw ModelError("weighted_log_sum: size mismatch");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] > 0.0)) return LogWelfare::neg_infinity();
    s += pop.weight(i) * std::log(v[i]);
  }
  return LogWelfare::finite(s);
}

PerformanceReport report(const EquilibriumSolution& sol, const Population& pop,
                         const MarketParams& mkt) {
  const std::size_t n = pop.size();
  if (sol.prices.size() != n || sol.demands.size() != n ||
      sol.utilities.size() != n) {
    throw ModelError("report: solution does not match the population size");
  }
  PerformanceReport r;
  double sold = 0.0;
  double paid = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = pop.weight(i);
    sold += w * sol.demands[i];
    paid += w * sol.prices[i] * sol.demands[i];
    r.total_utility += w * sol.utilities[i];
  }
  r.profit = mkt.pi * sold - paid;
  r.social_welfare = r.profit + r.total_utility;
  r.cnw = weighted_log_sum(pop, sol.utilities);
  r.dcnw = weighted_log_sum(pop, sol.demands);
  return r;
}

double dcnw_cnw_offset(const Population& pop) {
  double total_weight = 0.0;
  for (std::size_t i = 0; i < pop.size(); ++i) total_weight += pop.weight(i);
  return total_weight * std::log(pop.cost().a / 2.0);
}

}  // namespace vppfair
