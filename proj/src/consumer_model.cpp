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

#include "vppfair/consumer_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

namespace vppfair {
namespace {

void check_domain(double capacity, double d, const char* what) {
  if (!(d >= 0.0) || d > capacity) {
    std::ostringstream os;
    os << what << ": provision " << d << " outside [0, " << capacity << "]";
    throw DomainError(os.str());
  }
}

}  // namespace

Population::Population(CostParams cost, std::vector<ConsumerParams> consumers)
    : cost_(cost), consumers_(std::move(consumers)) {
  if (!(cost_.a > 0.0) || !std::isfinite(cost_.a) || !std::isfinite(cost_.b)) {
    throw ModelError("cost curvature a must be positive and finite");
  }
  if (consumers_.size() < 2) {
    throw ModelError("a population needs at least two consumers");
  }
  for (std::size_t i = 0; i < consumers_.size(); ++i) {
    const auto& c = consumers_[i];
    if (!(c.capacity > 0.0) || !std::isfinite(c.capacity)) {
      throw ModelError("consumer '" + c.id + "' has non-positive capacity");
    }
    if (c.weight < 1) {
      throw ModelError("consumer '" + c.id + "' has weight below 1");
    }
    if (i > 0 && c.capacity < consumers_[i - 1].capacity) {
      throw ModelError("capacities must be sorted ascending (consumer '" +
                       c.id + "')");
    }
  }
  // b / a > max capacity keeps the marginal cost positive on [0, capacity].
  if (!(cost_.b / cost_.a > max_capacity())) {
    std::ostringstream os;
    os << "b/a = " << cost_.b / cost_.a
       << " must exceed the largest capacity " << max_capacity()
       << " (consumer '" << consumers_.back().id << "')";
    throw ModelError(os.str());
  }
}

bool Population::unit_weights() const {
  return std::all_of(consumers_.begin(), consumers_.end(),
                     [](const ConsumerParams& c) { return c.weight == 1; });
}

double Population::canonical_price(std::size_t i) const {
  return cost_.b - cost_.a * consumers_[i].capacity;
}

double Population::total_capacity() const {
  double s = 0.0;
  for (const auto& c : consumers_) {
    s += static_cast<double>(c.weight) * c.capacity;
  }
  return s;
}

std::vector<double> Population::capacities() const {
  std::vector<double> out;
  out.reserve(consumers_.size());
  for (const auto& c : consumers_) out.push_back(c.capacity);
  return out;
}

std::vector<double> Population::weights() const {
  std::vector<double> out;
  out.reserve(consumers_.size());
  for (const auto& c : consumers_) out.push_back(static_cast<double>(c.weight));
  return out;
}

void validate_market(const Population& pop, const MarketParams& mkt) {
  if (!std::isfinite(mkt.pi) || !std::isfinite(mkt.d_s)) {
    throw ModelError("market parameters must be finite");
  }
  if (!(mkt.d_s > 0.0) || !(mkt.d_s < pop.total_capacity())) {
    std::ostringstream os;
    os << "aggregation cap " << mkt.d_s << " must lie in (0, "
       << pop.total_capacity() << ")";
    throw ModelError(os.str());
  }
  if (!(mkt.pi > pop.canonical_price(pop.size() - 1))) {
    std::ostringstream os;
    os << "market price " << mkt.pi
       << " does not exceed b - a * max capacity = "
       << pop.canonical_price(pop.size() - 1) << "; nobody participates";
    throw ModelError(os.str());
  }
}

bool all_consumers_profitable(const Population& pop, const MarketParams& mkt) {
  return mkt.pi > pop.canonical_price(0);
}

MarketParams market_from_fraction(const Population& pop, double pi,
                                  double d_s_fraction) {
  if (!(d_s_fraction > 0.0 && d_s_fraction < 1.0)) {
    throw ModelError("d_s_fraction must lie in (0, 1)");
  }
  return MarketParams{pi, d_s_fraction * pop.total_capacity()};
}

double cost(const CostParams& c, double capacity, double d) {
  check_domain(capacity, d, "cost");
  return 0.5 * c.a * d * d + (c.b - c.a * capacity) * d;
}

double best_response(const CostParams& c, double capacity, double p) {
  return std::min(capacity, std::max(0.0, (p - c.b) / c.a + capacity));
}

double utility(const CostParams& c, double capacity, double p, double d) {
  check_domain(capacity, d, "utility");
  return p * d - cost(c, capacity, d);
}

double recover_price(const CostParams& c, double capacity, double d) {
  check_domain(capacity, d, "recover_price");
  return c.a * d + c.b - c.a * capacity;
}

EquilibriumSolution make_solution(const Population& pop,
                                  const MarketParams& mkt,
                                  std::vector<double> prices,
                                  std::vector<double> demands) {
  const std::size_t n = pop.size();
  if (prices.size() != n || demands.size() != n) {
    throw ModelError("solution vectors do not match the population size");
  }
  EquilibriumSolution sol;
  sol.utilities.resize(n);
  double revenue = 0.0;
  double payments = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sol.utilities[i] = utility(pop.cost(), pop.capacity(i), prices[i], demands[i]);
    revenue += pop.weight(i) * demands[i];
    payments += pop.weight(i) * prices[i] * demands[i];
  }
  sol.profit = mkt.pi * revenue - payments;
  sol.prices = std::move(prices);
  sol.demands = std::move(demands);
  sol.multipliers.mu.assign(n, 0.0);
  sol.multipliers.nu.assign(n, 0.0);
  return sol;
}

EquilibriumSolution solution_from_demands(const Population& pop,
                                          const MarketParams& mkt,
                                          std::vector<double> demands) {
  std::vector<double> prices(pop.size());
  for (std::size_t i = 0; i < pop.size(); ++i) {
    prices[i] = recover_price(pop.cost(), pop.capacity(i), demands[i]);
  }
  return make_solution(pop, mkt, std::move(prices), std::move(demands));
}

std::vector<double> responses(const Population& pop,
                              std::span<const double> prices) {
  std::vector<double> out(pop.size());
  for (std::size_t i = 0; i < pop.size(); ++i) {
    out[i] = best_response(pop.cost(), pop.capacity(i), prices[i]);
  }
  return out;
}

double weighted_sum(const Population& pop, std::span<const double> values) {
  double s = 0.0;
  for (std::size_t i = 0; i < pop.size(); ++i) s += pop.weight(i) * values[i];
  return s;
}

}  // namespace vppfair
