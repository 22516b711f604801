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

// Shared domain types and the consumer-side primitives: quadratic provision
// cost, clamped linear price response, and consumer utility.

#ifndef VPPFAIR_CONSUMER_MODEL_HPP_
#define VPPFAIR_CONSUMER_MODEL_HPP_

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vppfair {

/// Raised when model parameters violate a structural invariant.
class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a primitive is evaluated outside [0, capacity].
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct Tolerances {
  double feasibility = 1e-9;
  double equality = 1e-6;
};

/// Shared cost coefficients. C(D) = a D^2 / 2 + (b - a Dbar) D.
struct CostParams {
  double a = 0.0;  // curvature, currency per energy^2
  double b = 0.0;  // intercept, currency per energy
};

struct ConsumerParams {
  std::string id;
  double capacity = 0.0;
  // Number of identical households represented by this entry.
  long weight = 1;
};

/// An ordered set of consumers sharing one cost curve. Capacities must be
/// weakly ascending; consumer 0 is the least flexible one.
class Population {
 public:
  Population(CostParams cost, std::vector<ConsumerParams> consumers);

  const CostParams& cost() const { return cost_; }
  std::span<const ConsumerParams> consumers() const { return consumers_; }
  std::size_t size() const { return consumers_.size(); }

  double capacity(std::size_t i) const { return consumers_[i].capacity; }
  double weight(std::size_t i) const {
    return static_cast<double>(consumers_[i].weight);
  }
  bool unit_weights() const;

  // b - a * capacity_i: highest price at which consumer i still provides 0.
  double canonical_price(std::size_t i) const;
  double min_capacity() const { return consumers_.front().capacity; }
  double max_capacity() const { return consumers_.back().capacity; }
  // Sum of weight_i * capacity_i.
  double total_capacity() const;

  std::vector<double> capacities() const;
  std::vector<double> weights() const;

 private:
  CostParams cost_;
  std::vector<ConsumerParams> consumers_;
};

struct MarketParams {
  double pi = 0.0;   // upper-market price
  double d_s = 0.0;  // aggregation cap
};

/// Checks 0 < d_s < total capacity and that at least the most flexible
/// consumer can participate profitably (pi > b - a * max capacity).
void validate_market(const Population& pop, const MarketParams& mkt);

/// Stricter participation check: pi > b - a * min capacity, so every
/// consumer has a positive marginal value at zero provision.
bool all_consumers_profitable(const Population& pop, const MarketParams& mkt);

MarketParams market_from_fraction(const Population& pop, double pi,
                                  double d_s_fraction);

/// Dual information attached to a solution. Multipliers are per unit weight.
struct Multipliers {
  double lambda = 0.0;  // aggregation cap
  double eta = 0.0;     // fairness band
  std::vector<double> mu;  // lower box bound D_i >= 0
  std::vector<double> nu;  // upper box bound D_i <= capacity_i
  double kkt_residual = 0.0;
};

struct EquilibriumSolution {
  std::vector<double> prices;
  std::vector<double> demands;
  std::vector<double> utilities;
  double profit = 0.0;
  Multipliers multipliers;
};

// Primitives. All of them take the shared cost and one consumer's capacity.

double cost(const CostParams& c, double capacity, double d);
double best_response(const CostParams& c, double capacity, double p);
double utility(const CostParams& c, double capacity, double p, double d);
/// Inverse of the interior response. d = 0 maps to the canonical price
/// b - a * capacity, which is profit-equivalent to any lower price.
double recover_price(const CostParams& c, double capacity, double d);

/// Assembles utilities and profit from given prices and demands.
EquilibriumSolution make_solution(const Population& pop,
                                  const MarketParams& mkt,
                                  std::vector<double> prices,
                                  std::vector<double> demands);

/// Same, with prices recovered canonically from the demands.
EquilibriumSolution solution_from_demands(const Population& pop,
                                          const MarketParams& mkt,
                                          std::vector<double> demands);

/// Consumer responses to a price vector (no cap enforcement).
std::vector<double> responses(const Population& pop,
                              std::span<const double> prices);

/// Weighted aggregate sum_i weight_i * values_i.
double weighted_sum(const Population& pop, std::span<const double> values);

}  // namespace vppfair

#endif  // VPPFAIR_CONSUMER_MODEL_HPP_
