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

#include "vppfair/profit_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace vppfair {
namespace {

double demand_sum(const WaterfillProblem& p, double lambda,
                  std::vector<double>& d) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.g.size(); ++i) {
    d[i] = std::clamp((p.g[i] - lambda) / (2.0 * p.a), p.lo[i], p.hi[i]);
    s += p.w[i] * d[i];
  }
  return s;
}

bool breakpoint_inside(const WaterfillProblem& p, double l, double h) {
  for (std::size_t i = 0; i < p.g.size(); ++i) {
    if (!(p.lo[i] < p.hi[i])) continue;
    const double b1 = p.g[i] - 2.0 * p.a * p.hi[i];
    const double b2 = p.g[i] - 2.0 * p.a * p.lo[i];
    if ((b1 > l && b1 < h) || (b2 > l && b2 < h)) return true;
  }
  return false;
}

// Exact root of the demand sum on a bracket where it is affine in lambda.
double linear_root(const WaterfillProblem& p, double l, double h) {
  const double mid = 0.5 * (l + h);
  double free_slope = 0.0;
  double free_level = 0.0;
  double fixed = 0.0;
  for (std::size_t i = 0; i < p.g.size(); ++i) {
    const double x = (p.g[i] - mid) / (2.0 * p.a);
    if (p.lo[i] < p.hi[i] && x > p.lo[i] && x < p.hi[i]) {
      free_slope += p.w[i] / (2.0 * p.a);
      free_level += p.w[i] * p.g[i] / (2.0 * p.a);
    } else {
      fixed += p.w[i] * std::clamp(x, p.lo[i], p.hi[i]);
    }
  }
  if (free_slope <= 0.0) return h;
  return std::clamp((free_level + fixed - p.budget) / free_slope, l, h);
}

}  // namespace

std::optional<WaterfillResult> water_fill(const WaterfillProblem& p,
                                          int max_iters) {
  const std::size_t n = p.g.size();
  if (p.lo.size() != n || p.hi.size() != n || p.w.size() != n) {
    throw ModelError("water_fill: inconsistent vector sizes");
  }
  if (!(p.a > 0.0)) throw ModelError("water_fill: curvature must be positive");
  const double tol = 1e-9 * std::max(1.0, std::abs(p.budget));
  // Lower bounds may exceed the budget only by rounding.
  const double feas_tol = 1e-13 * std::max(1.0, std::abs(p.budget));

  double lo_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (p.lo[i] > p.hi[i]) return std::nullopt;
    lo_sum += p.w[i] * p.lo[i];
  }
  if (lo_sum > p.budget + feas_tol) return std::nullopt;

  WaterfillResult res;
  res.demands.assign(n, 0.0);
  const double s0 = demand_sum(p, 0.0, res.demands);
  if (s0 <= p.budget) {
    res.diagnostics.cap_binding = s0 >= p.budget - tol;
    return res;
  }

  double l = 0.0;
  double h = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    h = std::max(h, p.g[i] - 2.0 * p.a * p.lo[i]);
  }
  res.diagnostics.cap_binding = true;
  if (lo_sum >= p.budget - tol) {
    // Only the lower bounds fit; every consumer sits at lo.
    demand_sum(p, h, res.demands);
    res.diagnostics.lambda = h;
    return res;
  }

  for (int it = 0; it <= max_iters; ++it) {
    const bool narrow = h - l <= 1e-15 * std::max(1.0, std::abs(h));
    if (narrow || !breakpoint_inside(p, l, h)) {
      const double lambda = linear_root(p, l, h);
      const double s = demand_sum(p, lambda, res.demands);
      if (std::abs(s - p.budget) <= tol) {
        res.diagnostics.lambda = lambda;
        res.diagnostics.bisection_iters = it;
        return res;
      }
      if (narrow) break;
    }
    const double mid = 0.5 * (l + h);
    if (demand_sum(p, mid, res.demands) > p.budget) {
      l = mid;
    } else {
      h = mid;
    }
  }
  std::ostringstream os;
  os << "water_fill: no convergence after " << max_iters
     << " bisection steps (bracket [" << l << ", " << h << "])";
  throw std::runtime_error(os.str());
}

std::vector<double> marginal_coefficients(const Population& pop,
                                          const MarketParams& mkt) {
  std::vector<double> g(pop.size());
  for (std::size_t i = 0; i < pop.size(); ++i) {
    g[i] = mkt.pi - pop.cost().b + pop.cost().a * pop.capacity(i);
  }
  return g;
}

EquilibriumSolution solve_two(const Population& pop, const MarketParams& mkt) {
  if (pop.size() != 2 || !pop.unit_weights()) {
    throw ModelError("solve_two needs exactly two unit-weight consumers");
  }
  if (!(pop.capacity(0) < pop.capacity(1))) {
    throw ModelError("solve_two needs strictly ordered capacities");
  }
  validate_market(pop, mkt);
  if (!all_consumers_profitable(pop, mkt)) {
    throw ModelError("solve_two needs pi > b - a * min capacity");
  }
  const double a = pop.cost().a;
  const double c1 = pop.capacity(0);
  const double c2 = pop.capacity(1);
  const double c = (mkt.pi - pop.cost().b) / (2.0 * a);
  double d1 = std::min(c + c1 / 2.0, c1);
  double d2 = c + c2 / 2.0;
  double lambda = 0.0;
  if (d1 + d2 > mkt.d_s) {
    d1 = std::clamp(mkt.d_s / 2.0 + (c1 - c2) / 4.0, 0.0, c1);
    d2 = mkt.d_s - d1;
    const double g2 = mkt.pi - pop.cost().b + a * c2;
    lambda = std::max(0.0, g2 - 2.0 * a * d2);
  }
  auto sol = solution_from_demands(pop, mkt, {d1, d2});
  sol.multipliers.lambda = lambda;
  sol.multipliers.kkt_residual = kkt_residual(pop, mkt, sol.demands, lambda);
  return sol;
}

ProfitSolution solve_n(const Population& pop, const MarketParams& mkt) {
  validate_market(pop, mkt);
  WaterfillProblem wp;
  wp.g = marginal_coefficients(pop, mkt);
  wp.lo.assign(pop.size(), 0.0);
  wp.hi = pop.capacities();
  wp.w = pop.weights();
  wp.a = pop.cost().a;
  wp.budget = mkt.d_s;
  auto wf = water_fill(wp);
  // Lower bounds are zero, so the problem is always feasible.
  ProfitSolution out;
  out.diagnostics = wf->diagnostics;
  for (std::size_t i = 0; i < pop.size(); ++i) {
    if (wp.g[i] <= 0.0) out.nonparticipants.push_back(i);
  }
  out.solution = solution_from_demands(pop, mkt, std::move(wf->demands));
  auto& m = out.solution.multipliers;
  m.lambda = out.diagnostics.lambda;
  for (std::size_t i = 0; i < pop.size(); ++i) {
    const double marg =
        wp.g[i] - 2.0 * wp.a * out.solution.demands[i] - m.lambda;
    if (out.solution.demands[i] <= 0.0) m.mu[i] = std::max(0.0, -marg);
    if (out.solution.demands[i] >= pop.capacity(i)) {
      m.nu[i] = std::max(0.0, marg);
    }
  }
  m.kkt_residual = kkt_residual(pop, mkt, out.solution.demands, m.lambda);
  return out;
}

double kkt_residual(const Population& pop, const MarketParams& mkt,
                    const std::vector<double>& demands, double lambda) {
  const auto g = marginal_coefficients(pop, mkt);
  const double a = pop.cost().a;
  double worst = std::max(0.0, -lambda);
  double total = 0.0;
  double weight = 0.0;
  for (std::size_t i = 0; i < pop.size(); ++i) {
    const double d = demands[i];
    const double cap = pop.capacity(i);
    const double m = g[i] - 2.0 * a * d - lambda;
    worst = std::max({worst, -d, d - cap});
    if (d <= 0.0) {
      worst = std::max(worst, m);
    } else if (d >= cap) {
      worst = std::max(worst, -m);
    } else {
      worst = std::max(worst, std::abs(m));
    }
    total += pop.weight(i) * d;
    weight += pop.weight(i);
  }
  worst = std::max(worst, (total - mkt.d_s) / weight);
  worst = std::max(worst, lambda * std::abs(total - mkt.d_s) / weight);
  return worst;
}

}  // namespace vppfair
