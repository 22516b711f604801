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

// Small helpers shared by the unit suites.

#ifndef VPPFAIR_TESTS_HELPERS_HPP_
#define VPPFAIR_TESTS_HELPERS_HPP_

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "vppfair/consumer_model.hpp"

namespace vppfair::testing {

inline Population make_pop(double a, double b, std::vector<double> caps,
                           std::vector<long> weights = {}) {
  std::vector<ConsumerParams> cs;
  for (std::size_t i = 0; i < caps.size(); ++i) {
    cs.push_back({"c" + std::to_string(i + 1), caps[i],
                  weights.empty() ? 1L : weights[i]});
  }
  return Population(CostParams{a, b}, std::move(cs));
}

// Reference profit of a demand vector with interior-recovered prices:
// sum_i w_i ((pi - b + a cap_i) D_i - a D_i^2), written out directly.
inline double profit_of_demands(double a, double b, double pi,
                                const std::vector<double>& caps,
                                const std::vector<double>& w,
                                const std::vector<double>& d) {
  double s = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double price = a * d[i] + b - a * caps[i];
    s += w[i] * (pi - price) * d[i];
  }
  return s;
}

// Brute force over D_1 on a grid for two unit-weight consumers; D_2 is the
// unconstrained optimum clipped to its capacity and the remaining cap.
inline double brute_force_two(double a, double b, double pi, double c1,
                              double c2, double ds, double step) {
  double best = -1e300;
  for (double d1 = 0.0; d1 <= c1 + 1e-12; d1 += step) {
    const double room = ds - d1;
    if (room < 0.0) break;
    const double d2 = std::clamp((pi - b + a * c2) / (2.0 * a), 0.0,
                                 std::min(c2, room));
    best = std::max(best, profit_of_demands(a, b, pi, {c1, c2}, {1.0, 1.0},
                                            {std::min(d1, c1), d2}));
  }
  return best;
}

}  // namespace vppfair::testing

#endif  // VPPFAIR_TESTS_HELPERS_HPP_
