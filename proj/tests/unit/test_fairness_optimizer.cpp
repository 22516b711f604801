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

#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "vppfair/fairness_optimizer.hpp"
#include "vppfair/profit_optimizer.hpp"
#include "vppfair/welfare_metrics.hpp"

using namespace vppfair;
using vppfair::testing::make_pop;

namespace {

struct Bracket {
  double exact = -1e300;    // best grid point meeting the band exactly
  double relaxed = -1e300;  // best grid point meeting the widened band
  double bound = 0.0;       // profit change from one grid step
};

// Exhaustive two-consumer price grid, written independently of the library.
Bracket brute_force_fair(double a, double b, double pi, double c1, double c2,
                         double ds, Criterion crit, double band, double h) {
  const double caps[2] = {c1, c2};
  const double p_lo = std::min(b - a * c1, b - a * c2) - 1.0;
  const double p_hi = b + 1.0;
  const int steps = static_cast<int>(std::ceil((p_hi - p_lo) / h));
  struct Pt { double d, m, profit; };
  std::vector<Pt> grid[2];
  for (int i = 0; i < 2; ++i) {
    for (int k = 0; k <= steps; ++k) {
      const double p = p_lo + k * h;
      const double d = std::clamp((p - b) / a + caps[i], 0.0, caps[i]);
      const double u = p * d - (0.5 * a * d * d + (b - a * caps[i]) * d);
      const double m = crit == Criterion::kEnergy ? d / caps[i]
                       : crit == Criterion::kPrice ? p
                                                   : u;
      grid[i].push_back({d, m, (pi - p) * d});
    }
  }
  const double lip = crit == Criterion::kEnergy ? 1.0 / (a * c1)
                     : crit == Criterion::kPrice ? 1.0
                                                 : c2;
  const double slack = 2.0 * h * lip;
  Bracket out;
  const double gap = std::max(std::abs(pi - p_lo), std::abs(pi - p_hi));
  out.bound = h * (c1 + c2 + 2.0 * gap / a);
  for (const auto& x : grid[0]) {
    for (const auto& y : grid[1]) {
      if (x.d + y.d > ds + 1e-12) continue;
      const double dis = std::abs(x.m - y.m);
      const double pr = x.profit + y.profit;
      if (dis <= band + 1e-12) out.exact = std::max(out.exact, pr);
      if (dis <= band + slack) out.relaxed = std::max(out.relaxed, pr);
    }
  }
  return out;
}

double fair_profit(const Population& p, const MarketParams& m, Criterion c,
                   double alpha) {
  return solve_fair(p, m, make_spec(p, m, c, alpha)).solution.profit;
}

}  // namespace

TEST_SUITE("fairness_optimizer") {

TEST_CASE("criterion names round trip") {
  for (Criterion c : {Criterion::kEnergy, Criterion::kPrice, Criterion::kUtility}) {
    CHECK(parse_criterion(to_string(c)) == c);
  }
  CHECK_THROWS_AS(parse_criterion("envy"), ModelError);
  Partition part{{Branch::kBelow, Branch::kInterior, Branch::kSaturated}};
  CHECK(part.to_string() == "0,1,2");
}

TEST_CASE("baseline disparity examples") {
  {
    const Population p = make_pop(1, 5, {3, 4});
    const auto s = solve_n(p, {8.5, 6.93}).solution;
    CHECK(baseline_disparity(Criterion::kEnergy, s, p) == doctest::Approx(0.0625));
  }
  {
    const Population p = make_pop(1, 9, {1, 8});
    const auto s = solve_n(p, {12, 8}).solution;
    CHECK(baseline_disparity(Criterion::kPrice, s, p) == doctest::Approx(2.5));
  }
  {
    const Population p = make_pop(1, 9, {1.2, 3.5});
    const auto s = solve_n(p, {9.4, 4.5}).solution;
    // U = a D^2 / 2 at D = (0.8, 1.95)
    CHECK(baseline_disparity(Criterion::kUtility, s, p) ==
          doctest::Approx(0.5 * 1.95 * 1.95 - 0.5 * 0.8 * 0.8));
  }
}

TEST_CASE("price baseline ignores nonparticipants") {
  const Population p = make_pop(1, 9, {1, 5, 8});
  const MarketParams m{8.5, 2};
  const auto s = solve_n(p, m).solution;
  REQUIRE(s.demands[0] == 0.0);
  // Only consumers 2 and 3 enter the gap.
  CHECK(baseline_disparity(Criterion::kPrice, s, p) ==
        doctest::Approx(std::abs(s.prices[2] - s.prices[1])));
}

TEST_CASE("energy fairness closed-form points") {
  const Population p = make_pop(1, 5, {3, 4});
  const MarketParams m{8.5, 6.93};
  // Below the cap: D1 stays at capacity, D2 = 4 (1 - t) with t = 0.5 * 0.0625.
  const auto half = solve_fair(p, m, make_spec(p, m, Criterion::kEnergy, 0.5)).solution;
  CHECK(half.demands[0] == doctest::Approx(3.0));
  CHECK(half.demands[1] == doctest::Approx(3.875));
  // Equal ratios r with 3r + 4r = 6.93.
  const auto full = solve_fair(p, m, make_spec(p, m, Criterion::kEnergy, 1.0)).solution;
  CHECK(full.demands[0] == doctest::Approx(2.97).epsilon(1e-7));
  CHECK(full.demands[1] == doctest::Approx(3.96).epsilon(1e-7));
}

TEST_CASE("price fairness closed-form points") {
  const Population p = make_pop(1, 9, {1, 8});
  const MarketParams m{12, 8};
  const auto s0 = solve_fair(p, m, make_spec(p, m, Criterion::kPrice, 0.0)).solution;
  CHECK(s0.prices[0] == doctest::Approx(9.0));
  CHECK(s0.prices[1] == doctest::Approx(6.5));
  // Gap 0.8 * 2.5 = 2 with p1 held at b.
  const auto s = solve_fair(p, m, make_spec(p, m, Criterion::kPrice, 0.2)).solution;
  CHECK(s.prices[0] == doctest::Approx(9.0));
  CHECK(s.prices[1] == doctest::Approx(7.0));
  CHECK(s.demands[0] == doctest::Approx(1.0));
  CHECK(s.demands[1] == doctest::Approx(6.0));
  // Tight band: consumer 1 is priced out.
  const auto tight = solve_fair(p, m, make_spec(p, m, Criterion::kPrice, 0.9));
  CHECK(tight.solution.utilities[0] == 0.0);
  CHECK(report(tight.solution, p, m).cnw.is_neg_infinity());
  CHECK(std::abs(tight.solution.prices[1] - tight.solution.prices[0]) <= 0.25 + 1e-9);
}

TEST_CASE("utility fairness points") {
  const Population p = make_pop(1, 9, {1.2, 3.5});
  const MarketParams m{9.4, 4.5};
  const auto s0 = solve_fair(p, m, make_spec(p, m, Criterion::kUtility, 0.0)).solution;
  CHECK(s0.demands[0] == doctest::Approx(0.8));
  CHECK(s0.demands[1] == doctest::Approx(1.95));
  const auto s1 = solve_fair(p, m, make_spec(p, m, Criterion::kUtility, 1.0)).solution;
  CHECK(std::abs(s1.utilities[0] - s1.utilities[1]) <= 1e-6);
  const auto small = solve_fair(p, m, make_spec(p, m, Criterion::kUtility, 0.1)).solution;
  CHECK(small.demands[0] > s0.demands[0]);
  CHECK(small.demands[1] < s0.demands[1]);
}

TEST_CASE("two-consumer solvers sit inside the brute-force bracket") {
  struct Case { double a, b, pi, c1, c2, ds; Criterion c; };
  const Case cases[] = {{1, 5, 8.5, 3, 4, 6.93, Criterion::kEnergy},
                        {1, 9, 12, 1, 8, 8, Criterion::kPrice},
                        {1, 9, 9.4, 1.2, 3.5, 4.5, Criterion::kUtility},
                        {0.5, 7, 6, 2, 5, 4, Criterion::kUtility},
                        {0.5, 7, 6, 2, 5, 4, Criterion::kPrice}};
  for (const auto& k : cases) {
    const Population p = make_pop(k.a, k.b, {k.c1, k.c2});
    const MarketParams m{k.pi, k.ds};
    for (double alpha : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      CAPTURE(to_string(k.c));
      CAPTURE(alpha);
      const FairnessSpec spec = make_spec(p, m, k.c, alpha);
      const double solver = solve_fair(p, m, spec).solution.profit;
      const Bracket br = brute_force_fair(k.a, k.b, k.pi, k.c1, k.c2, k.ds,
                                          k.c, spec.band(), 0.005);
      CHECK(solver >= br.exact - 1e-9);
      CHECK(solver <= br.relaxed + 1e-9);
      CHECK(solver >= br.relaxed - br.bound - 0.05);
    }
  }
}

TEST_CASE("library grid oracle agrees with the solvers") {
  struct Case { Population p; MarketParams m; Criterion c; };
  const Case cases[] = {
      {make_pop(1, 9, {1, 8}), {12, 8}, Criterion::kPrice},
      {make_pop(1, 9, {1.2, 3.5}), {9.4, 4.5}, Criterion::kUtility},
      {make_pop(1, 5, {1, 3, 4}), {8.5, 7.92}, Criterion::kEnergy}};
  for (const auto& k : cases) {
    const auto free = grid_oracle(k.p, k.m, std::nullopt, 0.01);
    CHECK(free.found);
    CHECK(free.solution.profit <= solve_n(k.p, k.m).solution.profit + 1e-9);
    for (double alpha : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      CAPTURE(alpha);
      const FairnessSpec spec = make_spec(k.p, k.m, k.c, alpha);
      const double solver = solve_fair(k.p, k.m, spec).solution.profit;
      const auto orc = grid_oracle(k.p, k.m, spec, 0.01);
      REQUIRE(orc.found);
      CHECK(solver >= orc.solution.profit - orc.error_bound);
      const FairnessSpec wide{k.c, 0.0, spec.band() + orc.fairness_slack};
      CHECK(orc.solution.profit <= solve_fair(k.p, k.m, wide).solution.profit + 1e-9);
    }
  }
}

TEST_CASE("perfect fairness has zero profit and zero disparities") {
  for (const Population& p :
       {make_pop(1, 5, {3, 4}), make_pop(1, 9, {1, 5, 8}),
        make_pop(0.0408, 4.5686, {0.907, 2.692, 4.991}, {505, 497, 231})}) {
    const MarketParams m{p.cost().b + 1.0, 0.5 * p.total_capacity()};
    const auto s = check_perfect_fairness(p, m);
    CHECK(s.profit == 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) {
      CHECK(s.demands[i] == 0.0);
      CHECK(s.prices[i] == p.cost().b - p.cost().a * p.max_capacity());
    }
    for (Criterion c : {Criterion::kEnergy, Criterion::kPrice, Criterion::kUtility}) {
      CHECK(disparity(c, s, p) == 0.0);
    }
  }
  const Population p = make_pop(1, 5, {3, 4});
  const auto s = check_perfect_fairness(p, {8.5, 6.93});
  CHECK(s.prices[0] == 1.0);
  CHECK(s.prices[1] == 1.0);
}

TEST_CASE("a profitable uniform price leaves some disparity") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 300; ++k) {
    const double a = 0.3 + u(rng);
    const std::vector<double> caps{0.5 + u(rng), 2.0 + u(rng), 3.5 + u(rng)};
    const double b = a * caps[2] * (1.05 + u(rng));
    const Population p = make_pop(a, b, caps);
    const MarketParams m{b + 1.0, p.total_capacity()};
    const double price = b - a * caps[2] + 1e-3 + (a * caps[2] + 1.0) * u(rng);
    std::vector<double> d;
    for (double c : caps) d.push_back(best_response(p.cost(), c, price));
    const auto s = make_solution(p, m, std::vector<double>(3, price), d);
    const double worst = std::max({disparity(Criterion::kEnergy, s, p),
                                   disparity(Criterion::kPrice, s, p),
                                   disparity(Criterion::kUtility, s, p)});
    CHECK(worst > 0.0);
  }
}

TEST_CASE("solver invariants on random small instances") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 12; ++k) {
    const std::size_t n = 2 + k % 2;
    const double a = 0.5 + u(rng);
    std::vector<double> caps;
    double c = 0.3;
    for (std::size_t i = 0; i < n; ++i) caps.push_back(c += 0.2 + 2 * u(rng));
    const double b = a * caps.back() * (1.05 + u(rng));
    const Population p = make_pop(a, b, caps);
    const MarketParams m{b - a * caps.front() + 0.2 + 2 * u(rng),
                         (0.3 + 0.6 * u(rng)) * p.total_capacity()};
    const double p0 = solve_n(p, m).solution.profit;
    for (Criterion crit : {Criterion::kEnergy, Criterion::kPrice, Criterion::kUtility}) {
      CAPTURE(k);
      CAPTURE(to_string(crit));
      double prev = 1e300;
      for (double alpha = 0.0; alpha <= 1.0 + 1e-12; alpha += 0.125) {
        const FairnessSpec spec = make_spec(p, m, crit, alpha);
        const auto s = solve_fair(p, m, spec).solution;
        if (alpha == 0.0) CHECK(std::abs(s.profit - p0) <= 1e-8 * std::max(1.0, p0));
        CHECK(s.profit <= prev + 1e-9 * std::max(1.0, std::abs(prev)));
        prev = s.profit;
        CHECK(disparity(crit, s, p) <= spec.band() + 1e-6 * std::max(1.0, spec.baseline));
        double load = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          load += s.demands[i];
          const double resp = best_response(p.cost(), caps[i], s.prices[i]);
          CHECK(std::abs(resp - s.demands[i]) <= 1e-9 * std::max(1.0, caps[i]));
        }
        CHECK(load <= m.d_s * (1 + 1e-9));
      }
    }
  }
}

TEST_CASE("zero baseline leaves the profit-only point unchanged") {
  // lambda = pi - b puts both consumers at half capacity: equal ratios.
  const Population p = make_pop(1, 9, {1, 2});
  const MarketParams m{10, 1.5};
  const auto p0 = solve_n(p, m).solution;
  CHECK(p0.demands[0] == doctest::Approx(0.5));
  CHECK(p0.demands[1] == doctest::Approx(1.0));
  const FairnessSpec spec = make_spec(p, m, Criterion::kEnergy, 0.7);
  CHECK(spec.baseline <= 1e-9);
  const auto s = solve_fair(p, m, spec);
  CHECK(s.solution.profit == doctest::Approx(p0.profit).epsilon(1e-9));
  const FairnessSpec exact{Criterion::kEnergy, 0.7, 0.0};
  CHECK(solve_fair(p, m, exact).diagnostics.short_circuit);
}

TEST_CASE("alpha outside [0, 1] is rejected") {
  const Population p = make_pop(1, 5, {3, 4});
  const MarketParams m{8.5, 6.93};
  FairnessSpec spec = make_spec(p, m, Criterion::kEnergy, 0.5);
  spec.alpha = 1.5;
  CHECK_THROWS_AS(solve_fair(p, m, spec), ModelError);
}

}  // TEST_SUITE
