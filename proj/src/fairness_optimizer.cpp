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

#include "vppfair/fairness_optimizer.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "vppfair/profit_optimizer.hpp"

namespace vppfair {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Outcome of the inner problem at a fixed band offset L.
struct BandEval {
  bool feasible = false;
  double value = kNegInf;  // profit
  double slope = 0.0;      // a subgradient of value in L (concave cases)
  double lambda = 0.0;
  std::vector<double> demands;
};

struct BandBest {
  bool found = false;
  double L = 0.0;
  BandEval eval;
};

void consider(BandBest& best, double L, BandEval e) {
  if (!e.feasible) return;
  if (!best.found || e.value > best.eval.value) {
    best.found = true;
    best.L = L;
    best.eval = std::move(e);
  }
}

// Maximizes a concave function on [lo, hi] given a subgradient oracle.
// Infeasible points are assumed to lie to the right of all feasible ones.
BandBest maximize_concave(const std::function<BandEval(double)>& eval,
                          double lo, double hi) {
  BandBest best;
  BandEval first = eval(lo);
  if (!first.feasible) return best;
  consider(best, lo, std::move(first));
  if (!(hi > lo)) return best;
  consider(best, hi, eval(hi));
  for (int it = 0; it < 200; ++it) {
    const double scale = std::max({1.0, std::abs(lo), std::abs(hi)});
    if (hi - lo <= 1e-14 * scale) break;
    const double mid = 0.5 * (lo + hi);
    BandEval e = eval(mid);
    if (!e.feasible) {
      hi = mid;
      continue;
    }
    const bool right = e.slope > 0.0;
    consider(best, mid, std::move(e));
    if (right) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return best;
}

// Golden-section refinement of a local maximum bracketed by [lo, hi].
void golden_polish(const std::function<BandEval(double)>& eval, double lo,
                   double hi, BandBest& best) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - r * (hi - lo);
  double x2 = lo + r * (hi - lo);
  BandEval e1 = eval(x1);
  BandEval e2 = eval(x2);
  for (int it = 0; it < 200; ++it) {
    const double scale = std::max({1.0, std::abs(lo), std::abs(hi)});
    if (hi - lo <= 1e-13 * scale) break;
    if (e1.value < e2.value) {
      lo = x1;
      x1 = x2;
      e1 = std::move(e2);
      x2 = lo + r * (hi - lo);
      e2 = eval(x2);
    } else {
      hi = x2;
      x2 = x1;
      e2 = std::move(e1);
      x1 = hi - r * (hi - lo);
      e1 = eval(x1);
    }
  }
  consider(best, x1, std::move(e1));
  consider(best, x2, std::move(e2));
}

// Band endpoints are computed from L by different formulas, so an empty box
// within rounding of a single point is collapsed onto that point.
bool snap_box(double& lo, double& hi, double capacity) {
  if (hi >= lo) return true;
  if (lo - hi > 1e-12 * std::max(1.0, capacity)) return false;
  hi = lo;
  return true;
}

double band_profit(const WaterfillProblem& wp, const std::vector<double>& d) {
  double v = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    v += wp.w[i] * (wp.g[i] * d[i] - wp.a * d[i] * d[i]);
  }
  return v;
}

// Runs the kernel on wp (lo/hi already set) and fills value and lambda.
bool run_kernel(const WaterfillProblem& wp, BandEval& e) {
  auto r = water_fill(wp);
  if (!r) return false;
  e.feasible = true;
  e.lambda = r->diagnostics.lambda;
  e.demands = std::move(r->demands);
  e.value = band_profit(wp, e.demands);
  return true;
}

WaterfillProblem base_problem(const Population& pop, const MarketParams& mkt) {
  WaterfillProblem wp;
  wp.g = marginal_coefficients(pop, mkt);
  wp.w = pop.weights();
  wp.a = pop.cost().a;
  wp.budget = mkt.d_s;
  wp.lo.assign(pop.size(), 0.0);
  wp.hi = pop.capacities();
  return wp;
}

FairSolution profit_only(const Population& pop, const MarketParams& mkt,
                         const FairnessSpec& spec) {
  FairSolution out;
  out.solution = solve_n(pop, mkt).solution;
  out.diagnostics.short_circuit = true;
  out.diagnostics.band_width = spec.band();
  out.diagnostics.partitions_feasible = 1;
  return out;
}

void check_spec(const FairnessSpec& spec, Criterion expected) {
  if (spec.criterion != expected) {
    throw ModelError("fairness spec criterion does not match the solver");
  }
  if (!(spec.alpha >= 0.0 && spec.alpha <= 1.0)) {
    throw ModelError("alpha must lie in [0, 1]");
  }
  if (!(spec.baseline >= 0.0) || !std::isfinite(spec.baseline)) {
    throw ModelError("baseline disparity must be finite and nonnegative");
  }
}

bool degenerate(const FairnessSpec& spec) { return spec.baseline <= 0.0; }

void finish(FairSolution& out, const Population& pop, const FairnessSpec& spec) {
  out.diagnostics.band_width = spec.band();
  out.diagnostics.fairness_slack =
      spec.band() - disparity(spec.criterion, out.solution, pop);
}

// Calls f on every branch assignment in lexicographic order.
void for_each_partition(std::size_t n,
                        const std::function<void(const Partition&)>& f) {
  Partition p;
  p.assignment.assign(n, Branch::kBelow);
  while (true) {
    f(p);
    std::size_t k = n;
    while (k > 0) {
      --k;
      auto& b = p.assignment[k];
      if (b != Branch::kSaturated) {
        b = static_cast<Branch>(static_cast<int>(b) + 1);
        break;
      }
      b = Branch::kBelow;
      if (k == 0) return;
    }
  }
}

bool strictly_better(double cand, double best) {
  return cand > best + 1e-12 * std::max(1.0, std::abs(best));
}

}  // namespace

std::string to_string(Criterion c) {
  switch (c) {
    case Criterion::kEnergy:
      return "energy";
    case Criterion::kPrice:
      return "price";
    case Criterion::kUtility:
      return "utility";
  }
  return "unknown";
}

Criterion parse_criterion(std::string_view s) {
  std::string l(s);
  for (auto& ch : l) ch = static_cast<char>(std::tolower(ch));
  if (l == "energy") return Criterion::kEnergy;
  if (l == "price") return Criterion::kPrice;
  if (l == "utility") return Criterion::kUtility;
  throw ModelError("unknown fairness criterion '" + std::string(s) + "'");
}

std::string Partition::to_string() const {
  std::string s;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (i) s += ',';
    s += static_cast<char>('0' + static_cast<int>(assignment[i]));
  }
  return s;
}

std::vector<double> metric_values(Criterion c, const EquilibriumSolution& sol,
                                  const Population& pop) {
  std::vector<double> m(pop.size());
  for (std::size_t i = 0; i < pop.size(); ++i) {
    switch (c) {
      case Criterion::kEnergy:
        m[i] = sol.demands[i] / pop.capacity(i);
        break;
      case Criterion::kPrice:
        m[i] = sol.prices[i];
        break;
      case Criterion::kUtility:
        m[i] = sol.utilities[i];
        break;
    }
  }
  return m;
}

namespace {

double spread(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  auto [mn, mx] = std::minmax_element(v.begin(), v.end());
  return *mx - *mn;
}

}  // namespace

double disparity(Criterion c, const EquilibriumSolution& sol,
                 const Population& pop) {
  return spread(metric_values(c, sol, pop));
}

double baseline_disparity(Criterion c, const EquilibriumSolution& profit_sol,
                          const Population& pop) {
  auto m = metric_values(c, profit_sol, pop);
  if (c == Criterion::kPrice) {
    std::vector<double> kept;
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (profit_sol.demands[i] > 0.0) kept.push_back(m[i]);
    }
    return spread(kept);
  }
  return spread(m);
}

FairnessSpec make_spec(const Population& pop, const MarketParams& mkt,
                       Criterion c, double alpha) {
  FairnessSpec spec;
  spec.criterion = c;
  spec.alpha = alpha;
  spec.baseline = baseline_disparity(c, solve_n(pop, mkt).solution, pop);
  return spec;
}

FairSolution solve_energy_fair(const Population& pop, const MarketParams& mkt,
                               const FairnessSpec& spec,
                               const FairOptions& opt) {
  (void)opt;
  check_spec(spec, Criterion::kEnergy);
  validate_market(pop, mkt);
  if (degenerate(spec)) return profit_only(pop, mkt, spec);

  const double t = spec.band();
  const auto caps = pop.capacities();
  const WaterfillProblem base = base_problem(pop, mkt);
  auto eval = [&](double L) {
    WaterfillProblem wp = base;
    for (std::size_t i = 0; i < caps.size(); ++i) {
      wp.lo[i] = caps[i] * std::max(0.0, L);
      wp.hi[i] = caps[i] * std::min(1.0, L + t);
    }
    BandEval e;
    if (!run_kernel(wp, e)) return e;
    for (std::size_t i = 0; i < caps.size(); ++i) {
      const double m =
          wp.g[i] - 2.0 * wp.a * e.demands[i] - e.lambda;
      const double dlo = L > 0.0 ? caps[i] : 0.0;
      const double dhi = L + t < 1.0 ? caps[i] : 0.0;
      e.slope += wp.w[i] * m * (m < 0.0 ? dlo : dhi);
    }
    return e;
  };
  const double hi = std::min(1.0, mkt.d_s / pop.total_capacity());
  BandBest best = maximize_concave(eval, -t, hi);
  if (!best.found) {
    throw std::runtime_error("energy fairness: no feasible band offset");
  }
  FairSolution out;
  out.solution = solution_from_demands(pop, mkt, std::move(best.eval.demands));
  out.solution.multipliers.lambda = best.eval.lambda;
  out.diagnostics.band_low = best.L;
  out.diagnostics.partitions_feasible = 1;
  out.diagnostics.partition.assignment.assign(pop.size(), Branch::kInterior);
  finish(out, pop, spec);
  return out;
}

FairSolution solve_price_fair(const Population& pop, const MarketParams& mkt,
                              const FairnessSpec& spec,
                              const FairOptions& opt) {
  (void)opt;
  check_spec(spec, Criterion::kPrice);
  validate_market(pop, mkt);
  if (degenerate(spec)) return profit_only(pop, mkt, spec);

  const double t = spec.band();
  const double a = pop.cost().a;
  const double b = pop.cost().b;
  const std::size_t n = pop.size();
  const WaterfillProblem base = base_problem(pop, mkt);

  FairSolution out;
  bool have = false;
  double best_value = kNegInf;

  for_each_partition(n, [&](const Partition& part) {
    const auto& br = part.assignment;
    // Interval of admissible band offsets for this branch assignment.
    double lo = b - a * pop.max_capacity() - t;
    double hi = b;
    double saturated_load = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double pc = pop.canonical_price(i);
      switch (br[i]) {
        case Branch::kBelow:
          hi = std::min(hi, pc);
          break;
        case Branch::kInterior:
          lo = std::max(lo, pc - t);
          break;
        case Branch::kSaturated:
          lo = std::max(lo, b - t);
          saturated_load += pop.weight(i) * pop.capacity(i);
          break;
      }
    }
    if (hi < lo || saturated_load > mkt.d_s * (1.0 + 1e-12)) return;

    auto eval = [&](double L) {
      WaterfillProblem wp = base;
      BandEval e;
      for (std::size_t i = 0; i < n; ++i) {
        const double pc = pop.canonical_price(i);
        switch (br[i]) {
          case Branch::kBelow:
            wp.lo[i] = wp.hi[i] = 0.0;
            break;
          case Branch::kInterior:
            wp.lo[i] = std::max(0.0, (L - pc) / a);
            wp.hi[i] = std::min(pop.capacity(i), (L + t - pc) / a);
            if (!snap_box(wp.lo[i], wp.hi[i], pop.capacity(i))) return e;
            break;
          case Branch::kSaturated:
            wp.lo[i] = wp.hi[i] = pop.capacity(i);
            break;
        }
      }
      if (!run_kernel(wp, e)) return e;
      for (std::size_t i = 0; i < n; ++i) {
        const double pc = pop.canonical_price(i);
        if (br[i] == Branch::kInterior) {
          const double m = wp.g[i] - 2.0 * a * e.demands[i] - e.lambda;
          const double dlo = L > pc ? 1.0 / a : 0.0;
          const double dhi = L + t < b ? 1.0 / a : 0.0;
          e.slope += wp.w[i] * m * (m < 0.0 ? dlo : dhi);
        } else if (br[i] == Branch::kSaturated && L > b) {
          e.value -= wp.w[i] * pop.capacity(i) * (L - b);
          e.slope -= wp.w[i] * pop.capacity(i);
        }
      }
      return e;
    };

    BandBest bb = maximize_concave(eval, lo, hi);
    if (!bb.found) return;
    ++out.diagnostics.partitions_feasible;
    if (have && !strictly_better(bb.eval.value, best_value)) return;

    std::vector<double> prices(n);
    std::vector<double> demands = bb.eval.demands;
    for (std::size_t i = 0; i < n; ++i) {
      const double pc = pop.canonical_price(i);
      switch (br[i]) {
        case Branch::kBelow:
          prices[i] = std::min(pc, bb.L + t);
          demands[i] = 0.0;
          break;
        case Branch::kInterior:
          prices[i] = a * demands[i] + pc;
          break;
        case Branch::kSaturated:
          prices[i] = std::max(b, bb.L);
          demands[i] = pop.capacity(i);
          break;
      }
    }
    have = true;
    best_value = bb.eval.value;
    out.solution = make_solution(pop, mkt, std::move(prices), std::move(demands));
    out.solution.multipliers.lambda = bb.eval.lambda;
    out.diagnostics.partition = part;
    out.diagnostics.band_low = bb.L;
  });
  if (!have) throw std::runtime_error("price fairness: every partition infeasible");
  finish(out, pop, spec);
  return out;
}

FairSolution solve_utility_fair(const Population& pop, const MarketParams& mkt,
                                const FairnessSpec& spec,
                                const FairOptions& opt) {
  check_spec(spec, Criterion::kUtility);
  validate_market(pop, mkt);
  if (degenerate(spec)) return profit_only(pop, mkt, spec);
  if (opt.utility_grid < 2) throw ModelError("utility_grid must be >= 2");

  const double t = spec.band();
  const double a = pop.cost().a;
  const double b = pop.cost().b;
  const std::size_t n = pop.size();
  const WaterfillProblem base = base_problem(pop, mkt);
  std::vector<double> full(n);  // utility at full capacity and price b
  for (std::size_t i = 0; i < n; ++i) {
    full[i] = 0.5 * a * pop.capacity(i) * pop.capacity(i);
  }

  FairSolution out;
  bool have = false;
  double best_value = kNegInf;

  for_each_partition(n, [&](const Partition& part) {
    const auto& br = part.assignment;
    double lo = -t;
    double hi = *std::max_element(full.begin(), full.end());
    double saturated_load = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      switch (br[i]) {
        case Branch::kBelow:
          hi = std::min(hi, 0.0);
          break;
        case Branch::kInterior:
          hi = std::min(hi, full[i]);
          break;
        case Branch::kSaturated:
          lo = std::max(lo, full[i] - t);
          saturated_load += pop.weight(i) * pop.capacity(i);
          break;
      }
    }
    if (hi < lo || saturated_load > mkt.d_s * (1.0 + 1e-12)) return;

    auto eval = [&](double L) {
      WaterfillProblem wp = base;
      BandEval e;
      for (std::size_t i = 0; i < n; ++i) {
        switch (br[i]) {
          case Branch::kBelow:
            wp.lo[i] = wp.hi[i] = 0.0;
            break;
          case Branch::kInterior:
            wp.lo[i] = std::sqrt(2.0 * std::max(0.0, L) / a);
            wp.hi[i] = std::min(pop.capacity(i),
                                std::sqrt(2.0 * std::max(0.0, L + t) / a));
            if (!snap_box(wp.lo[i], wp.hi[i], pop.capacity(i))) return e;
            break;
          case Branch::kSaturated:
            wp.lo[i] = wp.hi[i] = pop.capacity(i);
            break;
        }
      }
      if (!run_kernel(wp, e)) return e;
      for (std::size_t i = 0; i < n; ++i) {
        if (br[i] == Branch::kSaturated) {
          e.value -= wp.w[i] * std::max(0.0, L - full[i]);
        }
      }
      return e;
    };

    // The value is not concave in L here: scan a grid, then polish the
    // best local maxima.
    BandBest bb;
    double grid_bound = 0.0;
    if (hi - lo <= 1e-15 * std::max(1.0, std::abs(hi))) {
      consider(bb, lo, eval(lo));
    } else {
      const int cells = opt.utility_grid;
      const double step = (hi - lo) / cells;
      std::vector<double> xs(cells + 1);
      std::vector<double> vs(cells + 1, kNegInf);
      for (int k = 0; k <= cells; ++k) {
        xs[k] = k == cells ? hi : lo + k * step;
        BandEval e = eval(xs[k]);
        if (e.feasible) vs[k] = e.value;
        consider(bb, xs[k], std::move(e));
        if (k > 0 && vs[k] > kNegInf && vs[k - 1] > kNegInf) {
          grid_bound = std::max(grid_bound, std::abs(vs[k] - vs[k - 1]));
        }
      }
      std::vector<int> peaks;
      for (int k = 0; k <= cells; ++k) {
        if (vs[k] == kNegInf) continue;
        const bool left = k == 0 || vs[k] >= vs[k - 1];
        const bool right = k == cells || vs[k] >= vs[k + 1];
        if (left && right) peaks.push_back(k);
      }
      std::stable_sort(peaks.begin(), peaks.end(),
                       [&](int x, int y) { return vs[x] > vs[y]; });
      if (static_cast<int>(peaks.size()) > opt.utility_polish) {
        peaks.resize(opt.utility_polish);
      }
      for (int k : peaks) {
        golden_polish(eval, xs[std::max(0, k - 1)], xs[std::min(cells, k + 1)],
                      bb);
      }
    }
    if (!bb.found) return;
    ++out.diagnostics.partitions_feasible;
    if (have && !strictly_better(bb.eval.value, best_value)) return;

    std::vector<double> prices(n);
    std::vector<double> demands = bb.eval.demands;
    for (std::size_t i = 0; i < n; ++i) {
      switch (br[i]) {
        case Branch::kBelow:
          prices[i] = pop.canonical_price(i);
          demands[i] = 0.0;
          break;
        case Branch::kInterior:
          prices[i] = a * demands[i] + pop.canonical_price(i);
          break;
        case Branch::kSaturated:
          prices[i] = b + std::max(0.0, bb.L - full[i]) / pop.capacity(i);
          demands[i] = pop.capacity(i);
          break;
      }
    }
    have = true;
    best_value = bb.eval.value;
    out.solution = make_solution(pop, mkt, std::move(prices), std::move(demands));
    out.solution.multipliers.lambda = bb.eval.lambda;
    out.diagnostics.partition = part;
    out.diagnostics.band_low = bb.L;
    out.diagnostics.error_bound = grid_bound;
  });
  if (!have) {
    throw std::runtime_error("utility fairness: every partition infeasible");
  }
  finish(out, pop, spec);
  return out;
}

FairSolution solve_fair(const Population& pop, const MarketParams& mkt,
                        const FairnessSpec& spec, const FairOptions& opt) {
  switch (spec.criterion) {
    case Criterion::kEnergy:
      return solve_energy_fair(pop, mkt, spec, opt);
    case Criterion::kPrice:
      return solve_price_fair(pop, mkt, spec, opt);
    case Criterion::kUtility:
      return solve_utility_fair(pop, mkt, spec, opt);
  }
  throw ModelError("unknown criterion");
}

EquilibriumSolution check_perfect_fairness(const Population& pop,
                                           const MarketParams& mkt) {
  const double p = pop.canonical_price(pop.size() - 1);
  return make_solution(pop, mkt, std::vector<double>(pop.size(), p),
                       std::vector<double>(pop.size(), 0.0));
}

namespace {

struct GridPoint {
  double price;
  double demand;
  double metric;
  double profit;  // weighted (pi - p) D
  double load;    // weighted D
};

// Range-argmax over a fixed array, ties to the lowest index.
class SparseArgmax {
 public:
  explicit SparseArgmax(const std::vector<double>& v) : v_(v) {
    const std::size_t n = v.size();
    table_.push_back(std::vector<std::size_t>(n));
    for (std::size_t i = 0; i < n; ++i) table_[0][i] = i;
    for (std::size_t k = 1; (std::size_t{1} << k) <= n; ++k) {
      const std::size_t len = std::size_t{1} << k;
      std::vector<std::size_t> row(n - len + 1);
      for (std::size_t i = 0; i + len <= n; ++i) {
        row[i] = pick(table_[k - 1][i], table_[k - 1][i + len / 2]);
      }
      table_.push_back(std::move(row));
    }
  }
  // Argmax over [l, r), r > l.
  std::size_t query(std::size_t l, std::size_t r) const {
    std::size_t k = 0;
    while ((std::size_t{1} << (k + 1)) <= r - l) ++k;
    return pick(table_[k][l], table_[k][r - (std::size_t{1} << k)]);
  }

 private:
  std::size_t pick(std::size_t x, std::size_t y) const {
    if (v_[y] > v_[x] || (v_[y] == v_[x] && y < x)) return y;
    return x;
  }
  const std::vector<double>& v_;
  std::vector<std::vector<std::size_t>> table_;
};

}  // namespace

OracleResult grid_oracle(const Population& pop, const MarketParams& mkt,
                         const std::optional<FairnessSpec>& spec,
                         double resolution) {
  const std::size_t n = pop.size();
  if (n > 4) throw ModelError("grid_oracle supports at most 4 consumers");
  if (!(resolution > 0.0)) throw ModelError("grid_oracle: resolution <= 0");
  validate_market(pop, mkt);

  const double a = pop.cost().a;
  const double b = pop.cost().b;
  const double h = resolution;
  const double p_floor = pop.canonical_price(n - 1);
  const Criterion crit = spec ? spec->criterion : Criterion::kEnergy;
  const double t = spec ? spec->band() : std::numeric_limits<double>::infinity();
  double lipschitz = 0.0;
  if (spec) {
    switch (crit) {
      case Criterion::kEnergy:
        lipschitz = 1.0 / (a * pop.min_capacity());
        break;
      case Criterion::kPrice:
        lipschitz = 1.0;
        break;
      case Criterion::kUtility:
        lipschitz = pop.max_capacity();
        break;
    }
  }
  const double slack = 2.0 * h * lipschitz;
  const double p_ceiling =
      spec && crit == Criterion::kUtility
          ? b + 0.5 * a * pop.max_capacity() * pop.max_capacity() /
                    pop.min_capacity()
          : b;

  std::vector<std::vector<GridPoint>> grids(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double pc = pop.canonical_price(i);
    const double w = pop.weight(i);
    std::vector<double> ps;
    if (spec && crit == Criterion::kPrice) {
      for (long j = 0; p_floor + j * h < pc; ++j) ps.push_back(p_floor + j * h);
    }
    for (long j = 0; pc + j * h < b; ++j) ps.push_back(pc + j * h);
    ps.push_back(b);
    for (long j = 1; b + j * h <= p_ceiling; ++j) ps.push_back(b + j * h);
    std::sort(ps.begin(), ps.end());
    for (double p : ps) {
      GridPoint g;
      g.price = p;
      g.demand = best_response(pop.cost(), pop.capacity(i), p);
      const double u = utility(pop.cost(), pop.capacity(i), p, g.demand);
      g.metric = crit == Criterion::kEnergy  ? g.demand / pop.capacity(i)
                 : crit == Criterion::kPrice ? p
                                             : u;
      g.profit = w * (mkt.pi - p) * g.demand;
      g.load = w * g.demand;
      grids[i].push_back(g);
    }
  }

  OracleResult res;
  res.resolution = h;
  res.fairness_slack = spec ? slack : 0.0;
  double max_gap = std::max(std::abs(mkt.pi - p_floor), std::abs(mkt.pi - p_ceiling));
  for (std::size_t i = 0; i < n; ++i) {
    res.error_bound += h * pop.weight(i) * (pop.capacity(i) + max_gap / a);
  }

  const auto& last = grids[n - 1];
  std::vector<double> last_profit(last.size());
  std::vector<double> last_metric(last.size());
  std::vector<double> last_load(last.size());
  for (std::size_t j = 0; j < last.size(); ++j) {
    last_profit[j] = last[j].profit;
    last_metric[j] = last[j].metric;
    last_load[j] = last[j].load;
  }
  const SparseArgmax rmq(last_profit);
  const double cap_tol = mkt.d_s + 1e-9 * std::max(1.0, mkt.d_s);
  const double inf = std::numeric_limits<double>::infinity();

  double best = kNegInf;
  std::vector<std::size_t> pick(n), best_pick(n);

  std::function<void(std::size_t, double, double, double, double)> rec =
      [&](std::size_t k, double load, double value, double mn, double mx) {
        if (k == n - 1) {
          // Metric window and cap both cut contiguous index ranges.
          const double lo_m = spec ? mx - t - slack : -inf;
          const double hi_m = spec ? mn + t + slack : inf;
          std::size_t l = std::lower_bound(last_metric.begin(),
                                           last_metric.end(), lo_m) -
                          last_metric.begin();
          std::size_t r = std::upper_bound(last_metric.begin(),
                                           last_metric.end(), hi_m) -
                          last_metric.begin();
          const std::size_t rc =
              std::upper_bound(last_load.begin(), last_load.end(),
                               cap_tol - load) -
              last_load.begin();
          r = std::min(r, rc);
          if (l >= r) return;
          res.points += static_cast<long long>(r - l);
          const std::size_t j = rmq.query(l, r);
          if (value + last_profit[j] > best) {
            best = value + last_profit[j];
            pick[k] = j;
            best_pick = pick;
          }
          return;
        }
        const auto& gk = grids[k];
        for (std::size_t j = 0; j < gk.size(); ++j) {
          const auto& g = gk[j];
          if (load + g.load > cap_tol) break;
          const double nmn = std::min(mn, g.metric);
          const double nmx = std::max(mx, g.metric);
          if (spec && nmx - nmn > t + slack) {
            if (g.metric > mn) break;
            continue;
          }
          pick[k] = j;
          rec(k + 1, load + g.load, value + g.profit, nmn, nmx);
        }
      };
  rec(0, 0.0, 0.0, inf, -inf);

  if (best == kNegInf) return res;
  res.found = true;
  std::vector<double> prices(n), demands(n);
  for (std::size_t i = 0; i < n; ++i) {
    prices[i] = grids[i][best_pick[i]].price;
    demands[i] = grids[i][best_pick[i]].demand;
  }
  res.solution = make_solution(pop, mkt, std::move(prices), std::move(demands));
  return res;
}

}  // namespace vppfair
