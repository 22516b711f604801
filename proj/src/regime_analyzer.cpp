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

#include "vppfair/regime_analyzer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <utility>

#include "vppfair/format.hpp"

namespace vppfair {
namespace {

constexpr double kFloor = 1e-12;

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  double threshold(double eps) const {
    return hi >= lo ? std::max(eps * (hi - lo), kFloor) : kFloor;
  }
};

Trend finite_trend(double x0, double x1, double thr) {
  const double d = x1 - x0;
  if (d > thr) return Trend::kUp;
  if (d < -thr) return Trend::kDown;
  return Trend::kFlat;
}

Trend utility_trend(double x0, double x1, double thr) {
  if (std::abs(x0) <= thr && std::abs(x1) <= thr) return Trend::kZero;
  return finite_trend(x0, x1, thr);
}

Trend log_trend(const LogWelfare& x0, const LogWelfare& x1, double thr) {
  if (x0.is_neg_infinity() && x1.is_neg_infinity()) return Trend::kNegInfinity;
  if (x1.is_neg_infinity()) return Trend::kDown;
  if (x0.is_neg_infinity()) return Trend::kUp;
  return finite_trend(x0.value(), x1.value(), thr);
}

double group_utility(const SweepRecord& r, const Population& pop,
                     std::size_t from, std::size_t to) {
  double s = 0.0;
  for (std::size_t i = from; i < to; ++i) {
    s += pop.weight(i) * r.solution.utilities[i];
  }
  return s;
}

struct Cell {
  Signature sig{};
  std::vector<Trend> demand;
  std::size_t split = 0;
  int label = 0;
};

bool same(const Cell& x, const RegimeSegment& s) {
  return x.sig == s.signs && x.demand == s.demand_signs &&
         x.split == s.split && x.label == s.label;
}

// Common demand direction of a group: strict requires identical trends,
// otherwise flat members are ignored. nullopt when the group disagrees.
std::optional<Trend> group_direction(const std::vector<Trend>& d,
                                     std::size_t from, std::size_t to,
                                     bool strict) {
  std::optional<Trend> dir;
  for (std::size_t i = from; i < to; ++i) {
    if (!strict && d[i] == Trend::kFlat) continue;
    if (dir && *dir != d[i]) return std::nullopt;
    dir = d[i];
  }
  return dir ? dir : std::optional<Trend>(Trend::kFlat);
}

// First split index whose two groups move in different directions, or 0.
std::size_t find_split(const std::vector<Trend>& d, bool strict) {
  for (std::size_t s = 1; s < d.size(); ++s) {
    const auto left = group_direction(d, 0, s, strict);
    const auto right = group_direction(d, s, d.size(), strict);
    if (left && right && *left != *right) return s;
  }
  return 0;
}

int match(const Signature& sig, Criterion c) {
  const auto& table = regime_table(c);
  for (std::size_t r = 0; r < table.size(); ++r) {
    if (table[r] == sig) return static_cast<int>(r) + 1;
  }
  return 0;
}

}  // namespace

std::vector<double> uniform_grid(int points) {
  if (points < 2) throw ModelError("uniform_grid needs at least 2 points");
  std::vector<double> g(points);
  for (int k = 0; k < points; ++k) {
    g[k] = static_cast<double>(k) / (points - 1);
  }
  return g;
}

std::vector<double> grid_from_step(double step) {
  if (!(step > 0.0 && step <= 1.0)) {
    throw ModelError("grid step must lie in (0, 1]");
  }
  const double cells = std::round(1.0 / step);
  if (std::abs(cells * step - 1.0) > 1e-9) {
    throw ModelError("grid step must divide 1 evenly");
  }
  return uniform_grid(static_cast<int>(cells) + 1);
}

std::vector<SweepRecord> sweep(const Population& pop, const MarketParams& mkt,
                               Criterion criterion,
                               const std::vector<double>& grid,
                               const FairOptions& opt) {
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!(grid[k] >= 0.0 && grid[k] <= 1.0)) {
      throw ModelError("sweep grid values must lie in [0, 1]");
    }
    if (k > 0 && !(grid[k] > grid[k - 1])) {
      throw ModelError("sweep grid must be strictly ascending");
    }
  }
  FairnessSpec spec = make_spec(pop, mkt, criterion, 0.0);
  std::vector<SweepRecord> out;
  out.reserve(grid.size());
  for (double alpha : grid) {
    spec.alpha = alpha;
    SweepRecord r;
    r.alpha = alpha;
    try {
      r.solution = solve_fair(pop, mkt, spec, opt).solution;
    } catch (const std::exception& e) {
      throw std::runtime_error("sweep failed at alpha=" +
                               format_double(alpha) + ": " + e.what());
    }
    r.report = report(r.solution, pop, mkt);
    out.push_back(std::move(r));
  }
  return out;
}

std::string to_string(Trend t) {
  switch (t) {
    case Trend::kUp:
      return "up";
    case Trend::kFlat:
      return "flat";
    case Trend::kDown:
      return "down";
    case Trend::kZero:
      return "zero";
    case Trend::kNegInfinity:
      return "-inf";
  }
  return "?";
}

const std::vector<Signature>& regime_table(Criterion c) {
  using T = Trend;
  static const std::vector<Signature> energy = {
      Signature{T::kFlat, T::kUp, T::kUp, T::kUp, T::kUp},
      Signature{T::kDown, T::kUp, T::kDown, T::kUp, T::kUp},
      Signature{T::kDown, T::kUp, T::kDown, T::kDown, T::kDown},
      Signature{T::kUp, T::kDown, T::kUp, T::kDown, T::kDown},
  };
  static const std::vector<Signature> price = {
      Signature{T::kFlat, T::kUp, T::kUp, T::kUp, T::kUp},
      Signature{T::kDown, T::kUp, T::kDown, T::kUp, T::kUp},
      Signature{T::kZero, T::kFlat, T::kNegInfinity, T::kFlat, T::kFlat},
  };
  static const std::vector<Signature> utility = {
      Signature{T::kUp, T::kDown, T::kUp, T::kDown, T::kDown},
      Signature{T::kUp, T::kDown, T::kUp, T::kUp, T::kDown},
      Signature{T::kFlat, T::kDown, T::kDown, T::kDown, T::kDown},
      Signature{T::kUp, T::kFlat, T::kUp, T::kUp, T::kFlat},
  };
  switch (c) {
    case Criterion::kEnergy:
      return energy;
    case Criterion::kPrice:
      return price;
    case Criterion::kUtility:
      return utility;
  }
  return energy;
}

Classification classify(const std::vector<SweepRecord>& records,
                        const Population& pop, Criterion criterion,
                        double eps) {
  if (records.size() < 3) throw ModelError("classify needs at least 3 records");
  const std::size_t n = pop.size();
  const std::size_t cells = records.size() - 1;

  std::vector<Range> demand_range(n);
  Range cnw, total, sw;
  for (const auto& r : records) {
    for (std::size_t i = 0; i < n; ++i) demand_range[i].add(r.solution.demands[i]);
    if (!r.report.cnw.is_neg_infinity()) cnw.add(r.report.cnw.value());
    total.add(r.report.total_utility);
    sw.add(r.report.social_welfare);
  }
  std::map<std::size_t, std::pair<double, double>> group_thr;
  auto thresholds_for = [&](std::size_t split) {
    auto it = group_thr.find(split);
    if (it != group_thr.end()) return it->second;
    Range g1, g2;
    for (const auto& r : records) {
      g1.add(group_utility(r, pop, 0, split));
      g2.add(group_utility(r, pop, split, n));
    }
    auto v = std::make_pair(g1.threshold(eps), g2.threshold(eps));
    group_thr.emplace(split, v);
    return v;
  };

  std::size_t last_split = n - 1;
  std::vector<Cell> cs(cells);
  for (std::size_t k = 0; k < cells; ++k) {
    const auto& r0 = records[k];
    const auto& r1 = records[k + 1];
    Cell& c = cs[k];
    c.demand.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      c.demand[i] = finite_trend(r0.solution.demands[i], r1.solution.demands[i],
                                 demand_range[i].threshold(eps));
    }
    // Two groups in capacity order, each moving its demand one way. Exact
    // agreement is tried first; then flat members may join either group.
    bool groupable = true;
    std::size_t split = 0;
    if (n == 2) {
      split = 1;
    } else {
      split = find_split(c.demand, true);
      if (split == 0) split = find_split(c.demand, false);
      if (split == 0) {
        groupable = std::all_of(c.demand.begin(), c.demand.end(),
                                [&](Trend t) { return t == c.demand[0]; });
        split = last_split;
      }
      last_split = split;
    }
    c.split = split;
    const auto [thr1, thr2] = thresholds_for(split);
    c.sig[0] = utility_trend(group_utility(r0, pop, 0, split),
                             group_utility(r1, pop, 0, split), thr1);
    c.sig[1] = utility_trend(group_utility(r0, pop, split, n),
                             group_utility(r1, pop, split, n), thr2);
    c.sig[2] = log_trend(r0.report.cnw, r1.report.cnw, cnw.threshold(eps));
    c.sig[3] = finite_trend(r0.report.total_utility, r1.report.total_utility,
                            total.threshold(eps));
    c.sig[4] = finite_trend(r0.report.social_welfare, r1.report.social_welfare,
                            sw.threshold(eps));
    c.label = groupable ? match(c.sig, criterion) : 0;
  }

  Classification out;
  std::vector<std::size_t> first_cell;
  for (std::size_t k = 0; k < cells; ++k) {
    if (!out.segments.empty() && same(cs[k], out.segments.back())) {
      out.segments.back().alpha_hi = records[k + 1].alpha;
      continue;
    }
    RegimeSegment s;
    s.alpha_lo = records[k].alpha;
    s.alpha_hi = records[k + 1].alpha;
    s.signs = cs[k].sig;
    s.demand_signs = cs[k].demand;
    s.split = cs[k].split;
    s.label = cs[k].label;
    out.segments.push_back(std::move(s));
    first_cell.push_back(k);
  }
  const std::size_t m = out.segments.size();
  // A lone cell whose label differs from both neighbours is the kink between
  // two regimes smeared over one grid step.
  for (std::size_t j = 1; j + 1 < m; ++j) {
    auto& s = out.segments[j];
    const std::size_t len = first_cell[j + 1] - first_cell[j];
    if (len == 1 && s.label != out.segments[j - 1].label &&
        s.label != out.segments[j + 1].label) {
      s.transition_cell = true;
    }
  }

  // Label sequence and change points.
  int prev = -1;
  double pending = -1.0;  // midpoint of a transition cell, if any
  for (const auto& s : out.segments) {
    if (s.transition_cell) {
      pending = 0.5 * (s.alpha_lo + s.alpha_hi);
      continue;
    }
    if (s.label != prev) {
      if (prev != -1) out.thresholds.push_back(pending >= 0.0 ? pending : s.alpha_lo);
      out.sequence.push_back(s.label);
      prev = s.label;
    }
    pending = -1.0;
  }

  out.record_labels.assign(records.size(), 0);
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t end = j + 1 < m ? first_cell[j + 1] : cells;
    const int lab = out.segments[j].transition_cell ? -1 : out.segments[j].label;
    for (std::size_t k = first_cell[j]; k < end; ++k) out.record_labels[k] = lab;
  }
  out.record_labels.back() = out.record_labels[cells - 1];
  return out;
}

TransitionVerdict validate_transitions(const std::vector<int>& sequence,
                                       Criterion criterion) {
  std::set<std::pair<int, int>> edges;
  std::set<int> starts, ends;
  switch (criterion) {
    case Criterion::kEnergy:
      edges = {{1, 2}, {1, 3}};
      starts = {1, 2, 3, 4};
      ends = {2, 3, 4};
      break;
    case Criterion::kPrice:
      edges = {{1, 2}, {2, 3}};
      starts = {1, 2, 3};
      ends = {1, 2, 3};
      break;
    case Criterion::kUtility:
      edges = {{1, 2}, {1, 3}, {1, 4}, {2, 3}, {2, 4}, {3, 4}};
      starts = {1, 3, 4};
      ends = {1, 2, 4};
      break;
  }
  TransitionVerdict v;
  v.sequence = sequence;
  if (sequence.empty()) {
    v.failures.push_back("empty regime sequence");
    return v;
  }
  for (int lab : sequence) {
    if (lab == 0) v.failures.push_back("unmatched segment in sequence");
  }
  if (!starts.count(sequence.front())) {
    v.failures.push_back("sequence cannot start in " + label_name(sequence.front()));
  }
  for (std::size_t k = 1; k < sequence.size(); ++k) {
    if (!edges.count({sequence[k - 1], sequence[k]})) {
      v.failures.push_back("no transition " + label_name(sequence[k - 1]) +
                           " -> " + label_name(sequence[k]));
    }
  }
  if (!ends.count(sequence.back())) {
    v.failures.push_back("sequence cannot end in " + label_name(sequence.back()));
  }
  v.pass = v.failures.empty();
  return v;
}

TransitionVerdict validate_transitions(const Classification& c,
                                       Criterion criterion) {
  return validate_transitions(c.sequence, criterion);
}

std::string label_name(int label) {
  if (label < 0) return "transition";
  if (label == 0) return "unmatched";
  return "R" + std::to_string(label);
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRecord>& records,
                     const Population& pop, const Classification& regimes) {
  os << "alpha";
  for (std::size_t i = 0; i < pop.size(); ++i) os << ",p_" << i + 1;
  for (std::size_t i = 0; i < pop.size(); ++i) os << ",D_" << i + 1;
  for (std::size_t i = 0; i < pop.size(); ++i) os << ",U_" << i + 1;
  os << ",profit,total_utility,cnw,social_welfare,regime_label\n";
  for (std::size_t k = 0; k < records.size(); ++k) {
    const auto& r = records[k];
    os << format_double(r.alpha);
    for (double v : r.solution.prices) os << ',' << format_double(v);
    for (double v : r.solution.demands) os << ',' << format_double(v);
    for (double v : r.solution.utilities) os << ',' << format_double(v);
    os << ',' << format_double(r.report.profit) << ','
       << format_double(r.report.total_utility) << ','
       << r.report.cnw.to_string() << ','
       << format_double(r.report.social_welfare) << ',';
    os << (k < regimes.record_labels.size()
               ? label_name(regimes.record_labels[k])
               : std::string("unmatched"))
       << '\n';
  }
}

void write_segments_csv(std::ostream& os, const Classification& regimes) {
  os << "alpha_lo,alpha_hi,label,u_group1,u_group2,cnw,total_utility,"
        "social_welfare,split\n";
  for (const auto& s : regimes.segments) {
    os << format_double(s.alpha_lo) << ',' << format_double(s.alpha_hi) << ','
       << (s.transition_cell ? std::string("transition") : label_name(s.label));
    for (Trend t : s.signs) os << ',' << to_string(t);
    os << ',' << s.split << '\n';
  }
}

}  // namespace vppfair
