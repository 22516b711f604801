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

#include "vppfair/casestudy_pipeline.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cctype>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "vppfair/format.hpp"
#include "vppfair/io.hpp"

namespace vppfair {
namespace {

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool is_yes(const std::string& s) { return lower(s) == "yes"; }

bool is_phase2(const std::string& s) {
  if (s == "2") return true;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  return !s.empty() && end == s.c_str() + s.size() && v == 2.0;
}

struct KmeansRun {
  std::vector<double> centers;  // ascending
  std::vector<int> assign;
  double sse = std::numeric_limits<double>::infinity();
};

int nearest(const std::vector<double>& centers, double x) {
  int best = 0;
  for (int c = 1; c < static_cast<int>(centers.size()); ++c) {
    if (std::abs(x - centers[c]) < std::abs(x - centers[best])) best = c;
  }
  return best;
}

KmeansRun lloyd(const std::vector<double>& x, std::vector<double> centers) {
  const std::size_t n = x.size();
  KmeansRun run;
  run.centers = std::move(centers);
  std::sort(run.centers.begin(), run.centers.end());
  run.assign.assign(n, -1);
  for (int it = 0; it < 1000; ++it) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const int c = nearest(run.centers, x[i]);
      if (c != run.assign[i]) {
        run.assign[i] = c;
        changed = true;
      }
    }
    if (!changed) break;
    std::vector<double> sum(run.centers.size(), 0.0);
    std::vector<std::size_t> cnt(run.centers.size(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      sum[run.assign[i]] += x[i];
      ++cnt[run.assign[i]];
    }
    for (std::size_t c = 0; c < run.centers.size(); ++c) {
      if (cnt[c] > 0) run.centers[c] = sum[c] / static_cast<double>(cnt[c]);
    }
  }
  run.sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = x[i] - run.centers[run.assign[i]];
    run.sse += d * d;
  }
  return run;
}

KmeansRun kmeans_once(const std::vector<double>& x, int k, std::mt19937_64& rng) {
  const std::size_t n = x.size();
  KmeansRun run;
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  run.centers.push_back(x[pick(rng)]);
  std::vector<double> d2(n);
  while (static_cast<int>(run.centers.size()) < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (double c : run.centers) best = std::min(best, (x[i] - c) * (x[i] - c));
      d2[i] = best;
      total += best;
    }
    if (total <= 0.0) break;  // fewer distinct points than requested
    std::uniform_real_distribution<double> u(0.0, total);
    double r = u(rng);
    std::size_t chosen = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
      r -= d2[i];
      if (r <= 0.0 && d2[i] > 0.0) {
        chosen = i;
        break;
      }
    }
    run.centers.push_back(x[chosen]);
  }
  return lloyd(x, std::move(run.centers));
}

// `warm` (k - 1 centers) adds one extra start: those centers plus the point
// farthest from them. Lloyd never increases SSE, so the result is no worse
// than the (k - 1)-cluster solution.
KmeansRun kmeans_best(const std::vector<double>& x, int k, std::uint64_t seed,
                      int restarts, const KmeansRun* warm = nullptr) {
  std::mt19937_64 rng(seed);
  KmeansRun best;
  for (int r = 0; r < restarts + (warm ? 1 : 0); ++r) {
    KmeansRun run;
    if (r < restarts) {
      run = kmeans_once(x, k, rng);
    } else {
      std::size_t far = 0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (std::abs(x[i] - warm->centers[warm->assign[i]]) >
            std::abs(x[far] - warm->centers[warm->assign[far]])) {
          far = i;
        }
      }
      std::vector<double> init = warm->centers;
      init.push_back(x[far]);
      run = lloyd(x, std::move(init));
    }
    if (best.centers.empty()) {
      best = std::move(run);
      continue;
    }
    const double tol = 1e-12 * std::max(1.0, best.sse);
    const bool better = run.sse < best.sse - tol ||
                        (std::abs(run.sse - best.sse) <= tol &&
                         run.centers.front() < best.centers.front());
    if (better) best = std::move(run);
  }
  return best;
}

}  // namespace

FilterResult filter_sample(const std::vector<ParticipantRecord>& participants) {
  FilterResult out;
  auto& s = out.stages;
  s.total = participants.size();
  for (const auto& p : participants) {
    if (!p.participated_experiments) continue;
    ++s.experiments;
    if (!is_phase2(p.phase)) continue;
    ++s.phase2;
    if (!p.price_group) continue;
    ++s.price_group;
    if (!p.survey3_answered) continue;
    ++s.survey3;
    out.ids.push_back(p.id);
  }
  return out;
}

OlsFit ordinary_least_squares(const std::vector<double>& x,
                              const std::vector<double>& y) {
  if (x.size() != y.size()) throw ModelError("OLS: size mismatch");
  const std::size_t n = x.size();
  if (n < 3) throw ModelError("OLS: need at least 3 observations");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw ModelError("OLS: regressor has zero variance");
  OlsFit f;
  f.n = n;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    ssr += r * r;
  }
  const double dof = static_cast<double>(n - 2);
  f.slope_se = std::sqrt(ssr / dof / sxx);
  if (f.slope_se == 0.0) {
    f.p_value = f.slope == 0.0 ? 1.0 : 0.0;
  } else {
    const boost::math::students_t dist(dof);
    const double t = std::abs(f.slope / f.slope_se);
    f.p_value = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, t)));
  }
  return f;
}

HourEstimate estimate_hourly(const std::vector<HourlyRecord>& records,
                             int hour) {
  std::vector<double> q, p;
  for (const auto& r : records) {
    if (r.hour_of_day == hour && r.price) {
      q.push_back(r.consumption);
      p.push_back(*r.price);
    }
  }
  if (q.size() < 3) {
    throw ModelError("hour " + std::to_string(hour) +
                     ": fewer than 3 priced observations");
  }
  const OlsFit f = ordinary_least_squares(q, p);
  HourEstimate e;
  e.hour = hour;
  e.a_hat = -f.slope;
  e.b_hat = f.intercept;
  e.p_value = f.p_value;
  e.n_obs = f.n;
  return e;
}

int select_hour(const std::vector<HourEstimate>& estimates,
                double significance) {
  std::vector<HourEstimate> sig;
  for (const auto& e : estimates) {
    if (e.p_value < significance) sig.push_back(e);
  }
  if (sig.empty()) throw ModelError("no hour has a significant slope");
  std::sort(sig.begin(), sig.end(),
            [](const HourEstimate& l, const HourEstimate& r) { return l.hour < r.hour; });

  auto best_in = [&](std::size_t from, std::size_t to) {
    std::size_t b = from;
    for (std::size_t i = from + 1; i < to; ++i) {
      if (sig[i].a_hat > sig[b].a_hat) b = i;
    }
    return b;
  };
  std::size_t run_from = 0, run_to = 0;
  for (std::size_t i = 0; i < sig.size();) {
    std::size_t j = i + 1;
    while (j < sig.size() && sig[j].hour == sig[j - 1].hour + 1) ++j;
    const std::size_t len = j - i;
    const std::size_t best_len = run_to - run_from;
    if (len > best_len ||
        (len == best_len && sig[best_in(i, j)].a_hat >
                                sig[best_in(run_from, run_to)].a_hat)) {
      run_from = i;
      run_to = j;
    }
    i = j;
  }
  return sig[best_in(run_from, run_to)].hour;
}

double estimate_capacity(const std::vector<HourlyRecord>& records, int hour,
                         const std::string& id) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& r : records) {
    if (r.hour_of_day == hour && !r.price && r.participant_id == id) {
      sum += r.consumption;
      ++n;
    }
  }
  if (n == 0) {
    throw ModelError("no unpriced observations for '" + id + "' at hour " +
                     std::to_string(hour));
  }
  return sum / static_cast<double>(n);
}

std::map<std::string, double> estimate_capacities(
    const std::vector<HourlyRecord>& records, int hour) {
  std::map<std::string, std::pair<double, std::size_t>> acc;
  for (const auto& r : records) {
    if (r.hour_of_day == hour && !r.price) {
      auto& a = acc[r.participant_id];
      a.first += r.consumption;
      ++a.second;
    }
  }
  std::map<std::string, double> out;
  for (const auto& [id, a] : acc) out[id] = a.first / static_cast<double>(a.second);
  return out;
}

ClusteringResult cluster_households(
    const std::vector<std::pair<std::string, double>>& capacities, int k,
    std::uint64_t seed, int restarts) {
  if (k < 1) throw ModelError("k must be at least 1");
  if (restarts < 1) throw ModelError("restarts must be at least 1");
  std::vector<double> x;
  x.reserve(capacities.size());
  for (const auto& c : capacities) x.push_back(c.second);
  const std::set<double> distinct(x.begin(), x.end());
  if (static_cast<int>(distinct.size()) < k) {
    throw ModelError("fewer distinct capacities than clusters");
  }
  ClusteringResult out;
  const KmeansRun best = kmeans_best(x, k, seed, restarts);
  out.clusters.resize(best.centers.size());
  for (std::size_t c = 0; c < best.centers.size(); ++c) {
    out.clusters[c].cluster_id = static_cast<int>(c) + 1;
  }
  std::vector<double> sum(best.centers.size(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    auto& cl = out.clusters[best.assign[i]];
    ++cl.count;
    cl.member_ids.push_back(capacities[i].first);
    sum[best.assign[i]] += x[i];
  }
  for (std::size_t c = 0; c < out.clusters.size(); ++c) {
    out.clusters[c].mean_capacity = sum[c] / static_cast<double>(out.clusters[c].count);
  }
  const int kmax = std::min<int>(8, static_cast<int>(distinct.size()));
  KmeansRun prev;
  for (int kk = 1; kk <= kmax; ++kk) {
    prev = kmeans_best(x, kk, seed, restarts, kk > 1 ? &prev : nullptr);
    out.elbow_sse.push_back(prev.sse);
  }
  return out;
}

Population build_population(const std::vector<ClusterSummary>& clusters,
                            double a, double b) {
  if (clusters.empty()) throw ModelError("no clusters");
  std::vector<ClusterSummary> sorted = clusters;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const ClusterSummary& l, const ClusterSummary& r) {
                     return l.mean_capacity < r.mean_capacity;
                   });
  std::vector<ConsumerParams> consumers;
  for (const auto& c : sorted) {
    consumers.push_back({"cluster_" + std::to_string(c.cluster_id),
                         c.mean_capacity, c.count});
  }
  return Population(CostParams{a, b}, std::move(consumers));
}

int hour_of_timestamp(const std::string& ts) {
  if (ts.size() < 13 || (ts[10] != 'T' && ts[10] != ' ') ||
      !std::isdigit(static_cast<unsigned char>(ts[11])) ||
      !std::isdigit(static_cast<unsigned char>(ts[12]))) {
    throw ModelError("bad ISO-8601 timestamp '" + ts + "'");
  }
  const int h = (ts[11] - '0') * 10 + (ts[12] - '0');
  if (h > 23) throw ModelError("bad hour in timestamp '" + ts + "'");
  return h + 1;
}

std::vector<ParticipantRecord> read_participants_csv(const std::string& path) {
  const CsvTable t = read_csv(path);
  const int cid = t.require("ID");
  const int ce = t.require("Participation_Experiments");
  const int cp = t.require("Participation_Phase");
  const int cg = t.require("Control_Price_Phase2");
  const int cs = t.require("Survey3_answered");
  std::vector<ParticipantRecord> out;
  std::set<std::string> seen;
  for (const auto& row : t.rows) {
    if (row.size() < t.header.size()) continue;  // malformed row: skipped
    ParticipantRecord r;
    r.id = row[cid];
    if (!seen.insert(r.id).second) {
      throw ModelError("duplicate participant id '" + r.id + "'");
    }
    r.participated_experiments = is_yes(row[ce]);
    r.phase = row[cp];
    r.price_group = lower(row[cg]) == "price group";
    r.survey3_answered = is_yes(row[cs]);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<HourlyRecord> read_hourly_csv(const std::string& path) {
  const CsvTable t = read_csv(path);
  const int cid = t.require("ID");
  const int cts = t.require("timestamp");
  const int cq = t.require("consumption_kwh");
  const int cpr = t.require("price_nok_per_kwh");
  std::vector<HourlyRecord> out;
  out.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    const std::string where = path + " row " + std::to_string(i + 2);
    if (row.size() < t.header.size()) throw ModelError(where + ": too few fields");
    HourlyRecord r;
    r.participant_id = row[cid];
    r.timestamp = row[cts];
    r.hour_of_day = hour_of_timestamp(r.timestamp);
    if (row[cq].empty()) continue;  // no imputation of missing consumption
    r.consumption = parse_double(row[cq], where);
    if (r.consumption < 0.0) throw ModelError(where + ": negative consumption");
    if (!row[cpr].empty()) r.price = parse_double(row[cpr], where);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<ClusterSummary> read_cluster_summary_csv(const std::string& path) {
  const CsvTable t = read_csv(path);
  const int cid = t.require("cluster_id");
  const int cm = t.require("mean_capacity");
  const int cc = t.require("count");
  std::vector<ClusterSummary> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    const std::string where = path + " row " + std::to_string(i + 2);
    if (row.size() < t.header.size()) throw ModelError(where + ": too few fields");
    ClusterSummary c;
    c.cluster_id = static_cast<int>(parse_double(row[cid], where));
    c.mean_capacity = parse_double(row[cm], where);
    c.count = static_cast<long>(parse_double(row[cc], where));
    out.push_back(std::move(c));
  }
  return out;
}

std::string cluster_summary_csv(const std::vector<ClusterSummary>& clusters) {
  std::ostringstream os;
  os << "cluster_id,mean_capacity,count\n";
  for (const auto& c : clusters) {
    os << c.cluster_id << ',' << format_double(c.mean_capacity) << ','
       << c.count << '\n';
  }
  return os.str();
}

}  // namespace vppfair
