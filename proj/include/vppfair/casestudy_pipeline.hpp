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

// Case-study pipeline: sample filtering, hourly price-on-consumption OLS,
// analysis-hour selection, capacity estimation, and 1-D k-means
// clustering into a weighted population.

#ifndef VPPFAIR_CASESTUDY_PIPELINE_HPP_
#define VPPFAIR_CASESTUDY_PIPELINE_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vppfair/consumer_model.hpp"

namespace vppfair {

struct ParticipantRecord {
  std::string id;
  bool participated_experiments = false;
  std::string phase;  // raw value, e.g. "2"
  bool price_group = false;
  bool survey3_answered = false;
};

struct HourlyRecord {
  std::string participant_id;
  std::string timestamp;
  // Hour-ending label 1..24: the interval starting at 12:00 is hour 13.
  int hour_of_day = 1;
  double consumption = 0.0;
  std::optional<double> price;  // absent on non-experiment hours
};

struct HourEstimate {
  int hour = 0;
  double a_hat = 0.0;
  double b_hat = 0.0;
  double p_value = 1.0;
  std::size_t n_obs = 0;
};

struct ClusterSummary {
  int cluster_id = 0;  // 1-based, ascending mean capacity
  double mean_capacity = 0.0;
  long count = 0;
  std::vector<std::string> member_ids;
};

/// Counts after each filter: all, experiments = yes, phase 2, price group,
/// survey 3 answered.
struct FilterStages {
  std::size_t total = 0;
  std::size_t experiments = 0;
  std::size_t phase2 = 0;
  std::size_t price_group = 0;
  std::size_t survey3 = 0;
};

struct FilterResult {
  std::vector<std::string> ids;  // input order
  FilterStages stages;
};

FilterResult filter_sample(const std::vector<ParticipantRecord>& participants);

/// Pooled OLS of price on consumption over priced records at `hour`:
/// a_hat = -slope, b_hat = intercept, two-sided t-test p-value with n - 2
/// degrees of freedom. Throws ModelError with fewer than 3 observations or
/// zero consumption variance.
HourEstimate estimate_hourly(const std::vector<HourlyRecord>& records,
                             int hour);

/// OLS residuals y - (intercept + slope x) for diagnostics and tests.
struct OlsFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
};
OlsFit ordinary_least_squares(const std::vector<double>& x,
                              const std::vector<double>& y);

/// Longest run of consecutive significant hours (ties: larger max a_hat,
/// then earlier run); inside it the hour with the largest a_hat, earliest
/// on ties. Throws ModelError if nothing is significant.
int select_hour(const std::vector<HourEstimate>& estimates,
                double significance = 0.05);

/// Mean consumption over unpriced records of `id` at `hour`.
double estimate_capacity(const std::vector<HourlyRecord>& records, int hour,
                         const std::string& id);

/// Capacities of all ids at once, ordered by id. Ids without unpriced
/// observations at the hour are skipped.
std::map<std::string, double> estimate_capacities(
    const std::vector<HourlyRecord>& records, int hour);

struct ClusteringResult {
  std::vector<ClusterSummary> clusters;
  std::vector<double> elbow_sse;  // within-cluster SSE for k = 1..8
};

/// 1-D k-means with k-means++ seeding from a fixed-seed mt19937_64 and
/// `restarts` runs; best SSE wins, ties to the smaller first centroid.
ClusteringResult cluster_households(
    const std::vector<std::pair<std::string, double>>& capacities, int k = 3,
    std::uint64_t seed = 20260101, int restarts = 50);

/// One weighted consumer per cluster.
Population build_population(const std::vector<ClusterSummary>& clusters,
                            double a, double b);

// CSV readers for the documented input schemas.
std::vector<ParticipantRecord> read_participants_csv(const std::string& path);
std::vector<HourlyRecord> read_hourly_csv(const std::string& path);
std::vector<ClusterSummary> read_cluster_summary_csv(const std::string& path);
std::string cluster_summary_csv(const std::vector<ClusterSummary>& clusters);

/// Hour-ending label (1..24) of an ISO-8601 interval-start timestamp
/// ("YYYY-MM-DDTHH..." or with a space): "...T12:00" maps to 13.
int hour_of_timestamp(const std::string& ts);

}  // namespace vppfair

#endif  // VPPFAIR_CASESTUDY_PIPELINE_HPP_
