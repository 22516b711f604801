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
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "vppfair/casestudy_pipeline.hpp"

using namespace vppfair;

namespace {

std::string temp_file(const std::string& name, const std::string& content) {
  const auto dir = std::filesystem::temp_directory_path() / "vppfair_unit";
  std::filesystem::create_directories(dir);
  const auto path = dir / name;
  std::ofstream(path) << content;
  return path.string();
}

ParticipantRecord person(std::string id, bool exp, std::string phase, bool price,
                         bool survey) {
  return {std::move(id), exp, std::move(phase), price, survey};
}

HourlyRecord obs(std::string id, int hour, double q, std::optional<double> p) {
  HourlyRecord r;
  r.participant_id = std::move(id);
  r.hour_of_day = hour;
  r.consumption = q;
  r.price = p;
  return r;
}

}  // namespace

TEST_SUITE("casestudy_pipeline") {

TEST_CASE("filter stage counts") {
  const std::vector<ParticipantRecord> ps = {
      person("a", true, "2", true, true),  person("b", false, "2", true, true),
      person("c", true, "1", true, true),  person("d", true, "2", false, true),
      person("e", true, "2", true, false), person("f", true, "2", true, true)};
  const FilterResult r = filter_sample(ps);
  CHECK(r.stages.total == 6);
  CHECK(r.stages.experiments == 5);
  CHECK(r.stages.phase2 == 4);
  CHECK(r.stages.price_group == 3);
  CHECK(r.stages.survey3 == 2);
  CHECK(r.ids == std::vector<std::string>{"a", "f"});
}

TEST_CASE("filter edge cases") {
  const FilterResult empty = filter_sample({});
  CHECK(empty.ids.empty());
  CHECK(empty.stages.total == 0);
  CHECK(empty.stages.survey3 == 0);
  const FilterResult one = filter_sample({person("x", true, "1", true, true)});
  CHECK(one.stages.experiments == 1);
  CHECK(one.stages.phase2 == 0);
  CHECK(one.ids.empty());
}

TEST_CASE("filter result does not depend on predicate order") {
  std::mt19937_64 rng(5);
  std::bernoulli_distribution coin(0.6);
  std::vector<ParticipantRecord> ps;
  for (int i = 0; i < 500; ++i) {
    ps.push_back(person(std::to_string(i), coin(rng), coin(rng) ? "2" : "1",
                        coin(rng), coin(rng)));
  }
  std::vector<std::string> expected;
  for (const auto& p : ps) {
    if (p.survey3_answered && p.price_group && p.phase == "2" &&
        p.participated_experiments) {
      expected.push_back(p.id);
    }
  }
  CHECK(filter_sample(ps).ids == expected);
}

TEST_CASE("perfect linear fit") {
  std::vector<double> q, p;
  for (int i = 0; i < 10; ++i) {
    q.push_back(0.5 * i);
    p.push_back(-0.5 * q.back() + 3.0);
  }
  const OlsFit f = ordinary_least_squares(q, p);
  CHECK(f.slope == doctest::Approx(-0.5));
  CHECK(f.intercept == doctest::Approx(3.0));
  CHECK(f.p_value < 1e-12);
}

TEST_CASE("OLS matches reference statistics") {
  // Reference values from an independent regression routine.
  const OlsFit f = ordinary_least_squares({1, 2, 3, 4, 5, 6}, {2.3, 2.9, 4.2, 4.8, 6.1, 6.4});
  CHECK(f.slope == doctest::Approx(0.8771428571428572));
  CHECK(f.intercept == doctest::Approx(1.38));
  CHECK(f.slope_se == doctest::Approx(0.062204403020220574));
  CHECK(f.p_value == doctest::Approx(0.00014680196082790845).epsilon(1e-6));
  const OlsFit g = ordinary_least_squares({0.5, 1, 1.5, 2, 2.5, 3, 3.5, 4},
                                          {3.1, 2.2, 3.3, 1.9, 2.8, 2.4, 2.0, 2.6});
  CHECK(g.slope == doctest::Approx(-0.15));
  CHECK(g.p_value == doctest::Approx(0.3776355736879032).epsilon(1e-6));
}

TEST_CASE("OLS residuals are orthogonal to the regressor") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> noise(0.0, 0.3);
  std::vector<double> x, y;
  for (int i = 0; i < 200; ++i) {
    x.push_back(0.05 * i);
    y.push_back(4.0 - 0.04 * x.back() + noise(rng));
  }
  const OlsFit f = ordinary_least_squares(x, y);
  double s = 0.0, sx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    s += r;
    sx += r * x[i];
  }
  CHECK(std::abs(s) < 1e-9);
  CHECK(std::abs(sx) < 1e-9);
}

TEST_CASE("OLS errors") {
  CHECK_THROWS_AS(ordinary_least_squares({1, 2}, {1, 2}), ModelError);
  CHECK_THROWS_AS(ordinary_least_squares({1, 1, 1}, {1, 2, 3}), ModelError);
  CHECK_THROWS_AS(ordinary_least_squares({1, 2, 3}, {1, 2}), ModelError);
}

TEST_CASE("hourly estimate regresses price on consumption") {
  std::vector<HourlyRecord> recs;
  for (int i = 0; i < 12; ++i) {
    const double q = 1.0 + 0.25 * i;
    recs.push_back(obs("h" + std::to_string(i % 3), 13, q, -0.04 * q + 4.5));
    recs.push_back(obs("h0", 14, q, std::nullopt));  // unpriced, ignored
  }
  const HourEstimate e = estimate_hourly(recs, 13);
  CHECK(e.a_hat == doctest::Approx(0.04));
  CHECK(e.b_hat == doctest::Approx(4.5));
  CHECK(e.n_obs == 12);
  CHECK_THROWS_AS(estimate_hourly(recs, 14), ModelError);
}

TEST_CASE("hour selection on the published estimates") {
  const int hours[] = {8, 9, 12, 13, 14, 15, 19, 20};
  const double a[] = {0.0308, 0.0278, 0.0383, 0.0408, 0.0349, 0.0359, 0.0420, 0.0387};
  const double pv[] = {0.0207, 0.0414, 0.00757, 0.00646, 0.0205, 0.0177, 0.00223, 0.00459};
  std::vector<HourEstimate> est;
  for (int i = 0; i < 8; ++i) est.push_back({hours[i], a[i], 4.5, pv[i], 100});
  CHECK(select_hour(est) == 13);
  // Insignificant neighbours do not extend a run.
  est.push_back({10, 0.05, 4.5, 0.2, 100});
  CHECK(select_hour(est) == 13);
}

TEST_CASE("hour selection rules") {
  CHECK(select_hour({{7, 0.01, 4, 0.01, 10}}) == 7);
  CHECK_THROWS_AS(select_hour({{7, 0.01, 4, 0.2, 10}}), ModelError);
  // Two runs of length 2; the later one holds the largest estimate.
  const std::vector<HourEstimate> two_runs = {{3, 0.02, 4, 0.01, 10},
                                              {4, 0.03, 4, 0.01, 10},
                                              {8, 0.05, 4, 0.01, 10},
                                              {9, 0.01, 4, 0.01, 10}};
  CHECK(select_hour(two_runs) == 8);
  // Equal estimates inside the run: earliest hour.
  CHECK(select_hour({{5, 0.02, 4, 0.01, 10}, {6, 0.02, 4, 0.01, 10}}) == 5);
  // Midnight does not join hour 24 to hour 1.
  CHECK(select_hour({{24, 0.01, 4, 0.01, 10}, {1, 0.03, 4, 0.01, 10},
                     {2, 0.02, 4, 0.01, 10}, {23, 0.02, 4, 0.01, 10}}) == 1);
}

TEST_CASE("capacity is the mean over unpriced hours") {
  std::vector<HourlyRecord> recs = {obs("a", 13, 2.0, std::nullopt),
                                    obs("a", 13, 4.0, std::nullopt),
                                    obs("a", 13, 100.0, 4.2),
                                    obs("a", 12, 50.0, std::nullopt),
                                    obs("b", 13, 1.5, std::nullopt)};
  CHECK(estimate_capacity(recs, 13, "a") == doctest::Approx(3.0));
  CHECK(estimate_capacity(recs, 13, "b") == doctest::Approx(1.5));
  CHECK_THROWS_AS(estimate_capacity(recs, 13, "c"), ModelError);
  const auto all = estimate_capacities(recs, 13);
  CHECK(all.size() == 2);
  CHECK(all.at("a") == doctest::Approx(3.0));
}

TEST_CASE("clustering recovers separated groups") {
  std::vector<std::pair<std::string, double>> caps;
  for (int i = 0; i < 40; ++i) caps.emplace_back("x" + std::to_string(i), 1.0 + 0.001 * (i % 5));
  for (int i = 0; i < 25; ++i) caps.emplace_back("y" + std::to_string(i), 5.0);
  for (int i = 0; i < 10; ++i) caps.emplace_back("z" + std::to_string(i), 9.0);
  const ClusteringResult r = cluster_households(caps, 3, 42);
  REQUIRE(r.clusters.size() == 3);
  CHECK(r.clusters[0].count == 40);
  CHECK(r.clusters[1].count == 25);
  CHECK(r.clusters[2].count == 10);
  CHECK(r.clusters[0].mean_capacity == doctest::Approx(1.002));
  CHECK(r.clusters[1].mean_capacity == doctest::Approx(5.0));
  CHECK(r.clusters[2].cluster_id == 3);
  // Seven distinct values cap the elbow diagnostic at k = 7.
  REQUIRE(r.elbow_sse.size() == 7);
  for (std::size_t k = 1; k < r.elbow_sse.size(); ++k) {
    CHECK(r.elbow_sse[k] <= r.elbow_sse[k - 1] + 1e-12);
  }
  // Deterministic for a fixed seed.
  const ClusteringResult again = cluster_households(caps, 3, 42);
  CHECK(again.elbow_sse == r.elbow_sse);
}

TEST_CASE("single cluster is the global mean") {
  std::vector<std::pair<std::string, double>> caps = {{"a", 1}, {"b", 2}, {"c", 6}};
  const ClusteringResult r = cluster_households(caps, 1);
  REQUIRE(r.clusters.size() == 1);
  CHECK(r.clusters[0].mean_capacity == doctest::Approx(3.0));
  CHECK(r.elbow_sse[0] == doctest::Approx(4 + 1 + 9));
  CHECK_THROWS_AS(cluster_households({{"a", 1}, {"b", 1}}, 2), ModelError);
}

TEST_CASE("random data gives a monotone elbow") {
  std::mt19937_64 rng(17);
  std::lognormal_distribution<double> dist(0.5, 0.7);
  std::vector<std::pair<std::string, double>> caps;
  for (int i = 0; i < 600; ++i) caps.emplace_back(std::to_string(i), dist(rng));
  const ClusteringResult r = cluster_households(caps, 3, 1, 10);
  for (std::size_t k = 1; k < r.elbow_sse.size(); ++k) {
    CHECK(r.elbow_sse[k] <= r.elbow_sse[k - 1] + 1e-9);
  }
  CHECK(r.clusters[0].mean_capacity < r.clusters[1].mean_capacity);
  CHECK(r.clusters[1].mean_capacity < r.clusters[2].mean_capacity);
}

TEST_CASE("population from the published clusters") {
  const std::vector<ClusterSummary> cs = {{1, 0.907, 505, {}}, {2, 2.692, 497, {}},
                                          {3, 4.991, 231, {}}};
  const Population p = build_population(cs, 0.0408, 4.5686);
  CHECK(p.size() == 3);
  CHECK(p.weight(0) == 505);
  CHECK(4.5686 / 0.0408 == doctest::Approx(111.98).epsilon(1e-4));
  CHECK(0.8 * p.total_capacity() == doctest::Approx(2359.104));
  CHECK_THROWS_AS(build_population({cs[0]}, 0.0408, 4.5686), ModelError);
  CHECK_THROWS_AS(build_population(cs, 1.0, 4.5686), ModelError);
}

TEST_CASE("timestamps map to hour-ending labels") {
  CHECK(hour_of_timestamp("2023-01-10T12:00:00Z") == 13);
  CHECK(hour_of_timestamp("2023-01-10 00:00") == 1);
  CHECK(hour_of_timestamp("2023-01-10T23:00:00+01:00") == 24);
  CHECK_THROWS_AS(hour_of_timestamp("12:00"), ModelError);
  CHECK_THROWS_AS(hour_of_timestamp("2023-01-10T25:00"), ModelError);
}

TEST_CASE("CSV readers") {
  const std::string parts = temp_file(
      "participants.csv",
      "ID,Participation_Experiments,Participation_Phase,Control_Price_Phase2,Survey3_answered\n"
      "1,Yes,2,Price group,yes\n"
      "2,no,2,Control group,yes\n"
      "3,YES,2,price GROUP,No\n");
  const auto ps = read_participants_csv(parts);
  REQUIRE(ps.size() == 3);
  CHECK(ps[0].participated_experiments);
  CHECK(ps[0].price_group);
  CHECK(ps[2].price_group);
  CHECK_FALSE(ps[2].survey3_answered);
  CHECK(filter_sample(ps).ids == std::vector<std::string>{"1"});

  const std::string hourly = temp_file(
      "hourly.csv",
      "ID,timestamp,consumption_kwh,price_nok_per_kwh\n"
      "1,2023-02-01T12:00:00,1.25,4.51\n"
      "1,2023-02-02T12:00:00,2.5,\n"
      "1,2023-02-03T12:00:00,,\n");
  const auto hs = read_hourly_csv(hourly);
  REQUIRE(hs.size() == 2);
  CHECK(hs[0].hour_of_day == 13);
  CHECK(hs[0].price.value() == doctest::Approx(4.51));
  CHECK_FALSE(hs[1].price.has_value());

  const std::string clusters =
      temp_file("clusters.csv", "cluster_id,mean_capacity,count\n1,0.907,505\n2,2.692,497\n");
  const auto cs = read_cluster_summary_csv(clusters);
  REQUIRE(cs.size() == 2);
  CHECK(cs[1].count == 497);
  CHECK(cluster_summary_csv(cs) == "cluster_id,mean_capacity,count\n1,0.907,505\n2,2.692,497\n");

  const std::string bad = temp_file("bad.csv", "ID,timestamp\n1,2023\n");
  CHECK_THROWS_AS(read_hourly_csv(bad), ModelError);
}

}  // TEST_SUITE
