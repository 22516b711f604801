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

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "vppfair/cli.hpp"
#include "vppfair/io.hpp"

using namespace vppfair;
using nlohmann::json;

namespace {

RunConfig fig(const std::string& command, double a, double b, double pi,
              std::vector<double> caps, double ds) {
  RunConfig c;
  c.command = command;
  c.a = a;
  c.b = b;
  c.pi = pi;
  c.capacities = std::move(caps);
  c.d_s = ds;
  return c;
}

std::filesystem::path scratch() {
  const auto dir = std::filesystem::temp_directory_path() / "vppfair_cli_unit";
  std::filesystem::create_directories(dir);
  return dir;
}

std::string source_dir() { return VPPFAIR_SOURCE_DIR; }

}  // namespace

TEST_SUITE("cli_reporting") {

TEST_CASE("sweep writes one row per grid point") {
  RunConfig c = fig("sweep", 1, 5, 8.5, {3, 4}, 6.93);
  c.criterion = "energy";
  c.grid_step = 0.01;
  c.output = (scratch() / "sweep.csv").string();
  std::ostringstream out, err;
  REQUIRE(run(c, out, err) == 0);
  const std::string csv = read_text_file(c.output);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 102);
  const json summary = json::parse(out.str());
  CHECK(summary["sequence"] == json::array({1, 2}));
  CHECK(summary["rows"] == 101);
}

TEST_CASE("profit-only solve") {
  RunConfig c = fig("solve", 1, 9, 12, {1, 8}, 8);
  c.profit_only = true;
  std::ostringstream out, err;
  REQUIRE(run(c, out, err) == 0);
  const json j = json::parse(out.str());
  CHECK(j["solution"]["prices"][0].get<double>() == doctest::Approx(9.0));
  CHECK(j["solution"]["prices"][1].get<double>() == doctest::Approx(6.5));
}

TEST_CASE("solve output re-ingested by regimes reproduces the report") {
  RunConfig c = fig("solve", 1, 9, 12, {1, 8}, 8);
  c.criterion = "price";
  c.alpha = 0.9;
  c.output = (scratch() / "solve.json").string();
  std::ostringstream out, err;
  REQUIRE(run(c, out, err) == 0);
  const json j = json::parse(read_text_file(c.output));
  CHECK(j["report"]["cnw"] == "-inf");
  RunConfig r;
  r.command = "regimes";
  r.solution_path = c.output;
  std::ostringstream out2;
  CHECK(run(r, out2, err) == 0);
  const json back = json::parse(out2.str());
  CHECK(back["reproduced"] == true);
  CHECK(back["report"] == j["report"]);
}

TEST_CASE("identical configs give byte-identical output") {
  RunConfig c = fig("sweep", 1, 9, 9.4, {1.2, 3.5}, 4.5);
  c.criterion = "utility";
  c.grid_step = 0.05;
  std::ostringstream a, b, err;
  REQUIRE(run(c, a, err) == 0);
  REQUIRE(run(c, b, err) == 0);
  CHECK(a.str() == b.str());
}

TEST_CASE("regimes reports a verdict") {
  RunConfig c = fig("regimes", 1, 9, 12, {1, 8}, 8);
  c.criterion = "price";
  c.grid_step = 0.01;
  c.out_dir = (scratch() / "regimes").string();
  std::ostringstream out, err;
  CHECK(run(c, out, err) == 0);
  const json j = json::parse(out.str());
  CHECK(j["sequence"] == json::array({1, 2, 3}));
  CHECK(j["verdict"]["pass"] == true);
  CHECK(std::filesystem::exists(std::filesystem::path(c.out_dir) / "segments.csv"));
}

TEST_CASE("case study from the cluster summary file") {
  RunConfig c;
  c.command = "casestudy-solve";
  c.clusters_path = source_dir() + "/data/household_clusters.csv";
  c.criterion = "utility";
  c.alpha = 1.0;
  c.d_s_fraction = 0.8;
  std::ostringstream out, err;
  REQUIRE(run(c, out, err) == 0);
  const json j = json::parse(out.str());
  CHECK(j["percent_change"]["profit"].get<double>() == doctest::Approx(-6.45).epsilon(0.01));
  CHECK(j["market"]["d_s"].get<double>() == doctest::Approx(2359.104));
}

TEST_CASE("verify brackets the grid oracle") {
  RunConfig c = fig("verify", 1, 9, 12, {1, 8}, 8);
  c.resolution = 0.02;
  std::ostringstream out, err;
  CHECK(run(c, out, err) == 0);
  const json j = json::parse(out.str());
  CHECK(j["pass"] == true);
  CHECK(j["cases"].size() == 13);
}

TEST_CASE("errors are structured and nonzero") {
  std::ostringstream out, err;
  RunConfig bad = fig("solve", 1, 5, 8.5, {3, 4}, 9.0);  // cap above total capacity
  CHECK(run(bad, out, err) == 2);
  const json e = json::parse(err.str());
  CHECK(e["error"]["type"] == "model");
  std::ostringstream err2;
  RunConfig missing;
  missing.command = "casestudy-estimate";
  missing.participants_path = "/nonexistent/participants.csv";
  CHECK(run(missing, out, err2) == 2);
  CHECK(json::parse(err2.str())["error"]["type"] == "usage");
  std::ostringstream err3;
  RunConfig unknown;
  unknown.command = "plot";
  CHECK(run(unknown, out, err3) == 2);
}

TEST_CASE("tolerance comes from the environment") {
  RunConfig c = fig("solve", 1, 5, 8.5, {3, 4}, 6.93);
  c.alpha = 0.5;
  std::ostringstream out, err;
  setenv("VPPFAIR_TOL", "-1", 1);
  CHECK(run(c, out, err) == 2);
  setenv("VPPFAIR_TOL", "1e-10", 1);
  CHECK(run(c, out, err) == 0);
  unsetenv("VPPFAIR_TOL");
}

TEST_CASE("population and market files") {
  const auto dir = scratch();
  const std::string pop = (dir / "pop.csv").string();
  const std::string mkt = (dir / "mkt.json").string();
  write_atomic(pop, "id,a,b,capacity,weight\nlow,1,5,3,1\nhigh,1,5,4,1\n");
  write_atomic(mkt, R"({"pi": 8.5, "d_s": 6.93})");
  RunConfig c;
  c.command = "solve";
  c.population_path = pop;
  c.market_path = mkt;
  std::ostringstream out, err;
  REQUIRE(run(c, out, err) == 0);
  const json j = json::parse(out.str());
  CHECK(j["solution"]["demands"][1].get<double>() == doctest::Approx(3.75));
  CHECK(j["population"]["consumers"][0]["id"] == "low");
}

TEST_CASE("number lists") {
  CHECK(parse_number_list("3,4.5") == std::vector<double>{3, 4.5});
  CHECK_THROWS(parse_number_list("3,x"));
}

}  // TEST_SUITE
