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

// Command-line front end. `run` is separated from argument parsing so tests
// can drive every command in-process.

#ifndef VPPFAIR_CLI_HPP_
#define VPPFAIR_CLI_HPP_

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace vppfair {

struct RunConfig {
  // solve | sweep | regimes | casestudy-estimate | casestudy-cluster |
  // casestudy-solve | verify
  std::string command;

  // Population and market, either from files or inline flags.
  std::string population_path;
  std::string market_path;
  std::optional<double> a, b, pi, d_s, d_s_fraction;
  std::vector<double> capacities;
  std::vector<long> weights;

  std::string criterion = "energy";
  std::optional<double> alpha;
  bool profit_only = false;
  std::optional<double> grid_step;  // sweep grid; default 201 points
  double eps = 1e-6;                // regime classification threshold
  std::optional<double> tol;        // solver tolerance; env VPPFAIR_TOL
  double resolution = 0.01;         // verify: oracle price step

  std::string solution_path;  // regimes: re-ingest a `solve` report

  // Case study.
  std::string participants_path;
  std::string hourly_path;
  std::string clusters_path;
  std::optional<int> hour;
  int k = 3;
  int restarts = 50;
  std::uint64_t seed = 20260101;

  std::string output;   // main artifact; empty writes to `out`
  std::string out_dir;  // intermediate case-study artifacts
};

/// Exit codes: 0 success, 1 a check reported failure, 2 error. Errors are
/// written to `err` as a JSON object {"error": {"type", "message"}}.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Parses a comma-separated list of numbers.
std::vector<double> parse_number_list(const std::string& s);

}  // namespace vppfair

#endif  // VPPFAIR_CLI_HPP_
