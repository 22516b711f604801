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

// File input and output: population and market files, solution JSON, CSV
// helpers, and atomic writes.

#ifndef VPPFAIR_IO_HPP_
#define VPPFAIR_IO_HPP_

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vppfair/consumer_model.hpp"
#include "vppfair/welfare_metrics.hpp"

namespace vppfair {

std::string read_text_file(const std::string& path);

/// Writes to a sibling temp file, then renames over `path`.
void write_atomic(const std::string& path, const std::string& content);

/// Splits one CSV line; double quotes may wrap fields and escape quotes.
std::vector<std::string> split_csv_line(const std::string& line);

/// Rows of a CSV file keyed by header name. Blank lines are skipped.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  /// Column index or -1.
  int column(const std::string& name) const;
  /// Column index; throws ModelError when missing.
  int require(const std::string& name) const;
};
CsvTable read_csv(const std::string& path);

/// {a, b, consumers: [{id, capacity, weight}]}.
Population population_from_json(const nlohmann::json& j);
nlohmann::json population_to_json(const Population& pop);

/// JSON (by extension .json) or CSV with columns a,b,id,capacity,weight.
Population load_population(const std::string& path);

/// {pi, d_s} or {pi, d_s_fraction}.
MarketParams market_from_json(const nlohmann::json& j, const Population& pop);
MarketParams load_market(const std::string& path, const Population& pop);

nlohmann::json solution_to_json(const EquilibriumSolution& sol);
EquilibriumSolution solution_from_json(const nlohmann::json& j);
nlohmann::json report_to_json(const PerformanceReport& r);

/// Parses a double, rejecting trailing garbage. Throws ModelError.
double parse_double(const std::string& s, const std::string& what);

}  // namespace vppfair

#endif  // VPPFAIR_IO_HPP_
