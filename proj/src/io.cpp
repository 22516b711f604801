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

#include "vppfair/io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>


namespace vppfair {

using nlohmann::json;

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, target);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

}  // namespace

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

int CsvTable::require(const std::string& name) const {
  const int c = column(name);
  if (c < 0) throw ModelError("CSV is missing column '" + name + "'");
  return c;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  CsvTable t;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    for (auto& f : fields) f = trim(f);
    if (first) {
      if (!fields.empty() && fields[0].rfind("\xEF\xBB\xBF", 0) == 0) {
        fields[0] = fields[0].substr(3);
      }
      t.header = std::move(fields);
      first = false;
    } else {
      t.rows.push_back(std::move(fields));
    }
  }
  if (first) throw ModelError("CSV '" + path + "' is empty");
  return t;
}

double parse_double(const std::string& s, const std::string& what) {
  const std::string v = trim(s);
  if (v.empty()) throw ModelError(what + ": empty number");
  char* end = nullptr;
  errno = 0;
  const double d = std::strtod(v.c_str(), &end);
  if (end != v.c_str() + v.size() || errno == ERANGE) {
    throw ModelError(what + ": cannot parse '" + v + "' as a number");
  }
  return d;
}

Population population_from_json(const json& j) {
  try {
    CostParams cost{j.at("a").get<double>(), j.at("b").get<double>()};
    std::vector<ConsumerParams> consumers;
    for (const auto& c : j.at("consumers")) {
      ConsumerParams p;
      p.id = c.contains("id") ? (c["id"].is_string() ? c["id"].get<std::string>()
                                                     : c["id"].dump())
                              : std::to_string(consumers.size() + 1);
      p.capacity = c.at("capacity").get<double>();
      p.weight = c.value("weight", 1L);
      consumers.push_back(std::move(p));
    }
    return Population(cost, std::move(consumers));
  } catch (const json::exception& e) {
    throw ModelError(std::string("population JSON: ") + e.what());
  }
}

json population_to_json(const Population& pop) {
  json j;
  j["a"] = pop.cost().a;
  j["b"] = pop.cost().b;
  j["consumers"] = json::array();
  for (const auto& c : pop.consumers()) {
    j["consumers"].push_back(
        {{"id", c.id}, {"capacity", c.capacity}, {"weight", c.weight}});
  }
  return j;
}

Population load_population(const std::string& path) {
  const std::filesystem::path p(path);
  if (p.extension() == ".json") {
    try {
      return population_from_json(json::parse(read_text_file(path)));
    } catch (const json::parse_error& e) {
      throw ModelError("population JSON '" + path + "': " + e.what());
    }
  }
  const CsvTable t = read_csv(path);
  const int ca = t.require("a"), cb = t.require("b"), cid = t.require("id"),
            cc = t.require("capacity");
  const int cw = t.column("weight");
  std::optional<CostParams> cost;
  std::vector<ConsumerParams> consumers;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::string where = path + " row " + std::to_string(r + 2);
    if (row.size() < t.header.size()) throw ModelError(where + ": too few fields");
    const CostParams c{parse_double(row[ca], where), parse_double(row[cb], where)};
    if (cost && (cost->a != c.a || cost->b != c.b)) {
      throw ModelError(where + ": a and b must be the same on every row");
    }
    cost = c;
    ConsumerParams p;
    p.id = row[cid];
    p.capacity = parse_double(row[cc], where);
    p.weight = cw >= 0 && !row[cw].empty()
                   ? static_cast<long>(parse_double(row[cw], where))
                   : 1;
    consumers.push_back(std::move(p));
  }
  if (!cost) throw ModelError("population CSV '" + path + "' has no rows");
  return Population(*cost, std::move(consumers));
}

MarketParams market_from_json(const json& j, const Population& pop) {
  try {
    const double pi = j.at("pi").get<double>();
    if (j.contains("d_s")) return MarketParams{pi, j["d_s"].get<double>()};
    return market_from_fraction(pop, pi, j.at("d_s_fraction").get<double>());
  } catch (const json::exception& e) {
    throw ModelError(std::string("market JSON: ") + e.what());
  }
}

MarketParams load_market(const std::string& path, const Population& pop) {
  try {
    return market_from_json(json::parse(read_text_file(path)), pop);
  } catch (const json::parse_error& e) {
    throw ModelError("market JSON '" + path + "': " + e.what());
  }
}

json solution_to_json(const EquilibriumSolution& sol) {
  const auto& m = sol.multipliers;
  return json{{"prices", sol.prices},
              {"demands", sol.demands},
              {"utilities", sol.utilities},
              {"profit", sol.profit},
              {"multipliers",
               {{"lambda", m.lambda},
                {"eta", m.eta},
                {"mu", m.mu},
                {"nu", m.nu},
                {"kkt_residual", m.kkt_residual}}}};
}

EquilibriumSolution solution_from_json(const json& j) {
  try {
    EquilibriumSolution s;
    s.prices = j.at("prices").get<std::vector<double>>();
    s.demands = j.at("demands").get<std::vector<double>>();
    s.utilities = j.at("utilities").get<std::vector<double>>();
    s.profit = j.at("profit").get<double>();
    if (j.contains("multipliers")) {
      const auto& m = j["multipliers"];
      s.multipliers.lambda = m.value("lambda", 0.0);
      s.multipliers.eta = m.value("eta", 0.0);
      s.multipliers.mu = m.value("mu", std::vector<double>{});
      s.multipliers.nu = m.value("nu", std::vector<double>{});
      s.multipliers.kkt_residual = m.value("kkt_residual", 0.0);
    }
    return s;
  } catch (const json::exception& e) {
    throw ModelError(std::string("solution JSON: ") + e.what());
  }
}

json report_to_json(const PerformanceReport& r) {
  auto log_json = [](const LogWelfare& v) {
    return v.is_neg_infinity() ? json("-inf") : json(v.value());
  };
  return json{{"profit", r.profit},
              {"total_utility", r.total_utility},
              {"social_welfare", r.social_welfare},
              {"cnw", log_json(r.cnw)},
              {"dcnw", log_json(r.dcnw)}};
}

}  // namespace vppfair
