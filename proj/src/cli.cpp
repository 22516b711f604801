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

#include "vppfair/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "vppfair/casestudy_pipeline.hpp"
#include "vppfair/consumer_model.hpp"
#include "vppfair/fairness_optimizer.hpp"
#include "vppfair/format.hpp"
#include "vppfair/io.hpp"
#include "vppfair/profit_optimizer.hpp"
#include "vppfair/regime_analyzer.hpp"
#include "vppfair/welfare_metrics.hpp"

namespace vppfair {
namespace {

using nlohmann::json;

// Published case-study defaults: hour-13 estimates and upper-market price.
constexpr double kCaseA = 0.0408;
constexpr double kCaseB = 4.5686;
constexpr double kCasePi = 5.0;
constexpr double kCaseFraction = 0.8;

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void emit(const RunConfig& cfg, std::ostream& out, const std::string& text) {
  if (cfg.output.empty()) {
    out << text;
  } else {
    write_atomic(cfg.output, text);
  }
}

void write_artifact(const RunConfig& cfg, const std::string& name,
                    const std::string& text) {
  if (cfg.out_dir.empty()) return;
  std::filesystem::create_directories(cfg.out_dir);
  write_atomic((std::filesystem::path(cfg.out_dir) / name).string(), text);
}

void require_file(const std::string& path, const char* flag) {
  if (path.empty()) throw UsageError(std::string(flag) + " is required");
  if (!std::filesystem::exists(path)) {
    throw UsageError(std::string(flag) + ": file not found: " + path);
  }
}

FairOptions options(const RunConfig& cfg) {
  FairOptions opt;
  if (cfg.tol) {
    opt.tol = *cfg.tol;
  } else if (const char* env = std::getenv("VPPFAIR_TOL")) {
    opt.tol = parse_double(env, "VPPFAIR_TOL");
  }
  if (!(opt.tol > 0.0)) throw UsageError("tolerance must be positive");
  return opt;
}

Population population(const RunConfig& cfg) {
  if (!cfg.population_path.empty()) {
    require_file(cfg.population_path, "--population");
    return load_population(cfg.population_path);
  }
  if (!cfg.a || !cfg.b || cfg.capacities.empty()) {
    throw UsageError("give --population or all of --a, --b, --cap");
  }
  if (!cfg.weights.empty() && cfg.weights.size() != cfg.capacities.size()) {
    throw UsageError("--weights must match --cap in length");
  }
  std::vector<ConsumerParams> cs;
  for (std::size_t i = 0; i < cfg.capacities.size(); ++i) {
    cs.push_back({std::to_string(i + 1), cfg.capacities[i],
                  cfg.weights.empty() ? 1L : cfg.weights[i]});
  }
  return Population(CostParams{*cfg.a, *cfg.b}, std::move(cs));
}

MarketParams market(const RunConfig& cfg, const Population& pop) {
  MarketParams m;
  if (!cfg.market_path.empty()) {
    require_file(cfg.market_path, "--market");
    m = load_market(cfg.market_path, pop);
  } else {
    if (!cfg.pi) throw UsageError("give --market or --pi");
    if (cfg.d_s && cfg.d_s_fraction) {
      throw UsageError("--ds and --ds-fraction are exclusive");
    }
    if (cfg.d_s) {
      m = MarketParams{*cfg.pi, *cfg.d_s};
    } else if (cfg.d_s_fraction) {
      m = market_from_fraction(pop, *cfg.pi, *cfg.d_s_fraction);
    } else {
      throw UsageError("give --ds or --ds-fraction");
    }
  }
  validate_market(pop, m);
  return m;
}

json market_json(const MarketParams& m) { return {{"pi", m.pi}, {"d_s", m.d_s}}; }

std::vector<double> grid(const RunConfig& cfg) {
  return cfg.grid_step ? grid_from_step(*cfg.grid_step) : uniform_grid();
}

json diagnostics_json(const FairDiagnostics& d) {
  return {{"partition", d.partition.to_string()},
          {"band_low", d.band_low},
          {"band_width", d.band_width},
          {"fairness_slack", d.fairness_slack},
          {"error_bound", d.error_bound},
          {"partitions_feasible", d.partitions_feasible},
          {"short_circuit", d.short_circuit}};
}

json segments_json(const Classification& c) {
  json segs = json::array();
  for (const auto& s : c.segments) {
    json signs = json::object();
    const char* names[] = {"u_group1", "u_group2", "cnw", "total_utility",
                           "social_welfare"};
    for (std::size_t k = 0; k < s.signs.size(); ++k) {
      signs[names[k]] = to_string(s.signs[k]);
    }
    json dsg = json::array();
    for (Trend t : s.demand_signs) dsg.push_back(to_string(t));
    segs.push_back({{"alpha_lo", s.alpha_lo},
                    {"alpha_hi", s.alpha_hi},
                    {"regime", label_name(s.transition_cell ? -1 : s.label)},
                    {"signs", signs},
                    {"demand_signs", dsg},
                    {"split", s.split}});
  }
  return segs;
}

int cmd_solve(const RunConfig& cfg, std::ostream& out) {
  const Population pop = population(cfg);
  const MarketParams mkt = market(cfg, pop);
  json j;
  j["command"] = "solve";
  j["population"] = population_to_json(pop);
  j["market"] = market_json(mkt);
  EquilibriumSolution sol;
  if (cfg.profit_only || !cfg.alpha) {
    ProfitSolution ps = solve_n(pop, mkt);
    sol = std::move(ps.solution);
    j["mode"] = "profit";
    j["nonparticipants"] = ps.nonparticipants;
    j["diagnostics"] = {{"lambda", ps.diagnostics.lambda},
                        {"bisection_iters", ps.diagnostics.bisection_iters},
                        {"cap_binding", ps.diagnostics.cap_binding}};
  } else {
    const Criterion c = parse_criterion(cfg.criterion);
    const FairnessSpec spec = make_spec(pop, mkt, c, *cfg.alpha);
    FairSolution fs = solve_fair(pop, mkt, spec, options(cfg));
    sol = std::move(fs.solution);
    j["mode"] = "fair";
    j["criterion"] = to_string(c);
    j["alpha"] = spec.alpha;
    j["baseline_disparity"] = spec.baseline;
    j["diagnostics"] = diagnostics_json(fs.diagnostics);
  }
  j["solution"] = solution_to_json(sol);
  j["report"] = report_to_json(report(sol, pop, mkt));
  emit(cfg, out, dump(j));
  return 0;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out) {
  const Population pop = population(cfg);
  const MarketParams mkt = market(cfg, pop);
  const Criterion c = parse_criterion(cfg.criterion);
  const auto records = sweep(pop, mkt, c, grid(cfg), options(cfg));
  const Classification cls = classify(records, pop, c, cfg.eps);
  std::ostringstream csv;
  write_sweep_csv(csv, records, pop, cls);
  emit(cfg, out, csv.str());
  if (!cfg.output.empty()) {
    out << dump({{"rows", records.size()},
                 {"sequence", cls.sequence},
                 {"thresholds", cls.thresholds}});
  }
  return 0;
}

int cmd_regimes(const RunConfig& cfg, std::ostream& out) {
  if (!cfg.solution_path.empty()) {
    require_file(cfg.solution_path, "--solution");
    json in;
    try {
      in = json::parse(read_text_file(cfg.solution_path));
    } catch (const json::exception& e) {
      throw ModelError(std::string("solution file: ") + e.what());
    }
    if (!in.contains("population") || !in.contains("market") ||
        !in.contains("solution")) {
      throw ModelError("solution file lacks population, market or solution");
    }
    const Population pop = population_from_json(in["population"]);
    const MarketParams mkt = market_from_json(in["market"], pop);
    const EquilibriumSolution sol = solution_from_json(in["solution"]);
    const json rep = report_to_json(report(sol, pop, mkt));
    const bool same = !in.contains("report") || in["report"] == rep;
    emit(cfg, out, dump({{"command", "regimes"},
                         {"report", rep},
                         {"reproduced", same}}));
    return same ? 0 : 1;
  }
  const Population pop = population(cfg);
  const MarketParams mkt = market(cfg, pop);
  const Criterion c = parse_criterion(cfg.criterion);
  const auto records = sweep(pop, mkt, c, grid(cfg), options(cfg));
  const Classification cls = classify(records, pop, c, cfg.eps);
  const TransitionVerdict v = validate_transitions(cls, c);
  std::ostringstream table;
  write_segments_csv(table, cls);
  write_artifact(cfg, "segments.csv", table.str());
  emit(cfg, out, dump({{"command", "regimes"},
                       {"criterion", to_string(c)},
                       {"segments", segments_json(cls)},
                       {"sequence", cls.sequence},
                       {"thresholds", cls.thresholds},
                       {"verdict",
                        {{"pass", v.pass}, {"failures", v.failures}}}}));
  return v.pass ? 0 : 1;
}

struct RawSample {
  FilterResult filter;
  std::vector<HourlyRecord> records;  // filtered participants only
};

RawSample load_raw(const RunConfig& cfg) {
  require_file(cfg.participants_path, "--participants");
  require_file(cfg.hourly_path, "--hourly");
  RawSample s;
  s.filter = filter_sample(read_participants_csv(cfg.participants_path));
  const std::set<std::string> keep(s.filter.ids.begin(), s.filter.ids.end());
  for (auto& r : read_hourly_csv(cfg.hourly_path)) {
    if (keep.count(r.participant_id)) s.records.push_back(std::move(r));
  }
  return s;
}

std::vector<HourEstimate> estimate_all(const std::vector<HourlyRecord>& recs) {
  std::vector<HourEstimate> out;
  for (int h = 1; h <= 24; ++h) {
    try {
      out.push_back(estimate_hourly(recs, h));
    } catch (const ModelError&) {
      // Hours without enough priced observations are simply not estimated.
    }
  }
  return out;
}

json stages_json(const FilterStages& s) {
  return {{"total", s.total},
          {"experiments", s.experiments},
          {"phase2", s.phase2},
          {"price_group", s.price_group},
          {"survey3", s.survey3}};
}

std::string estimates_csv(const std::vector<HourEstimate>& est) {
  std::ostringstream os;
  os << "hour,a_hat,b_hat,p_value,n_obs\n";
  for (const auto& e : est) {
    os << e.hour << ',' << format_double(e.a_hat) << ','
       << format_double(e.b_hat) << ',' << format_double(e.p_value) << ','
       << e.n_obs << '\n';
  }
  return os.str();
}

struct EstimateStage {
  RawSample sample;
  std::vector<HourEstimate> estimates;
  int hour = 0;
  HourEstimate chosen;
};

EstimateStage run_estimate(const RunConfig& cfg) {
  EstimateStage st;
  st.sample = load_raw(cfg);
  st.estimates = estimate_all(st.sample.records);
  st.hour = cfg.hour ? *cfg.hour : select_hour(st.estimates);
  auto it = std::find_if(st.estimates.begin(), st.estimates.end(),
                         [&](const HourEstimate& e) { return e.hour == st.hour; });
  if (it == st.estimates.end()) {
    throw ModelError("no estimate for hour " + std::to_string(st.hour));
  }
  st.chosen = *it;
  write_artifact(cfg, "hourly_estimates.csv", estimates_csv(st.estimates));
  return st;
}

ClusteringResult run_cluster(const RunConfig& cfg, const EstimateStage& st) {
  const auto caps = estimate_capacities(st.sample.records, st.hour);
  std::vector<std::pair<std::string, double>> list(caps.begin(), caps.end());
  ClusteringResult cr =
      cluster_households(list, cfg.k, cfg.seed, cfg.restarts);
  std::ostringstream capcsv;
  capcsv << "id,capacity\n";
  for (const auto& [id, v] : list) capcsv << id << ',' << format_double(v) << '\n';
  write_artifact(cfg, "capacities.csv", capcsv.str());
  std::ostringstream elbow;
  elbow << "k,sse\n";
  for (std::size_t i = 0; i < cr.elbow_sse.size(); ++i) {
    elbow << i + 1 << ',' << format_double(cr.elbow_sse[i]) << '\n';
  }
  write_artifact(cfg, "elbow.csv", elbow.str());
  write_artifact(cfg, "cluster_summary.csv", cluster_summary_csv(cr.clusters));
  return cr;
}

json estimate_json(const EstimateStage& st) {
  return {{"stages", stages_json(st.sample.filter.stages)},
          {"hour", st.hour},
          {"a", st.chosen.a_hat},
          {"b", st.chosen.b_hat},
          {"p_value", st.chosen.p_value},
          {"n_obs", st.chosen.n_obs}};
}

int cmd_estimate(const RunConfig& cfg, std::ostream& out) {
  const EstimateStage st = run_estimate(cfg);
  json j = estimate_json(st);
  j["command"] = "casestudy-estimate";
  emit(cfg, out, dump(j));
  return 0;
}

json clusters_json(const std::vector<ClusterSummary>& cs) {
  json arr = json::array();
  for (const auto& c : cs) {
    arr.push_back({{"cluster_id", c.cluster_id},
                   {"mean_capacity", c.mean_capacity},
                   {"count", c.count}});
  }
  return arr;
}

int cmd_cluster(const RunConfig& cfg, std::ostream& out) {
  const EstimateStage st = run_estimate(cfg);
  const ClusteringResult cr = run_cluster(cfg, st);
  json j = estimate_json(st);
  j["command"] = "casestudy-cluster";
  j["clusters"] = clusters_json(cr.clusters);
  j["elbow_sse"] = cr.elbow_sse;
  emit(cfg, out, dump(j));
  return 0;
}

double percent_change(double base, double value) {
  if (base == 0.0) return std::nan("");
  return 100.0 * (value - base) / std::abs(base);
}

int cmd_casestudy_solve(const RunConfig& cfg, std::ostream& out) {
  json j;
  j["command"] = "casestudy-solve";
  std::vector<ClusterSummary> clusters;
  double a = cfg.a.value_or(kCaseA);
  double b = cfg.b.value_or(kCaseB);
  if (!cfg.clusters_path.empty()) {
    require_file(cfg.clusters_path, "--clusters");
    clusters = read_cluster_summary_csv(cfg.clusters_path);
  } else {
    const EstimateStage st = run_estimate(cfg);
    clusters = run_cluster(cfg, st).clusters;
    if (!cfg.a) a = st.chosen.a_hat;
    if (!cfg.b) b = st.chosen.b_hat;
    j["estimate"] = estimate_json(st);
  }
  const Population pop = build_population(clusters, a, b);
  const double pi = cfg.pi.value_or(kCasePi);
  MarketParams mkt;
  if (cfg.d_s) {
    mkt = MarketParams{pi, *cfg.d_s};
  } else {
    mkt = market_from_fraction(pop, pi, cfg.d_s_fraction.value_or(kCaseFraction));
  }
  validate_market(pop, mkt);
  const Criterion c = parse_criterion(cfg.criterion);
  const double alpha = cfg.alpha.value_or(1.0);

  const EquilibriumSolution base = solve_n(pop, mkt).solution;
  const FairSolution fair =
      solve_fair(pop, mkt, make_spec(pop, mkt, c, alpha), options(cfg));
  const PerformanceReport r0 = report(base, pop, mkt);
  const PerformanceReport r1 = report(fair.solution, pop, mkt);

  j["population"] = population_to_json(pop);
  j["market"] = market_json(mkt);
  j["criterion"] = to_string(c);
  j["alpha"] = alpha;
  j["profit_only"] = {{"solution", solution_to_json(base)},
                      {"report", report_to_json(r0)}};
  j["fair"] = {{"solution", solution_to_json(fair.solution)},
               {"report", report_to_json(r1)},
               {"diagnostics", diagnostics_json(fair.diagnostics)}};
  j["percent_change"] = {
      {"profit", percent_change(r0.profit, r1.profit)},
      {"total_utility", percent_change(r0.total_utility, r1.total_utility)},
      {"social_welfare", percent_change(r0.social_welfare, r1.social_welfare)}};
  emit(cfg, out, dump(j));
  return 0;
}

// Compares solver output with the exhaustive grid oracle. For fairness
// cases the oracle enforces a band widened by its slack, so it is bracketed
// by the solver at the exact band and at the widened band.
int cmd_verify(const RunConfig& cfg, std::ostream& out) {
  const Population pop = population(cfg);
  const MarketParams mkt = market(cfg, pop);
  if (pop.size() > 4) throw UsageError("verify supports at most 4 consumers");
  const FairOptions opt = options(cfg);
  const std::vector<double> alphas =
      cfg.alpha ? std::vector<double>{*cfg.alpha}
                : std::vector<double>{0.25, 0.5, 0.75, 1.0};

  json cases = json::array();
  double max_shortfall = 0.0;  // oracle above the relaxed solver
  double max_gap = 0.0;        // solver above oracle beyond the grid bound
  bool pass = true;
  auto record = [&](const std::string& name, double alpha, double solver,
                    double relaxed, const OracleResult& orc) {
    const double tol = 1e-7 * std::max(1.0, std::abs(solver));
    const double shortfall = orc.solution.profit - relaxed;
    const double gap = solver - orc.solution.profit - orc.error_bound;
    const bool ok = orc.found && shortfall <= tol && gap <= tol;
    pass = pass && ok;
    max_shortfall = std::max(max_shortfall, shortfall);
    max_gap = std::max(max_gap, gap);
    cases.push_back({{"case", name},
                     {"alpha", alpha},
                     {"solver_profit", solver},
                     {"relaxed_solver_profit", relaxed},
                     {"oracle_profit", orc.found ? json(orc.solution.profit) : json()},
                     {"oracle_error_bound", orc.error_bound},
                     {"pass", ok}});
  };

  const double p0 = solve_n(pop, mkt).solution.profit;
  record("profit", 0.0, p0, p0, grid_oracle(pop, mkt, std::nullopt, cfg.resolution));
  for (Criterion c : {Criterion::kEnergy, Criterion::kPrice, Criterion::kUtility}) {
    for (double alpha : alphas) {
      const FairnessSpec spec = make_spec(pop, mkt, c, alpha);
      const double solver = solve_fair(pop, mkt, spec, opt).solution.profit;
      const OracleResult orc = grid_oracle(pop, mkt, spec, cfg.resolution);
      const FairnessSpec wide{c, 0.0, spec.band() + orc.fairness_slack};
      const double relaxed = solve_fair(pop, mkt, wide, opt).solution.profit;
      record(to_string(c), alpha, solver, relaxed, orc);
    }
  }
  emit(cfg, out, dump({{"command", "verify"},
                       {"resolution", cfg.resolution},
                       {"cases", cases},
                       {"max_oracle_excess", max_shortfall},
                       {"max_solver_excess", max_gap},
                       {"pass", pass}}));
  return pass ? 0 : 1;
}

}  // namespace

std::vector<double> parse_number_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(item, "list"));
  if (out.empty()) throw UsageError("empty number list");
  return out;
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  static const std::map<std::string, int (*)(const RunConfig&, std::ostream&)>
      commands = {{"solve", cmd_solve},
                  {"sweep", cmd_sweep},
                  {"regimes", cmd_regimes},
                  {"casestudy-estimate", cmd_estimate},
                  {"casestudy-cluster", cmd_cluster},
                  {"casestudy-solve", cmd_casestudy_solve},
                  {"verify", cmd_verify}};
  std::string type;
  std::string message;
  try {
    auto it = commands.find(cfg.command);
    if (it == commands.end()) throw UsageError("unknown command '" + cfg.command + "'");
    return it->second(cfg, out);
  } catch (const UsageError& e) {
    type = "usage";
    message = e.what();
  } catch (const DomainError& e) {
    type = "domain";
    message = e.what();
  } catch (const ModelError& e) {
    type = "model";
    message = e.what();
  } catch (const std::exception& e) {
    type = "runtime";
    message = e.what();
  }
  err << json{{"error", {{"command", cfg.command}, {"type", type}, {"message", message}}}}
             .dump()
      << "\n";
  return 2;
}

}  // namespace vppfair
