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

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "vppfair/cli.hpp"

namespace {

using vppfair::RunConfig;

void add_model(CLI::App* sub, RunConfig& cfg, std::string& caps,
               std::string& weights) {
  sub->add_option("--population", cfg.population_path,
                  "population file (.json or .csv)");
  sub->add_option("--market", cfg.market_path, "market JSON {pi, d_s|d_s_fraction}");
  sub->add_option("--a", cfg.a, "cost curvature");
  sub->add_option("--b", cfg.b, "cost intercept");
  sub->add_option("--cap", caps, "comma-separated capacities, ascending");
  sub->add_option("--weights", weights, "comma-separated household counts");
  sub->add_option("--pi", cfg.pi, "upper-market price");
  sub->add_option("--ds", cfg.d_s, "aggregation cap");
  sub->add_option("--ds-fraction", cfg.d_s_fraction,
                  "aggregation cap as a fraction of total capacity");
}

void add_solver(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--criterion", cfg.criterion, "energy | price | utility");
  sub->add_option("--tol", cfg.tol, "solver tolerance (default $VPPFAIR_TOL or 1e-9)");
}

void add_raw(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--participants", cfg.participants_path, "participants CSV");
  sub->add_option("--hourly", cfg.hourly_path, "hourly consumption CSV");
  sub->add_option("--hour", cfg.hour, "override the selected hour (1..24, hour-ending)")
      ->check(CLI::Range(1, 24));
  sub->add_option("--out-dir", cfg.out_dir, "directory for intermediate CSVs");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fairness-constrained pricing for demand-response aggregation"};
  app.require_subcommand(1);
  app.fallthrough();
  RunConfig cfg;
  std::string caps, weights;
  app.add_option("-o,--output", cfg.output, "write the main artifact here");

  auto* solve = app.add_subcommand("solve", "solve one instance, JSON report");
  add_model(solve, cfg, caps, weights);
  add_solver(solve, cfg);
  solve->add_option("--alpha", cfg.alpha, "fairness level in [0, 1]");
  solve->add_flag("--profit-only", cfg.profit_only, "ignore fairness");

  auto* sw = app.add_subcommand("sweep", "alpha sweep, CSV table");
  add_model(sw, cfg, caps, weights);
  add_solver(sw, cfg);
  sw->add_option("--grid", cfg.grid_step, "alpha step (default 201 points)");
  sw->add_option("--eps", cfg.eps, "regime classification threshold");

  auto* rg = app.add_subcommand("regimes", "classify a sweep into regimes");
  add_model(rg, cfg, caps, weights);
  add_solver(rg, cfg);
  rg->add_option("--grid", cfg.grid_step, "alpha step (default 201 points)");
  rg->add_option("--eps", cfg.eps, "regime classification threshold");
  rg->add_option("--solution", cfg.solution_path,
                 "re-ingest a solve report and recompute its metrics");
  rg->add_option("--out-dir", cfg.out_dir, "directory for segments.csv");

  auto* est = app.add_subcommand("casestudy-estimate", "filter and estimate (a, b)");
  add_raw(est, cfg);

  auto* cl = app.add_subcommand("casestudy-cluster", "capacities and k-means");
  add_raw(cl, cfg);
  cl->add_option("--k", cfg.k, "number of clusters");
  cl->add_option("--restarts", cfg.restarts, "k-means restarts");
  cl->add_option("--seed", cfg.seed, "k-means seed");

  auto* cs = app.add_subcommand("casestudy-solve", "tiered case-study comparison");
  add_raw(cs, cfg);
  add_solver(cs, cfg);
  cs->add_option("--clusters", cfg.clusters_path, "cluster summary CSV");
  cs->add_option("--a", cfg.a, "cost curvature (default 0.0408 or estimated)");
  cs->add_option("--b", cfg.b, "cost intercept (default 4.5686 or estimated)");
  cs->add_option("--pi", cfg.pi, "upper-market price (default 5)");
  cs->add_option("--ds", cfg.d_s, "aggregation cap");
  cs->add_option("--ds-fraction", cfg.d_s_fraction, "cap fraction (default 0.8)");
  cs->add_option("--alpha", cfg.alpha, "fairness level (default 1)");
  cs->add_option("--k", cfg.k, "number of clusters");
  cs->add_option("--restarts", cfg.restarts, "k-means restarts");
  cs->add_option("--seed", cfg.seed, "k-means seed");

  auto* vf = app.add_subcommand("verify", "cross-check solvers against the grid oracle");
  add_model(vf, cfg, caps, weights);
  add_solver(vf, cfg);
  vf->add_option("--alpha", cfg.alpha, "single fairness level to check");
  vf->add_option("--resolution", cfg.resolution, "oracle price step");

  CLI11_PARSE(app, argc, argv);
  cfg.command = app.get_subcommands().front()->get_name();
  try {
    if (!caps.empty()) cfg.capacities = vppfair::parse_number_list(caps);
    if (!weights.empty()) {
      for (double w : vppfair::parse_number_list(weights)) {
        cfg.weights.push_back(static_cast<long>(w));
      }
    }
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"error", {{"type", "usage"}, {"message", e.what()}}}}
                     .dump()
              << "\n";
    return 2;
  }
  return vppfair::run(cfg, std::cout, std::cerr);
}
