// Copyright 2026 The scoreda Authors
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

// da: experiment runner.
//
//   da run --config <path> [--seed N] [--out DIR]
//   da grid-search --config <path> --grid <path>
//   da scenario --name {1|2|3} [--iters M] [--K N]
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "scoreda/harness.hpp"
#include "scoreda/parallel.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

int report_failures(const scoreda::ExperimentResult& r) {
  for (const auto& row : r.rows) {
    if (row.failed) return kExitNumerical;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  scoreda::apply_thread_env();

  CLI::App app{"Score-based ensemble data assimilation experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string grid_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int scenario_name = 1;
  int iters = 5;
  long members = 200;

  auto* run = app.add_subcommand("run", "Run one experiment from a JSON config");
  run->add_option("--config", config_path, "Experiment config (JSON)")->required();
  auto* seed_opt = run->add_option("--seed", seed, "Override the master seed");
  auto* out_opt = run->add_option("--out", out_dir, "Override the output directory");

  auto* grid = app.add_subcommand("grid-search", "Grid search over inflation, localization, gamma");
  grid->add_option("--config", config_path, "Experiment config (JSON)")->required();
  grid->add_option("--grid", grid_path, "Grid definition (JSON)")->required();

  auto* scen = app.add_subcommand("scenario", "Static two-dimensional scenario, CSV on stdout");
  scen->add_option("--name", scenario_name, "Scenario number")
      ->required()
      ->check(CLI::IsMember({1, 2, 3}));
  auto* iters_opt = scen->add_option("--iters", iters, "IEnSF refinement iterations")
                        ->check(CLI::PositiveNumber);
  auto* k_opt = scen->add_option("--K", members, "Ensemble size")->check(CLI::Range(2L, 100000000L));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) {
      scoreda::ExperimentConfig cfg = scoreda::load_config(config_path);
      if (*seed_opt) cfg.seed = seed;
      if (*out_opt) cfg.output_dir = out_dir;
      const scoreda::ExperimentResult r = scoreda::run_experiment(cfg);
      scoreda::write_outputs(cfg, r);
      std::cout << scoreda::format_summary(cfg, r);
      return report_failures(r);
    }
    if (*grid) {
      const scoreda::ExperimentConfig cfg = scoreda::load_config(config_path);
      const scoreda::GridSpec spec = scoreda::load_grid(grid_path);
      const scoreda::GridSearchResult r = scoreda::grid_search(cfg, spec);
      scoreda::write_grid_outputs(cfg, r);
      std::cout << "method,inflation,loc_halfwidth,gamma,rmse_all\n";
      for (const auto& m : cfg.methods) {
        const auto it = r.winners.find(m);
        if (it == r.winners.end()) {
          std::cout << m << ",all cells failed\n";
          continue;
        }
        const auto& w = it->second;
        std::cout << m << ',' << w.inflation << ','
                  << (w.loc_halfwidth ? std::to_string(*w.loc_halfwidth) : std::string("none"))
                  << ',' << w.gamma << ',' << w.score << '\n';
      }
      return r.winners.size() == cfg.methods.size() ? 0 : kExitNumerical;
    }
    if (*scen) {
      scoreda::ExperimentConfig cfg = scoreda::default_config(
          scoreda::parse_experiment("scenario" + std::to_string(scenario_name)));
      if (*iters_opt) cfg.iensf.max_iters = iters;
      if (*k_opt) cfg.ensemble_size = members;
      const scoreda::ExperimentResult r = scoreda::run_experiment(cfg);
      scoreda::write_csv(std::cout, r.rows);
      std::cerr << scoreda::format_summary(cfg, r);
      return report_failures(r);
    }
  } catch (const scoreda::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const scoreda::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const scoreda::DomainError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
