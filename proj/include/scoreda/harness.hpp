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

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "scoreda/baselines.hpp"
#include "scoreda/iensf.hpp"
#include "scoreda/models.hpp"

namespace scoreda {

enum class ExperimentKind { scenario1, scenario2, scenario3, harmonic, lorenz96 };

ExperimentKind parse_experiment(const std::string& s);
std::string to_string(ExperimentKind e);

/// Methods understood by the harness. free_run propagates the ensemble
/// without assimilating anything.
const std::vector<std::string>& known_methods();

struct FilterBlock {
  double inflation = 1.0;
  std::optional<double> loc_halfwidth;
};

struct HarmonicSettings {
  HarmonicOscillatorModel model;
  double obs_std = 0.5;
  VectorXd init_mean = VectorXd::Zero(2);
  double init_std = 1.0;
};

enum class L96ObsKind { linear, arctan };

struct Lorenz96Settings {
  Lorenz96Model model;
  double dt_truth = 0.01;
  double dt_forecast = 0.02;
  double obs_interval = 0.2;
  Eigen::Index obs_spacing = 4;
  Eigen::Index obs_offset = 0;
  L96ObsKind obs_kind = L96ObsKind::linear;
  double obs_std = 0.1;
  double init_std = 3.0;
  double ens_init_std = 0.1;
  int truth_steps = 1000;
  int spinup_steps = 0;
};

struct ScenarioSettings {
  int grid_points = 801;
  double grid_halfwidth = 5.0;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::harmonic;
  std::vector<std::string> methods;
  Eigen::Index ensemble_size = 200;
  int n_steps_da = 100;
  std::uint64_t seed = 1;
  int repetitions = 1;
  std::string output_dir = "out";
  double spinup_fraction = 0.2;
  bool record_timing = false;

  IEnSFConfig iensf;
  ScoreConfig ensf_score;
  ReverseIntegratorConfig ensf_integ;
  double ensf_inflation = 1.0;
  FilterBlock enkf;
  FilterBlock letkf;
  double pf_ess_fraction = 0.5;

  HarmonicSettings harmonic;
  Lorenz96Settings lorenz96;
  ScenarioSettings scenario;

  /// Merged configuration (defaults overlaid with the user file) as JSON.
  std::string effective_json;

  bool has_method(const std::string& m) const;
};

/// Parses a JSON document over the built-in defaults. Unknown keys, wrong
/// types and out-of-range values raise ConfigError.
ExperimentConfig config_from_json(const std::string& text);
ExperimentConfig load_config(const std::string& path);
/// Defaults for an experiment with no user overrides.
ExperimentConfig default_config(ExperimentKind kind);

struct ResultRow {
  std::string experiment;
  std::string method;
  int repetition = 0;
  int step_or_iteration = 0;
  std::optional<double> rmse_obs;
  std::optional<double> rmse_unobs;
  std::optional<double> kl;
  std::optional<double> spread;
  double wallclock_ms = 0.0;
  std::uint64_t seed = 0;
  bool failed = false;
};

/// Column order of every CSV written by the harness.
const std::vector<std::string>& result_columns();
/// CSV line for a row, 17 significant digits. Absent metrics are empty cells;
/// failed rows carry "failed" in every metric cell.
std::string format_row(const ResultRow& row);
void write_csv(std::ostream& os, const std::vector<ResultRow>& rows);

/// Per-step analysis state kept for downstream checks.
struct StepRecord {
  std::string method;
  int repetition = 0;
  int step = 0;
  VectorXd mean;
  MatrixXd cov;
  double rmse_all = 0.0;
  /// KF posterior or grid-oracle moments when the experiment has one.
  std::optional<GaussianParams> reference;
  /// IEnSF fitted moments per refinement iteration.
  std::vector<GaussianParams> iteration_fits;
  bool failed = false;
};

struct MethodSummary {
  std::string method;
  double rmse_obs = 0.0;
  double rmse_unobs = 0.0;
  double rmse_all = 0.0;
  double kl = 0.0;
  double spread = 0.0;
  int failures = 0;
  int samples = 0;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;
  /// IEnSF per-iteration rows of sequential experiments.
  std::vector<ResultRow> iteration_rows;
  std::vector<StepRecord> records;
  std::vector<MethodSummary> summary;
  GaussianParams oracle;  // static scenarios only
  /// One message per failed method run.
  std::vector<std::string> errors;
};

/// Runs every configured method through the experiment. Method failures are
/// recorded as failed rows and the run continues with the other methods.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Writes results.csv, iterations.csv (if any), summary.txt and
/// effective_config.json into cfg.output_dir.
void write_outputs(const ExperimentConfig& cfg, const ExperimentResult& result);

std::string format_summary(const ExperimentConfig& cfg, const ExperimentResult& result);

struct GridSpec {
  std::vector<double> inflation;
  std::vector<std::optional<double>> loc_halfwidth;
  std::vector<double> gamma;
};

GridSpec grid_from_json(const std::string& text);
GridSpec load_grid(const std::string& path);

struct GridCellResult {
  int cell = 0;
  double inflation = 1.0;
  std::optional<double> loc_halfwidth;
  double gamma = 0.5;
  std::string method;
  double score = 0.0;  // time-mean rmse_all after spin-up
  bool failed = false;
};

struct GridSearchResult {
  std::vector<GridCellResult> table;
  std::map<std::string, GridCellResult> winners;
};

/// Cross product of the grid; each cell overrides inflation and
/// loc_halfwidth of enkf, letkf and iensf (and ensf inflation) and gamma of
/// iensf. Winners minimize the cell score per method.
GridSearchResult grid_search(const ExperimentConfig& cfg, const GridSpec& grid);

void write_grid_outputs(const ExperimentConfig& cfg, const GridSearchResult& result);

}  // namespace scoreda
