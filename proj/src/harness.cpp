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

#include "scoreda/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "scoreda/metrics.hpp"

namespace scoreda {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Names

ExperimentKind parse_experiment(const std::string& s) {
  if (s == "scenario1") return ExperimentKind::scenario1;
  if (s == "scenario2") return ExperimentKind::scenario2;
  if (s == "scenario3") return ExperimentKind::scenario3;
  if (s == "harmonic") return ExperimentKind::harmonic;
  if (s == "lorenz96") return ExperimentKind::lorenz96;
  throw ConfigError("unknown experiment: " + s);
}

std::string to_string(ExperimentKind e) {
  switch (e) {
    case ExperimentKind::scenario1: return "scenario1";
    case ExperimentKind::scenario2: return "scenario2";
    case ExperimentKind::scenario3: return "scenario3";
    case ExperimentKind::harmonic: return "harmonic";
    case ExperimentKind::lorenz96: return "lorenz96";
  }
  return "?";
}

const std::vector<std::string>& known_methods() {
  static const std::vector<std::string> m{"kf", "enkf", "letkf", "pf", "ensf", "iensf", "free_run"};
  return m;
}

namespace {

std::uint64_t method_label(const std::string& m) {
  const auto& all = known_methods();
  const auto it = std::find(all.begin(), all.end(), m);
  return 200 + static_cast<std::uint64_t>(it - all.begin());
}

bool is_static(ExperimentKind e) {
  return e == ExperimentKind::scenario1 || e == ExperimentKind::scenario2 ||
         e == ExperimentKind::scenario3;
}

// ---------------------------------------------------------------------------
// Configuration

json reverse_defaults() {
  return {{"n_steps", 100}, {"t_start", 0.999}, {"t_end", 0.001}, {"mode", "sde"}};
}

json base_defaults() {
  json j;
  j["experiment"] = "harmonic";
  j["methods"] = nullptr;
  j["K"] = nullptr;
  j["n_steps_da"] = nullptr;
  j["seed"] = 1;
  j["repetitions"] = nullptr;
  j["output_dir"] = "out";
  j["spinup_fraction"] = 0.2;
  j["record_timing"] = false;
  j["iensf"] = {{"max_iters", 5},
                {"eta1", 1.0},
                {"eta2", 0.5},
                {"tol", 1e-2},
                {"convergence_metric", "relative"},
                {"gamma", 0.5},
                {"gamma_exponent", 2},
                {"inflation", 1.0},
                {"loc_halfwidth", nullptr},
                {"localize_reference", true},
                {"obs_weight_mode", "component-point"},
                {"reverse", reverse_defaults()}};
  j["ensf"] = {{"inflation", 1.0}, {"reverse", reverse_defaults()}};
  j["enkf"] = {{"inflation", 1.0}, {"loc_halfwidth", nullptr}};
  j["letkf"] = {{"inflation", 1.0}, {"loc_halfwidth", nullptr}};
  j["pf"] = {{"ess_fraction", 0.5}};
  j["harmonic"] = {{"omega", 2.0},       {"dt", 0.1},        {"process_std", 0.5},
                   {"x0", {3.0, -3.0}},  {"obs_std", 0.5},   {"init_mean", {0.0, 0.0}},
                   {"init_std", 1.0}};
  j["lorenz96"] = {{"dim", 40},          {"forcing", 8.0},      {"damping", true},
                   {"dt_truth", 0.01},   {"dt_forecast", 0.02}, {"obs_interval", 0.2},
                   {"obs_spacing", 4},   {"obs_offset", 0},     {"obs_kind", "linear"},
                   {"obs_std", nullptr}, {"init_std", 3.0},     {"ens_init_std", 0.1},
                   {"truth_steps", 1000}, {"spinup_steps", 0}};
  j["scenario"] = {{"grid_points", 801}, {"grid_halfwidth", 5.0}};
  return j;
}

json experiment_overlay(ExperimentKind e) {
  switch (e) {
    case ExperimentKind::scenario1:
      return {{"methods", {"kf", "pf", "ensf", "iensf"}}, {"K", 200}, {"n_steps_da", 1},
              {"repetitions", 10}};
    case ExperimentKind::scenario2:
    case ExperimentKind::scenario3:
      return {{"methods", {"pf", "ensf", "iensf"}}, {"K", 200}, {"n_steps_da", 1},
              {"repetitions", 5}};
    case ExperimentKind::harmonic:
      return {{"methods", {"kf", "enkf", "pf", "ensf", "iensf"}},
              {"K", 200},
              {"n_steps_da", 100},
              {"repetitions", 10}};
    case ExperimentKind::lorenz96:
      return {{"methods", {"free_run", "enkf", "letkf", "iensf"}},
              {"K", 20},
              {"repetitions", 1},
              {"enkf", {{"inflation", 1.05}, {"loc_halfwidth", 4.0}}},
              {"letkf", {{"inflation", 1.05}, {"loc_halfwidth", 4.0}}},
              {"iensf",
               {{"inflation", 1.05},
                {"loc_halfwidth", 4.0},
                {"gamma", 1.0},
                {"reverse", {{"n_steps", 1000}}}}}};
  }
  return json::object();
}

// Every user key must exist in the defaults; objects are checked recursively.
void check_keys(const json& user, const json& defaults, const std::string& path) {
  if (!user.is_object()) throw ConfigError("config: " + path + " must be an object");
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string key = path.empty() ? it.key() : path + "." + it.key();
    if (!defaults.contains(it.key())) throw ConfigError("config: unknown key '" + key + "'");
    const json& def = defaults.at(it.key());
    if (def.is_object() && !it.value().is_null()) check_keys(it.value(), def, key);
  }
}

void merge_into(json& base, const json& patch) {
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    if (base.contains(it.key()) && base[it.key()].is_object() && it.value().is_object()) {
      merge_into(base[it.key()], it.value());
    } else {
      base[it.key()] = it.value();
    }
  }
}

std::optional<double> opt_double(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

ReverseIntegratorConfig parse_reverse(const json& j) {
  ReverseIntegratorConfig c;
  c.n_steps = j.at("n_steps").get<int>();
  c.t_start = j.at("t_start").get<double>();
  c.t_end = j.at("t_end").get<double>();
  const std::string mode = j.at("mode").get<std::string>();
  if (mode == "sde") {
    c.mode = ReverseMode::sde;
  } else if (mode == "ode") {
    c.mode = ReverseMode::ode;
  } else {
    throw ConfigError("config: reverse.mode must be 'sde' or 'ode'");
  }
  c.validate();
  return c;
}

FilterBlock parse_filter(const json& j) {
  FilterBlock f;
  f.inflation = j.at("inflation").get<double>();
  f.loc_halfwidth = opt_double(j, "loc_halfwidth");
  if (!(f.inflation >= 1.0)) throw ConfigError("config: inflation must be >= 1");
  if (f.loc_halfwidth && !(*f.loc_halfwidth > 0.0)) {
    throw ConfigError("config: loc_halfwidth must be positive");
  }
  return f;
}

VectorXd to_vector(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

ExperimentConfig parse_merged(json& merged) {
  ExperimentConfig c;
  c.experiment = parse_experiment(merged.at("experiment").get<std::string>());

  const json& l96 = merged.at("lorenz96");
  Lorenz96Settings& ls = c.lorenz96;
  ls.model.dim = l96.at("dim").get<Eigen::Index>();
  ls.model.forcing = l96.at("forcing").get<double>();
  ls.model.damping = l96.at("damping").get<bool>();
  ls.dt_truth = l96.at("dt_truth").get<double>();
  ls.dt_forecast = l96.at("dt_forecast").get<double>();
  ls.obs_interval = l96.at("obs_interval").get<double>();
  ls.obs_spacing = l96.at("obs_spacing").get<Eigen::Index>();
  ls.obs_offset = l96.at("obs_offset").get<Eigen::Index>();
  const std::string kind = l96.at("obs_kind").get<std::string>();
  if (kind == "linear") {
    ls.obs_kind = L96ObsKind::linear;
  } else if (kind == "arctan") {
    ls.obs_kind = L96ObsKind::arctan;
  } else {
    throw ConfigError("config: lorenz96.obs_kind must be 'linear' or 'arctan'");
  }
  ls.obs_std = opt_double(l96, "obs_std").value_or(ls.obs_kind == L96ObsKind::arctan ? 0.05 : 0.1);
  merged["lorenz96"]["obs_std"] = ls.obs_std;
  ls.init_std = l96.at("init_std").get<double>();
  ls.ens_init_std = l96.at("ens_init_std").get<double>();
  ls.truth_steps = l96.at("truth_steps").get<int>();
  ls.spinup_steps = l96.at("spinup_steps").get<int>();
  if (ls.model.dim < 4) throw ConfigError("config: lorenz96.dim must be >= 4");
  if (!(ls.dt_truth > 0.0 && ls.dt_forecast > 0.0 && ls.obs_interval > 0.0)) {
    throw ConfigError("config: lorenz96 time steps must be positive");
  }
  if (!(ls.obs_std > 0.0)) throw ConfigError("config: lorenz96.obs_std must be positive");

  if (merged.at("n_steps_da").is_null() && c.experiment == ExperimentKind::lorenz96) {
    merged["n_steps_da"] =
        static_cast<int>(std::floor(ls.truth_steps * ls.dt_truth / ls.obs_interval + 1e-9));
  }

  c.methods = merged.at("methods").get<std::vector<std::string>>();
  if (c.methods.empty()) throw ConfigError("config: methods must not be empty");
  for (const auto& m : c.methods) {
    const auto& all = known_methods();
    if (std::find(all.begin(), all.end(), m) == all.end()) {
      throw ConfigError("config: unknown method '" + m + "'");
    }
  }
  c.ensemble_size = merged.at("K").get<Eigen::Index>();
  c.n_steps_da = merged.at("n_steps_da").get<int>();
  if (!merged.at("seed").is_number_integer() && !merged.at("seed").is_number_unsigned()) {
    throw ConfigError("config: seed must be an integer");
  }
  c.seed = merged.at("seed").get<std::uint64_t>();
  c.repetitions = merged.at("repetitions").get<int>();
  c.output_dir = merged.at("output_dir").get<std::string>();
  c.spinup_fraction = merged.at("spinup_fraction").get<double>();
  c.record_timing = merged.at("record_timing").get<bool>();
  if (c.ensemble_size < 2) throw ConfigError("config: K must be >= 2");
  if (c.n_steps_da < 1) throw ConfigError("config: n_steps_da must be >= 1");
  if (c.repetitions < 1) throw ConfigError("config: repetitions must be >= 1");
  if (!(c.spinup_fraction >= 0.0 && c.spinup_fraction < 1.0)) {
    throw ConfigError("config: spinup_fraction must lie in [0, 1)");
  }

  const json& ij = merged.at("iensf");
  IEnSFConfig& ic = c.iensf;
  ic.max_iters = ij.at("max_iters").get<int>();
  ic.eta1 = ij.at("eta1").get<double>();
  ic.eta2 = ij.at("eta2").get<double>();
  ic.tol = ij.at("tol").get<double>();
  const std::string metric = ij.at("convergence_metric").get<std::string>();
  if (metric == "relative") {
    ic.metric = ConvergenceMetric::relative;
  } else if (metric == "symmetric-kl") {
    ic.metric = ConvergenceMetric::symmetric_kl;
  } else {
    throw ConfigError("config: iensf.convergence_metric must be 'relative' or 'symmetric-kl'");
  }
  ic.prior.gamma = ij.at("gamma").get<double>();
  ic.prior.gamma_exponent = ij.at("gamma_exponent").get<int>();
  ic.prior.inflation = ij.at("inflation").get<double>();
  ic.prior.loc_halfwidth = opt_double(ij, "loc_halfwidth");
  ic.localize_reference = ij.at("localize_reference").get<bool>();
  ic.score_cfg.obs_weight_mode = parse_obs_weight_mode(ij.at("obs_weight_mode").get<std::string>());
  ic.integ_cfg = parse_reverse(ij.at("reverse"));
  if (!(ic.prior.gamma >= 0.0 && ic.prior.gamma <= 1.0)) {
    throw ConfigError("config: iensf.gamma must lie in [0, 1]");
  }
  if (ic.prior.gamma_exponent != 1 && ic.prior.gamma_exponent != 2) {
    throw ConfigError("config: iensf.gamma_exponent must be 1 or 2");
  }
  if (!(ic.prior.inflation >= 1.0)) throw ConfigError("config: iensf.inflation must be >= 1");
  ic.validate();

  c.ensf_inflation = merged.at("ensf").at("inflation").get<double>();
  if (!(c.ensf_inflation >= 1.0)) throw ConfigError("config: ensf.inflation must be >= 1");
  c.ensf_integ = parse_reverse(merged.at("ensf").at("reverse"));
  c.ensf_score.method = ScoreMethod::ensf;
  c.enkf = parse_filter(merged.at("enkf"));
  c.letkf = parse_filter(merged.at("letkf"));
  c.pf_ess_fraction = merged.at("pf").at("ess_fraction").get<double>();
  if (!(c.pf_ess_fraction >= 0.0 && c.pf_ess_fraction <= 1.0)) {
    throw ConfigError("config: pf.ess_fraction must lie in [0, 1]");
  }

  const json& hj = merged.at("harmonic");
  HarmonicSettings& hs = c.harmonic;
  hs.model.omega = hj.at("omega").get<double>();
  hs.model.dt = hj.at("dt").get<double>();
  const double pstd = hj.at("process_std").get<double>();
  hs.model.process_cov = pstd * pstd * MatrixXd::Identity(2, 2);
  hs.model.x0 = to_vector(hj.at("x0"));
  hs.obs_std = hj.at("obs_std").get<double>();
  hs.init_mean = to_vector(hj.at("init_mean"));
  hs.init_std = hj.at("init_std").get<double>();
  if (hs.model.x0.size() != 2 || hs.init_mean.size() != 2) {
    throw ConfigError("config: harmonic x0 and init_mean must have 2 entries");
  }
  if (!(hs.obs_std > 0.0) || !(hs.init_std > 0.0) || pstd < 0.0) {
    throw ConfigError("config: harmonic standard deviations must be positive");
  }

  c.scenario.grid_points = merged.at("scenario").at("grid_points").get<int>();
  c.scenario.grid_halfwidth = merged.at("scenario").at("grid_halfwidth").get<double>();

  // Method/experiment compatibility.
  const bool linear_obs = c.experiment == ExperimentKind::scenario1 ||
                          c.experiment == ExperimentKind::harmonic ||
                          (c.experiment == ExperimentKind::lorenz96 &&
                           ls.obs_kind == L96ObsKind::linear);
  if (c.has_method("kf") && !(linear_obs && c.experiment != ExperimentKind::lorenz96)) {
    throw ConfigError("config: kf needs a linear-Gaussian experiment (scenario1 or harmonic)");
  }
  if (c.has_method("free_run") && is_static(c.experiment)) {
    throw ConfigError("config: free_run needs a sequential experiment");
  }
  c.effective_json = merged.dump(2);
  return c;
}

}  // namespace

bool ExperimentConfig::has_method(const std::string& m) const {
  return std::find(methods.begin(), methods.end(), m) != methods.end();
}

ExperimentConfig config_from_json(const std::string& text) {
  try {
    const json user = json::parse(text);
    json merged = base_defaults();
    check_keys(user, merged, "");
    const ExperimentKind kind = parse_experiment(
        user.contains("experiment") ? user.at("experiment").get<std::string>() : "harmonic");
    merge_into(merged, experiment_overlay(kind));
    merge_into(merged, user);
    return parse_merged(merged);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

ExperimentConfig default_config(ExperimentKind kind) {
  return config_from_json(json{{"experiment", to_string(kind)}}.dump());
}

// ---------------------------------------------------------------------------
// CSV

const std::vector<std::string>& result_columns() {
  static const std::vector<std::string> cols{
      "experiment", "method", "repetition", "step_or_iteration", "rmse_obs",
      "rmse_unobs", "kl",     "spread",     "wallclock_ms",      "seed"};
  return cols;
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_opt(const std::optional<double>& v, bool failed) {
  if (failed) return "failed";
  return v ? fmt(*v) : std::string();
}

}  // namespace

std::string format_row(const ResultRow& r) {
  std::ostringstream os;
  os << r.experiment << ',' << r.method << ',' << r.repetition << ',' << r.step_or_iteration
     << ',' << fmt_opt(r.rmse_obs, r.failed) << ',' << fmt_opt(r.rmse_unobs, r.failed) << ','
     << fmt_opt(r.kl, r.failed) << ',' << fmt_opt(r.spread, r.failed) << ','
     << fmt(r.wallclock_ms) << ',' << r.seed;
  return os.str();
}

void write_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
  const auto& cols = result_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  for (const auto& r : rows) os << format_row(r) << '\n';
}

// ---------------------------------------------------------------------------
// Experiment plumbing

namespace {

using Clock = std::chrono::steady_clock;

struct Fit {
  VectorXd mean;
  MatrixXd cov;
};

Fit fit_ensemble(const Ensemble& e) {
  const SampleStats s = sample_mean_cov(e);
  return {s.mean, s.cov};
}

Fit fit_weighted(const Ensemble& e, const VectorXd& w) {
  Fit f;
  f.mean = e.matrix() * w;
  const MatrixXd a = e.matrix().colwise() - f.mean;
  const double denom = 1.0 - w.squaredNorm();
  f.cov = a * w.asDiagonal() * a.transpose() / (denom > 0.0 ? denom : 1.0);
  return f;
}

std::optional<double> safe_kl(const Fit& f, const GaussianParams& ref) {
  try {
    return gaussian_kl({f.mean, f.cov}, ref);
  } catch (const NumericalError&) {
    return std::numeric_limits<double>::infinity();
  }
}

Ensemble draw_gaussian(const VectorXd& mean, const MatrixXd& cov, Eigen::Index k, RngKey key) {
  const SpdFactor f(cov);
  MatrixXd x(mean.size(), k);
  for (Eigen::Index j = 0; j < k; ++j) {
    RngStream rng(key.derive(static_cast<std::uint64_t>(j)));
    x.col(j) = mean + f.colour(rng.normal_vector(mean.size()));
  }
  return Ensemble(std::move(x));
}

Ensemble inflate_anomalies(const Ensemble& e, double inflation) {
  if (inflation == 1.0) return e;
  const VectorXd m = e.mean();
  MatrixXd x = (e.matrix().colwise() - m) * inflation;
  x.colwise() += m;
  return Ensemble(std::move(x));
}

struct RowContext {
  std::string experiment;
  std::uint64_t seed = 0;
  std::vector<Eigen::Index> observed;
};

ResultRow make_row(const RowContext& ctx, const std::string& method, int rep, int step,
                   const Fit& fit, const VectorXd& target,
                   const std::optional<GaussianParams>& reference, double ms, double* rmse_all) {
  ResultRow r;
  r.experiment = ctx.experiment;
  r.method = method;
  r.repetition = rep;
  r.step_or_iteration = step;
  const RmseSplit e = rmse_split(fit.mean, target, ctx.observed);
  r.rmse_obs = e.obs;
  r.rmse_unobs = e.unobs;
  if (rmse_all != nullptr) *rmse_all = e.all;
  if (reference) r.kl = safe_kl(fit, *reference);
  r.spread = std::sqrt(std::max(0.0, fit.cov.diagonal().mean()));
  r.wallclock_ms = ms;
  r.seed = ctx.seed;
  return r;
}

ResultRow failed_row(const RowContext& ctx, const std::string& method, int rep, int step) {
  ResultRow r;
  r.experiment = ctx.experiment;
  r.method = method;
  r.repetition = rep;
  r.step_or_iteration = step;
  r.seed = ctx.seed;
  r.failed = true;
  return r;
}

struct RepOutput {
  std::vector<ResultRow> rows;
  std::vector<ResultRow> iteration_rows;
  std::vector<StepRecord> records;
  std::vector<std::string> errors;
};

double elapsed_ms(Clock::time_point t0, bool record) {
  if (!record) return 0.0;
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// Static scenarios

struct StaticProblem {
  GaussianParams prior;
  ObservationModel obs;
  VectorXd y;
  GaussianParams oracle;
  std::vector<Eigen::Index> observed;
};

GaussianParams scenario_prior() {
  MatrixXd cov(2, 2);
  cov << 0.5, -0.4, -0.4, 0.5;
  return {VectorXd::Zero(2), cov};
}

StaticProblem make_static_problem(const ExperimentConfig& cfg) {
  const GaussianParams prior = scenario_prior();
  auto build = [&](ObservationModel obs, double y, std::vector<Eigen::Index> observed) {
    StaticProblem p{prior, std::move(obs), VectorXd::Constant(1, y), {}, std::move(observed)};
    if (p.obs.is_linear()) {
      p.oracle = kf_update(prior, p.obs.linear_matrix(), p.obs.obs_cov(), p.y);
    } else {
      const SpdFactor pf(prior.cov);
      const VectorXd pm = prior.mean;
      const double hw = cfg.scenario.grid_halfwidth;
      const GridPosterior g = grid_bayes_oracle(
          [&](const VectorXd& x) { return gaussian_logpdf(x, pm, pf); }, p.obs, p.y,
          {{-hw, hw}, {-hw, hw}}, cfg.scenario.grid_points);
      p.oracle = g.moments;
    }
    return p;
  };
  switch (cfg.experiment) {
    case ExperimentKind::scenario1:
      return build(ObservationModel::select_linear(2, {0}, MatrixXd::Constant(1, 1, 0.01)), 3.0,
                   {0});
    case ExperimentKind::scenario2:
      return build(ObservationModel::radial((VectorXd(2) << 1.0, 1.0).finished(), 0.1), 1.5, {});
    case ExperimentKind::scenario3:
      return build(ObservationModel::radial((VectorXd(2) << 6.0, 6.0).finished(), 0.3), 2.0, {});
    default:
      break;
  }
  throw ConfigError("not a static scenario");
}

RepOutput run_static_rep(const ExperimentConfig& cfg, const StaticProblem& p, int rep) {
  RepOutput out;
  const RngKey rep_key = RngKey(cfg.seed).derive(static_cast<std::uint64_t>(rep));
  const RowContext ctx{to_string(cfg.experiment), cfg.seed, p.observed};
  const Eigen::Index k = cfg.ensemble_size;
  auto gm = std::make_shared<const GaussianMixturePrior>(
      GaussianMixturePrior::single(p.prior.mean, p.prior.cov));

  for (const auto& method : cfg.methods) {
    const RngKey key = rep_key.derive(method_label(method));
    StepRecord rec;
    rec.method = method;
    rec.repetition = rep;
    rec.step = 1;
    rec.reference = p.oracle;
    const auto t0 = Clock::now();
    try {
      Fit fit;
      if (method == "kf") {
        const GaussianParams g = kf_update(p.prior, p.obs.linear_matrix(), p.obs.obs_cov(), p.y);
        fit = {g.mean, g.cov};
      } else if (method == "pf") {
        const Ensemble x = draw_gaussian(p.prior.mean, p.prior.cov, k, key.derive(1));
        const ParticleState ps =
            pf_update(x, VectorXd::Constant(k, 1.0 / static_cast<double>(k)), p.obs, p.y,
                      key.derive(2), cfg.pf_ess_fraction);
        fit = fit_weighted(ps.particles, ps.weights);
      } else if (method == "enkf" || method == "letkf") {
        const Ensemble x = draw_gaussian(p.prior.mean, p.prior.cov, k, key.derive(1));
        const FilterBlock& fb = method == "enkf" ? cfg.enkf : cfg.letkf;
        const LocalizationOptions loc{fb.loc_halfwidth, LocalizationMetric::index_ring};
        const Ensemble xa = method == "enkf"
                                ? enkf_update(x, p.obs, p.y, fb.inflation, loc, key.derive(2))
                                : letkf_update(x, p.obs, p.y, fb.inflation, loc);
        fit = fit_ensemble(xa);
      } else if (method == "ensf") {
        fit = fit_ensemble(ensf_update(gm, k, p.y, p.obs, cfg.ensf_score, cfg.ensf_integ, key));
      } else if (method == "iensf") {
        const IEnSFResult r = iensf_update(gm, ReferencePosterior{p.prior.mean, p.prior.cov}, k,
                                           p.y, p.obs, cfg.iensf, key);
        const double ms = elapsed_ms(t0, cfg.record_timing);
        for (const auto& it : r.iterations) {
          out.rows.push_back(make_row(ctx, method, rep, it.iteration, {it.mean, it.cov},
                                      p.oracle.mean, p.oracle, ms, nullptr));
          rec.iteration_fits.push_back({it.mean, it.cov});
        }
        fit = fit_ensemble(r.posterior);
        rec.mean = fit.mean;
        rec.cov = fit.cov;
        rec.rmse_all = rmse_split(fit.mean, p.oracle.mean, p.observed).all;
        out.records.push_back(rec);
        continue;
      } else {
        throw ConfigError("method " + method + " is not available for static scenarios");
      }
      double all = 0.0;
      out.rows.push_back(make_row(ctx, method, rep, 1, fit, p.oracle.mean, p.oracle,
                                  elapsed_ms(t0, cfg.record_timing), &all));
      rec.mean = fit.mean;
      rec.cov = fit.cov;
      rec.rmse_all = all;
    } catch (const NumericalError& e) {
      out.rows.push_back(failed_row(ctx, method, rep, 1));
      out.errors.push_back(method + " (repetition " + std::to_string(rep) + "): " + e.what());
      rec.failed = true;
    } catch (const DomainError& e) {
      out.rows.push_back(failed_row(ctx, method, rep, 1));
      out.errors.push_back(method + " (repetition " + std::to_string(rep) + "): " + e.what());
      rec.failed = true;
    }
    out.records.push_back(rec);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sequential twin experiments

struct Twin {
  std::vector<VectorXd> truth;  // truth[n], n = 0..N (0 = initial)
  std::vector<VectorXd> obs;    // obs[n], n = 1..N (obs[0] unused)
  std::shared_ptr<const ObservationModel> obs_model;
  Ensemble initial;
  GaussianParams initial_gaussian;
  std::function<Ensemble(const Ensemble&, RngKey)> forecast;
  std::optional<LinearGaussianModel> linear;
  std::vector<Eigen::Index> observed;
};

Twin make_harmonic_twin(const ExperimentConfig& cfg, RngKey rep_key) {
  const HarmonicSettings& hs = cfg.harmonic;
  Twin tw;
  const int n = cfg.n_steps_da;
  tw.obs_model = std::make_shared<const ObservationModel>(
      ObservationModel::select_linear(2, {0}, MatrixXd::Constant(1, 1, hs.obs_std * hs.obs_std)));
  tw.observed = {0};
  const RngKey truth_key = rep_key.derive(100);
  const RngKey obs_key = rep_key.derive(101);
  tw.truth.push_back(hs.model.x0);
  tw.obs.emplace_back();
  for (int s = 1; s <= n; ++s) {
    RngStream rng(truth_key.derive(static_cast<std::uint64_t>(s)));
    tw.truth.push_back(ho_step(tw.truth.back(), hs.model, rng));
    RngStream orng(obs_key.derive(static_cast<std::uint64_t>(s)));
    tw.obs.push_back(tw.obs_model->apply(tw.truth.back()) +
                     tw.obs_model->obs_factor().colour(orng.normal_vector(1)));
  }
  const MatrixXd init_cov = hs.init_std * hs.init_std * MatrixXd::Identity(2, 2);
  tw.initial_gaussian = {hs.init_mean, init_cov};
  tw.initial = draw_gaussian(hs.init_mean, init_cov, cfg.ensemble_size, rep_key.derive(102));
  const HarmonicOscillatorModel model = hs.model;
  tw.forecast = [model](const Ensemble& e, RngKey key) {
    MatrixXd x(e.dim(), e.size());
#pragma omp parallel for schedule(static)
    for (Eigen::Index j = 0; j < e.size(); ++j) {
      RngStream rng(key.derive(static_cast<std::uint64_t>(j)));
      x.col(j) = ho_step(e.member(j), model, rng);
    }
    return Ensemble(std::move(x));
  };
  tw.linear = LinearGaussianModel{hs.model.transition(), hs.model.process_cov,
                                  tw.obs_model->linear_matrix(), tw.obs_model->obs_cov()};
  return tw;
}

Twin make_l96_twin(const ExperimentConfig& cfg, RngKey rep_key) {
  const Lorenz96Settings& ls = cfg.lorenz96;
  const Eigen::Index d = ls.model.dim;
  const auto ratio = [](double a, double b, const char* what) {
    const double r = a / b;
    const long n = std::lround(r);
    if (n < 1 || std::abs(r - static_cast<double>(n)) > 1e-9) {
      throw ConfigError(std::string("config: ") + what + " must be an integer multiple");
    }
    return static_cast<int>(n);
  };
  const int truth_per_obs = ratio(ls.obs_interval, ls.dt_truth, "obs_interval / dt_truth");
  const int fc_per_obs = ratio(ls.obs_interval, ls.dt_forecast, "obs_interval / dt_forecast");

  Twin tw;
  tw.observed = ObservationModel::every_nth(d, ls.obs_spacing, ls.obs_offset);
  const MatrixXd r = ls.obs_std * ls.obs_std *
                     MatrixXd::Identity(static_cast<Eigen::Index>(tw.observed.size()),
                                        static_cast<Eigen::Index>(tw.observed.size()));
  tw.obs_model = std::make_shared<const ObservationModel>(
      ls.obs_kind == L96ObsKind::arctan ? ObservationModel::arctan_selected(d, tw.observed, r)
                                        : ObservationModel::select_linear(d, tw.observed, r));

  RngStream trng(rep_key.derive(100));
  VectorXd x = ls.init_std * trng.normal_vector(d);
  x = l96_integrate(x, ls.model, ls.dt_truth, ls.spinup_steps);
  tw.truth.push_back(x);
  tw.obs.emplace_back();
  const RngKey obs_key = rep_key.derive(101);
  for (int s = 1; s <= cfg.n_steps_da; ++s) {
    x = l96_integrate(x, ls.model, ls.dt_truth, truth_per_obs);
    tw.truth.push_back(x);
    RngStream orng(obs_key.derive(static_cast<std::uint64_t>(s)));
    tw.obs.push_back(tw.obs_model->apply(x) +
                     tw.obs_model->obs_factor().colour(orng.normal_vector(tw.obs_model->obs_dim())));
  }
  MatrixXd e(d, cfg.ensemble_size);
  for (Eigen::Index j = 0; j < cfg.ensemble_size; ++j) {
    RngStream rng(rep_key.derive({102, static_cast<std::uint64_t>(j)}));
    e.col(j) = tw.truth[0] + ls.ens_init_std * rng.normal_vector(d);
  }
  tw.initial = Ensemble(std::move(e));
  tw.initial_gaussian = {tw.truth[0], ls.ens_init_std * ls.ens_init_std * MatrixXd::Identity(d, d)};
  const Lorenz96Model model = ls.model;
  const double h = ls.dt_forecast;
  tw.forecast = [model, h, fc_per_obs](const Ensemble& en, RngKey) {
    MatrixXd out(en.dim(), en.size());
#pragma omp parallel for schedule(static)
    for (Eigen::Index j = 0; j < en.size(); ++j) {
      out.col(j) = l96_integrate(en.member(j), model, h, fc_per_obs);
    }
    if (!out.allFinite()) throw NumericalError("forecast diverged to non-finite states");
    return Ensemble(std::move(out));
  };
  return tw;
}

RepOutput run_sequential_rep(const ExperimentConfig& cfg, int rep) {
  RepOutput out;
  const RngKey rep_key = RngKey(cfg.seed).derive(static_cast<std::uint64_t>(rep));
  const Twin tw = cfg.experiment == ExperimentKind::harmonic ? make_harmonic_twin(cfg, rep_key)
                                                              : make_l96_twin(cfg, rep_key);
  const RowContext ctx{to_string(cfg.experiment), cfg.seed, tw.observed};
  const int n = cfg.n_steps_da;
  const ObservationModel& obs = *tw.obs_model;

  // KF reference trajectory for linear-Gaussian experiments.
  std::vector<GaussianParams> kf_ref;
  if (tw.linear) {
    GaussianParams g = tw.initial_gaussian;
    kf_ref.push_back(g);
    for (int s = 1; s <= n; ++s) {
      g = kf_step(g, *tw.linear, tw.obs[static_cast<std::size_t>(s)]);
      kf_ref.push_back(g);
    }
  }
  auto reference = [&](int s) -> std::optional<GaussianParams> {
    if (kf_ref.empty()) return std::nullopt;
    return kf_ref[static_cast<std::size_t>(s)];
  };

  for (const auto& method : cfg.methods) {
    const RngKey mkey = rep_key.derive(method_label(method));
    Ensemble ens = tw.initial;
    VectorXd weights = VectorXd::Constant(ens.size(), 1.0 / static_cast<double>(ens.size()));
    int s = 1;
    try {
      for (; s <= n; ++s) {
        const RngKey skey = mkey.derive(static_cast<std::uint64_t>(s));
        const VectorXd& y = tw.obs[static_cast<std::size_t>(s)];
        const auto t0 = Clock::now();
        StepRecord rec;
        rec.method = method;
        rec.repetition = rep;
        rec.step = s;
        rec.reference = reference(s);
        Fit fit;
        if (method == "kf") {
          const GaussianParams& g = kf_ref[static_cast<std::size_t>(s)];
          fit = {g.mean, g.cov};
        } else {
          ens = tw.forecast(ens, skey.derive(1));
          if (method == "free_run") {
            fit = fit_ensemble(ens);
          } else if (method == "enkf") {
            ens = enkf_update(ens, obs, y, cfg.enkf.inflation,
                              {cfg.enkf.loc_halfwidth, LocalizationMetric::index_ring},
                              skey.derive(2));
            fit = fit_ensemble(ens);
          } else if (method == "letkf") {
            ens = letkf_update(ens, obs, y, cfg.letkf.inflation,
                               {cfg.letkf.loc_halfwidth, LocalizationMetric::index_ring});
            fit = fit_ensemble(ens);
          } else if (method == "pf") {
            const ParticleState ps = pf_update(ens, weights, obs, y, skey.derive(2),
                                               cfg.pf_ess_fraction);
            ens = ps.particles;
            weights = ps.weights;
            fit = fit_weighted(ens, weights);
          } else if (method == "ensf") {
            ens = ensf_update(inflate_anomalies(ens, cfg.ensf_inflation), y, obs, cfg.ensf_score,
                              cfg.ensf_integ, skey.derive(2));
            fit = fit_ensemble(ens);
          } else if (method == "iensf") {
            const IEnSFResult r = iensf_update(ens, y, obs, cfg.iensf, skey.derive(2));
            ens = r.posterior;
            fit = fit_ensemble(ens);
            for (const auto& it : r.iterations) {
              double all = 0.0;
              ResultRow row = make_row(ctx, method, rep, it.iteration, {it.mean, it.cov},
                                       tw.truth[static_cast<std::size_t>(s)], rec.reference,
                                       0.0, &all);
              out.iteration_rows.push_back(row);
              rec.iteration_fits.push_back({it.mean, it.cov});
            }
          }
          if (!fit.mean.allFinite()) throw NumericalError("analysis produced non-finite states");
        }
        double all = 0.0;
        out.rows.push_back(make_row(ctx, method, rep, s, fit,
                                    tw.truth[static_cast<std::size_t>(s)], rec.reference,
                                    elapsed_ms(t0, cfg.record_timing), &all));
        rec.mean = fit.mean;
        rec.cov = fit.cov;
        rec.rmse_all = all;
        out.records.push_back(std::move(rec));
      }
    } catch (const std::exception& e) {
      if (dynamic_cast<const ConfigError*>(&e) != nullptr) throw;
      out.errors.push_back(method + " (repetition " + std::to_string(rep) + ", step " +
                           std::to_string(s) + "): " + e.what());
      for (; s <= n; ++s) {
        out.rows.push_back(failed_row(ctx, method, rep, s));
        StepRecord rec;
        rec.method = method;
        rec.repetition = rep;
        rec.step = s;
        rec.failed = true;
        out.records.push_back(std::move(rec));
      }
    }
  }
  return out;
}

std::vector<MethodSummary> summarize(const ExperimentConfig& cfg,
                                     const std::vector<ResultRow>& rows,
                                     const std::vector<StepRecord>& records) {
  const bool stat = is_static(cfg.experiment);
  const int spin = stat ? 0 : static_cast<int>(std::floor(cfg.spinup_fraction * cfg.n_steps_da));
  std::vector<MethodSummary> out;
  for (const auto& m : cfg.methods) {
    MethodSummary s;
    s.method = m;
    int n_obs = 0;
    int n_un = 0;
    int n_kl = 0;
    for (const auto& rec : records) {
      if (rec.method != m || rec.step <= spin) continue;
      if (rec.failed) {
        ++s.failures;
        continue;
      }
      s.rmse_all += rec.rmse_all;
      ++s.samples;
    }
    for (const auto& r : rows) {
      if (r.method != m || r.failed) continue;
      if (stat) {
        // final row per repetition (last refinement iteration)
        bool last = true;
        for (const auto& o : rows) {
          if (o.method == m && o.repetition == r.repetition &&
              o.step_or_iteration > r.step_or_iteration) {
            last = false;
          }
        }
        if (!last) continue;
      } else if (r.step_or_iteration <= spin) {
        continue;
      }
      if (r.rmse_obs) {
        s.rmse_obs += *r.rmse_obs;
        ++n_obs;
      }
      if (r.rmse_unobs) {
        s.rmse_unobs += *r.rmse_unobs;
        ++n_un;
      }
      if (r.kl) {
        s.kl += *r.kl;
        ++n_kl;
      }
      if (r.spread) s.spread += *r.spread;
    }
    const auto div = [](double v, int c) {
      return c > 0 ? v / c : std::numeric_limits<double>::quiet_NaN();
    };
    s.rmse_obs = div(s.rmse_obs, n_obs);
    s.rmse_unobs = div(s.rmse_unobs, n_un);
    s.kl = div(s.kl, n_kl);
    s.spread = div(s.spread, s.samples);
    s.rmse_all = div(s.rmse_all, s.samples);
    out.push_back(s);
  }
  return out;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  ExperimentResult result;
  const int reps = cfg.repetitions;
  std::vector<RepOutput> outs(static_cast<std::size_t>(reps));
  std::optional<StaticProblem> problem;
  if (is_static(cfg.experiment)) {
    problem = make_static_problem(cfg);
    result.oracle = problem->oracle;
  }

  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (int r = 0; r < reps; ++r) {
    try {
      outs[static_cast<std::size_t>(r)] =
          problem ? run_static_rep(cfg, *problem, r) : run_sequential_rep(cfg, r);
    } catch (...) {
#pragma omp critical(scoreda_harness_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  for (auto& o : outs) {
    result.rows.insert(result.rows.end(), o.rows.begin(), o.rows.end());
    result.iteration_rows.insert(result.iteration_rows.end(), o.iteration_rows.begin(),
                                 o.iteration_rows.end());
    result.records.insert(result.records.end(), o.records.begin(), o.records.end());
    result.errors.insert(result.errors.end(), o.errors.begin(), o.errors.end());
  }
  result.summary = summarize(cfg, result.rows, result.records);
  return result;
}

std::string format_summary(const ExperimentConfig& cfg, const ExperimentResult& result) {
  std::ostringstream os;
  os << "experiment " << to_string(cfg.experiment) << ", K = " << cfg.ensemble_size
     << ", repetitions = " << cfg.repetitions << ", seed = " << cfg.seed << '\n';
  if (is_static(cfg.experiment)) {
    os << "reference posterior mean " << result.oracle.mean.transpose() << '\n';
    os << "metrics of the final analysis of each repetition (errors against the reference mean)\n";
  } else {
    os << "time averages over steps > "
       << static_cast<int>(std::floor(cfg.spinup_fraction * cfg.n_steps_da)) << " of "
       << cfg.n_steps_da << '\n';
  }
  os << std::left << std::setw(10) << "method" << std::right << std::setw(14) << "rmse_obs"
     << std::setw(14) << "rmse_unobs" << std::setw(14) << "rmse_all" << std::setw(14) << "kl"
     << std::setw(14) << "spread" << std::setw(10) << "failures" << '\n';
  os << std::setprecision(6);
  for (const auto& s : result.summary) {
    os << std::left << std::setw(10) << s.method << std::right << std::setw(14) << s.rmse_obs
       << std::setw(14) << s.rmse_unobs << std::setw(14) << s.rmse_all << std::setw(14) << s.kl
       << std::setw(14) << s.spread << std::setw(10) << s.failures << '\n';
  }
  for (const auto& e : result.errors) os << "error: " << e << '\n';
  return os.str();
}

void write_outputs(const ExperimentConfig& cfg, const ExperimentResult& result) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.output_dir);
  {
    std::ofstream f(fs::path(cfg.output_dir) / "results.csv");
    write_csv(f, result.rows);
  }
  if (!result.iteration_rows.empty()) {
    std::ofstream f(fs::path(cfg.output_dir) / "iterations.csv");
    write_csv(f, result.iteration_rows);
  }
  {
    std::ofstream f(fs::path(cfg.output_dir) / "summary.txt");
    f << format_summary(cfg, result);
  }
  {
    std::ofstream f(fs::path(cfg.output_dir) / "effective_config.json");
    f << cfg.effective_json << '\n';
  }
}

// ---------------------------------------------------------------------------
// Grid search

GridSpec grid_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    if (!j.is_object()) throw ConfigError("grid: top level must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (it.key() != "inflation" && it.key() != "loc_halfwidth" && it.key() != "gamma") {
        throw ConfigError("grid: unknown key '" + it.key() + "'");
      }
    }
    GridSpec g;
    if (j.contains("inflation")) g.inflation = j.at("inflation").get<std::vector<double>>();
    if (j.contains("gamma")) g.gamma = j.at("gamma").get<std::vector<double>>();
    if (j.contains("loc_halfwidth")) {
      for (const auto& v : j.at("loc_halfwidth")) {
        g.loc_halfwidth.push_back(v.is_null() ? std::nullopt : std::optional<double>(v.get<double>()));
      }
    }
    return g;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
}

GridSpec load_grid(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("grid: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return grid_from_json(ss.str());
}

GridSearchResult grid_search(const ExperimentConfig& cfg, const GridSpec& grid) {
  if (grid.inflation.empty() && grid.loc_halfwidth.empty() && grid.gamma.empty()) {
    throw ConfigError("grid: at least one non-empty axis required");
  }
  for (double v : grid.inflation) {
    if (!(v >= 1.0)) throw ConfigError("grid: inflation values must be >= 1");
  }
  for (const auto& v : grid.loc_halfwidth) {
    if (v && !(*v > 0.0)) throw ConfigError("grid: loc_halfwidth values must be positive");
  }
  for (double v : grid.gamma) {
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("grid: gamma values must lie in [0, 1]");
  }
  // Empty axes keep the configured value.
  const std::vector<double> infl =
      grid.inflation.empty() ? std::vector<double>{std::numeric_limits<double>::quiet_NaN()}
                             : grid.inflation;
  const std::vector<std::optional<double>> locs =
      grid.loc_halfwidth.empty() ? std::vector<std::optional<double>>{std::nullopt}
                                 : grid.loc_halfwidth;
  const bool loc_axis = !grid.loc_halfwidth.empty();
  const std::vector<double> gammas =
      grid.gamma.empty() ? std::vector<double>{std::numeric_limits<double>::quiet_NaN()}
                         : grid.gamma;

  struct Cell {
    ExperimentConfig cfg;
    double inflation;
    std::optional<double> loc;
    double gamma;
  };
  std::vector<Cell> cells;
  for (double a : infl) {
    for (const auto& l : locs) {
      for (double g : gammas) {
        Cell c{cfg, a, l, g};
        if (!std::isnan(a)) {
          c.cfg.enkf.inflation = a;
          c.cfg.letkf.inflation = a;
          c.cfg.iensf.prior.inflation = a;
          c.cfg.ensf_inflation = a;
        }
        if (loc_axis) {
          c.cfg.enkf.loc_halfwidth = l;
          c.cfg.letkf.loc_halfwidth = l;
          c.cfg.iensf.prior.loc_halfwidth = l;
        }
        if (!std::isnan(g)) c.cfg.iensf.prior.gamma = g;
        c.inflation = c.cfg.iensf.prior.inflation;
        c.loc = c.cfg.iensf.prior.loc_halfwidth;
        c.gamma = c.cfg.iensf.prior.gamma;
        cells.push_back(std::move(c));
      }
    }
  }

  std::vector<std::vector<GridCellResult>> per_cell(cells.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < cells.size(); ++i) {
    try {
      const Cell& c = cells[i];
      const ExperimentResult r = run_experiment(c.cfg);
      for (const auto& s : r.summary) {
        GridCellResult g;
        g.cell = static_cast<int>(i);
        g.method = s.method;
        g.failed = s.failures > 0 || !std::isfinite(s.rmse_all);
        g.score = s.rmse_all;
        // Report the parameters that actually apply to the method.
        const FilterBlock* fb = s.method == "enkf"    ? &c.cfg.enkf
                                : s.method == "letkf" ? &c.cfg.letkf
                                                      : nullptr;
        g.inflation = fb ? fb->inflation
                         : (s.method == "ensf" ? c.cfg.ensf_inflation : c.inflation);
        g.loc_halfwidth = fb ? fb->loc_halfwidth : c.loc;
        g.gamma = c.gamma;
        per_cell[i].push_back(g);
      }
    } catch (...) {
#pragma omp critical(scoreda_grid_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  GridSearchResult out;
  for (const auto& v : per_cell) out.table.insert(out.table.end(), v.begin(), v.end());
  for (const auto& g : out.table) {
    if (g.failed) continue;
    const auto it = out.winners.find(g.method);
    if (it == out.winners.end() || g.score < it->second.score) out.winners[g.method] = g;
  }
  return out;
}

void write_grid_outputs(const ExperimentConfig& cfg, const GridSearchResult& result) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.output_dir);
  auto write = [](std::ostream& os, const GridCellResult& g) {
    os << g.cell << ',' << g.method << ',' << fmt(g.inflation) << ','
       << (g.loc_halfwidth ? fmt(*g.loc_halfwidth) : std::string()) << ',' << fmt(g.gamma) << ','
       << (g.failed ? std::string("failed") : fmt(g.score)) << '\n';
  };
  const char* header = "cell,method,inflation,loc_halfwidth,gamma,rmse_all\n";
  {
    std::ofstream f(fs::path(cfg.output_dir) / "grid_table.csv");
    f << header;
    for (const auto& g : result.table) write(f, g);
  }
  {
    std::ofstream f(fs::path(cfg.output_dir) / "grid_winners.csv");
    f << header;
    for (const auto& m : cfg.methods) {
      const auto it = result.winners.find(m);
      if (it != result.winners.end()) write(f, it->second);
    }
  }
  {
    std::ofstream f(fs::path(cfg.output_dir) / "effective_config.json");
    f << cfg.effective_json << '\n';
  }
}

}  // namespace scoreda
