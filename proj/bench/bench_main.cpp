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

// Serial reference vs OpenMP kernels. Arg 0 = serial, 1 = parallel.

#include <benchmark/benchmark.h>

#include "scoreda/baselines.hpp"
#include "scoreda/gm_prior.hpp"
#include "scoreda/iensf.hpp"
#include "scoreda/metrics.hpp"
#include "scoreda/parallel.hpp"

namespace scoreda {
namespace {

Exec exec_of(const benchmark::State& st) { return st.range(0) == 0 ? Exec::serial : Exec::parallel; }

Ensemble random_ensemble(Eigen::Index d, Eigen::Index k, std::uint64_t seed) {
  RngStream rng{RngKey(seed)};
  Ensemble e(d, k);
  for (Eigen::Index j = 0; j < k; ++j) e.member(j) = rng.normal_vector(d);
  return e;
}

void BM_IEnSFUpdate(benchmark::State& st) {
  const Eigen::Index d = 40;
  const Ensemble prior = random_ensemble(d, st.range(1), 1);
  const ObservationModel obs = ObservationModel::arctan_selected(
      d, ObservationModel::every_nth(d, 4), 0.0025 * MatrixXd::Identity(10, 10));
  const VectorXd y = VectorXd::Constant(10, 0.3);
  IEnSFConfig cfg;
  cfg.max_iters = 1;
  cfg.exec = exec_of(st);
  cfg.prior.loc_halfwidth = 4.0;
  for (auto _ : st) benchmark::DoNotOptimize(iensf_update(prior, y, obs, cfg, RngKey(2)));
}
BENCHMARK(BM_IEnSFUpdate)->ArgsProduct({{0, 1}, {20, 100}})->Unit(benchmark::kMillisecond);

void BM_LetkfUpdate(benchmark::State& st) {
  const Eigen::Index d = st.range(1);
  const Ensemble e = random_ensemble(d, 20, 3);
  const Eigen::Index r = d / 4;
  const ObservationModel obs = ObservationModel::arctan_selected(
      d, ObservationModel::every_nth(d, 4), 0.0025 * MatrixXd::Identity(r, r));
  const VectorXd y = VectorXd::Constant(r, 0.3);
  const LocalizationOptions loc{4.0, LocalizationMetric::index_ring};
  for (auto _ : st) benchmark::DoNotOptimize(letkf_update(e, obs, y, 1.05, loc, exec_of(st)));
}
BENCHMARK(BM_LetkfUpdate)->ArgsProduct({{0, 1}, {40, 1000}})->Unit(benchmark::kMillisecond);

// The grid oracle has no Exec switch; the serial variant caps OpenMP at one thread.
void BM_GridOracle(benchmark::State& st) {
  const int saved = max_threads();
  if (st.range(0) == 0) set_max_threads(1);
  const GaussianParams prior{VectorXd::Zero(2), (MatrixXd(2, 2) << 0.5, -0.4, -0.4, 0.5).finished()};
  const ObservationModel obs = ObservationModel::radial((VectorXd(2) << 1.0, 1.0).finished(), 0.1);
  const VectorXd y = VectorXd::Constant(1, 1.5);
  for (auto _ : st) {
    benchmark::DoNotOptimize(grid_bayes_oracle(
        [&](const VectorXd& x) { return gaussian_logpdf(x, prior); }, obs, y, {{-5, 5}, {-5, 5}}, 401));
  }
  set_max_threads(saved);
}
BENCHMARK(BM_GridOracle)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace scoreda

BENCHMARK_MAIN();
