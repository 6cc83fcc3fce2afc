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

#include <gtest/gtest.h>

#include <cmath>

#include "scoreda/baselines.hpp"
#include "scoreda/metrics.hpp"
#include "test_util.hpp"

namespace scoreda {
namespace {

const MatrixXd kSigma = (MatrixXd(2, 2) << 0.5, -0.4, -0.4, 0.5).finished();
const std::vector<std::pair<double, double>> kSixSigma{{-4.3, 4.3}, {-4.3, 4.3}};

LogDensityFn scenario_prior() {
  const GaussianParams p{VectorXd::Zero(2), kSigma};
  return [p](const VectorXd& x) { return gaussian_logpdf(x, p); };
}

TEST(GridOracle, FlatLikelihoodReturnsPrior) {
  const ObservationModel obs = ObservationModel::select_linear(2, {0}, MatrixXd::Constant(1, 1, 1e14));
  const GridPosterior g = grid_bayes_oracle(scenario_prior(), obs, VectorXd::Constant(1, 3.0), kSixSigma, 401);
  EXPECT_LT(g.moments.mean.norm(), 1e-4);
  EXPECT_LT((g.moments.cov - kSigma).norm(), 1e-4);
}

TEST(GridOracle, ScenarioOneMatchesKalman) {
  const ObservationModel obs = ObservationModel::select_linear(2, {0}, MatrixXd::Constant(1, 1, 0.01));
  const VectorXd y = VectorXd::Constant(1, 3.0);
  const GaussianParams kf = kf_update({VectorXd::Zero(2), kSigma}, obs.linear_matrix(), obs.obs_cov(), y);
  // Prior six-sigma box extended to hold the posterior's x2 tail as well.
  const GridPosterior g = grid_bayes_oracle(scenario_prior(), obs, y, {{-4.3, 4.3}, {-6.5, 4.3}}, 1201);
  EXPECT_LT((g.moments.mean - kf.mean).norm(), 1e-5);
  EXPECT_LT((g.moments.cov - kf.cov).norm(), 1e-5);
}

TEST(GridOracle, DensityIntegratesToOne) {
  const ObservationModel obs = ObservationModel::radial((VectorXd(2) << 1.0, 1.0).finished(), 0.1);
  const GridPosterior g = grid_bayes_oracle(scenario_prior(), obs, VectorXd::Constant(1, 1.5), kSixSigma, 301);
  EXPECT_NEAR(g.integral, 1.0, 1e-6);
  EXPECT_EQ(g.log_density.size(), 301 * 301);
}

TEST(GridOracle, ScenarioTwoRefinementInvariant) {
  const ObservationModel obs = ObservationModel::radial((VectorXd(2) << 1.0, 1.0).finished(), 0.1);
  const VectorXd y = VectorXd::Constant(1, 1.5);
  const GridPosterior a = grid_bayes_oracle(scenario_prior(), obs, y, kSixSigma, 401);
  const GridPosterior b = grid_bayes_oracle(scenario_prior(), obs, y, kSixSigma, 801);
  EXPECT_LT((a.moments.mean - b.moments.mean).norm(), 1e-4);
  EXPECT_LT((a.moments.cov - b.moments.cov).norm(), 1e-4);
}

TEST(GridOracle, Errors) {
  const ObservationModel obs = ObservationModel::select_linear(2, {0}, MatrixXd::Constant(1, 1, 1e-4));
  const VectorXd y = VectorXd::Constant(1, 3.0);
  // Bounds far from the posterior: every cell underflows.
  EXPECT_THROW(grid_bayes_oracle(scenario_prior(), obs, VectorXd::Constant(1, 1e6), kSixSigma, 51),
               DomainError);
  const ObservationModel obs4 = ObservationModel::select_linear(4, {0}, MatrixXd::Constant(1, 1, 1.0));
  EXPECT_THROW(grid_bayes_oracle([](const VectorXd&) { return 0.0; }, obs4, y,
                                 {{0, 1}, {0, 1}, {0, 1}, {0, 1}}, 5),
               DomainError);
  EXPECT_THROW(grid_bayes_oracle(scenario_prior(), obs, y, kSixSigma, 2), ConfigError);
}

TEST(RmseSplit, Examples) {
  const VectorXd truth = (VectorXd(4) << 1.0, 2.0, 3.0, 4.0).finished();
  const RmseSplit same = rmse_split(truth, truth, {0, 2});
  EXPECT_EQ(*same.obs, 0.0);
  EXPECT_EQ(*same.unobs, 0.0);
  EXPECT_EQ(same.all, 0.0);

  const RmseSplit off = rmse_split(truth.array() - 0.75, truth, {1});
  EXPECT_DOUBLE_EQ(*off.obs, 0.75);
  EXPECT_DOUBLE_EQ(*off.unobs, 0.75);
  EXPECT_DOUBLE_EQ(off.all, 0.75);

  const VectorXd err = (VectorXd(4) << 3.0, 0.0, 4.0, 0.0).finished();
  const RmseSplit s = rmse_split(truth + err, truth, {0, 2});
  EXPECT_NEAR(*s.obs, std::sqrt(12.5), 1e-15);
  EXPECT_EQ(*s.unobs, 0.0);
}

TEST(RmseSplit, EmptySubsetsAbsent) {
  const VectorXd v = VectorXd::Ones(3);
  EXPECT_FALSE(rmse_split(v, v, {}).obs.has_value());
  EXPECT_FALSE(rmse_split(v, v, {0, 1, 2}).unobs.has_value());
  EXPECT_THROW(rmse_split(v, v, {3}), DomainError);
  EXPECT_THROW(rmse_split(VectorXd::Ones(2), v, {}), DomainError);
}

TEST(RmseSplit, PythagoreanIdentity) {
  RngStream rng(RngKey(11));
  for (int trial = 0; trial < 20; ++trial) {
    const VectorXd a = rng.normal_vector(10);
    const VectorXd b = rng.normal_vector(10);
    const std::vector<Eigen::Index> idx{0, 3, 4, 8};
    const RmseSplit s = rmse_split(a, b, idx);
    EXPECT_NEAR(s.all * s.all * 10.0, *s.obs * *s.obs * 4.0 + *s.unobs * *s.unobs * 6.0, 1e-12);
  }
}

TEST(EnsembleKl, SamplesFromReference) {
  const GaussianParams ref{(VectorXd(2) << 1.0, -2.0).finished(), kSigma};
  RngStream rng(RngKey(12));
  const MatrixXd l = kSigma.llt().matrixL();
  Ensemble e(2, 10000);
  for (Eigen::Index j = 0; j < e.size(); ++j) e.member(j) = ref.mean + l * rng.normal_vector(2);
  EXPECT_LE(ensemble_kl(e, ref), 0.01);
}

TEST(EnsembleKl, ExactFitIsZeroAndMismatchIncreases) {
  RngStream rng(RngKey(13));
  MatrixXd x(2, 50);
  for (Eigen::Index j = 0; j < x.cols(); ++j) x.col(j) = rng.normal_vector(2);
  const Ensemble e{MatrixXd(x)};
  const SampleStats s = sample_mean_cov(e);
  const GaussianParams matched{s.mean, s.cov};
  EXPECT_NEAR(ensemble_kl(e, matched), 0.0, 1e-12);
  const GaussianParams halved{s.mean, 0.5 * s.cov};
  EXPECT_GT(ensemble_kl(e, halved), ensemble_kl(e, matched) + 0.1);
  EXPECT_THROW(ensemble_kl(Ensemble(MatrixXd::Zero(2, 3)), matched), DomainError);
}

TEST(EnsembleSpread, Example) {
  const MatrixXd x = (MatrixXd(2, 2) << 0.0, 2.0, 1.0, 1.0).finished();
  // Unbiased variances 2 and 0.
  EXPECT_DOUBLE_EQ(ensemble_spread(Ensemble{MatrixXd(x)}), 1.0);
}

TEST(RandomWalkMetropolis, RecoversGaussianMoments) {
  const GaussianParams target{(VectorXd(2) << 1.0, -1.0).finished(), kSigma};
  const Ensemble chain = random_walk_metropolis(
      [&](const VectorXd& x) { return gaussian_logpdf(x, target); }, VectorXd::Zero(2), 0.6,
      400000, 10000, 10, RngKey(14));
  EXPECT_EQ(chain.size(), 39000);
  const SampleStats s = sample_mean_cov(chain);
  EXPECT_LT((s.mean - target.mean).norm(), 0.05);
  EXPECT_LT((s.cov - target.cov).norm(), 0.05);
  EXPECT_THROW(random_walk_metropolis([](const VectorXd&) { return 0.0; }, VectorXd::Zero(1), 0.0,
                                      10, 0, 1, RngKey(1)),
               ConfigError);
}

}  // namespace
}  // namespace scoreda
