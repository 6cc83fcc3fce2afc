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
#include <algorithm>
#include <cmath>
#include <memory>

#include <gtest/gtest.h>

#include "scoreda/baselines.hpp"
#include "scoreda/posterior_score.hpp"
#include "test_util.hpp"

namespace scoreda {
namespace {

VectorXd posterior_weights(const GaussianMixturePrior& prior, const ObservationModel& obs,
                           const VectorXd& y, double t, const VectorXd& z, ObsWeightMode mode,
                           const VectorXd& expansion) {
  const ReverseKernelParams kernel = gm_reverse_kernel(prior, t, z);
  VectorXd logw = gm_prior_score(prior, t, z).weights.array().log().matrix();
  logw += observation_weights(prior, obs, y, kernel, mode, &expansion);
  softmax_inplace(logw);
  return logw;
}

GaussianMixturePrior random_mixture(Eigen::Index d, Eigen::Index k, RngStream& rng) {
  MatrixXd means(d, k);
  for (Eigen::Index j = 0; j < k; ++j) means.col(j) = 1.5 * rng.normal_vector(d);
  return GaussianMixturePrior::from_components(means, testing::random_spd(d, rng), 0.5);
}

const ObsWeightMode kModes[] = {ObsWeightMode::component_point, ObsWeightMode::zeroth_order,
                                ObsWeightMode::shared_point, ObsWeightMode::off};

TEST(EvalPointMubar, Examples) {
  RngStream rng(RngKey(1));
  const ReferencePosterior ref{rng.normal_vector(3), testing::random_spd(3, rng)};
  const VectorXd z = rng.normal_vector(3);
  EXPECT_LT((eval_point_mubar(ref, 0.0, z) - z).norm(), 1e-14);
  EXPECT_EQ(eval_point_mubar(ref, 1.0, z), ref.mu_star);
  const ReferencePosterior iso{VectorXd::Zero(3), MatrixXd::Identity(3, 3)};
  EXPECT_LT((eval_point_mubar(iso, 0.5, z) - (2.0 / 3.0) * z).norm(), 1e-15);
}

TEST(ObservationWeights, SingleComponentAndIdenticalMeans) {
  RngStream rng(RngKey(2));
  const ObservationModel obs = ObservationModel::arctan_selected(3, {0, 2}, 0.1 * MatrixXd::Identity(2, 2));
  const VectorXd y = rng.normal_vector(2);
  const GaussianMixturePrior one = GaussianMixturePrior::single(rng.normal_vector(3), testing::random_spd(3, rng));
  MatrixXd same(3, 4);
  same.colwise() = rng.normal_vector(3);
  const GaussianMixturePrior ident = GaussianMixturePrior::from_components(same, testing::random_spd(3, rng), 1.0);
  const VectorXd z = rng.normal_vector(3);
  const VectorXd e = rng.normal_vector(3);
  for (ObsWeightMode m : kModes) {
    const VectorXd w1 = posterior_weights(one, obs, y, 0.3, z, m, e);
    EXPECT_EQ(w1.size(), 1);
    EXPECT_NEAR(w1(0), 1.0, 1e-15);
    const VectorXd w4 = posterior_weights(ident, obs, y, 0.3, z, m, e);
    EXPECT_LT((w4.array() - 0.25).abs().maxCoeff(), 1e-14);
  }
}

TEST(ObservationWeights, SimplexAndOffMode) {
  RngStream rng(RngKey(3));
  const GaussianMixturePrior p = random_mixture(3, 6, rng);
  const ObservationModel obs = ObservationModel::radial(VectorXd::Zero(3), 0.3);
  const VectorXd y = VectorXd::Constant(1, 1.2);
  for (int i = 0; i < 20; ++i) {
    const double t = 0.01 + 0.98 * rng.uniform();
    const VectorXd z = rng.normal_vector(3);
    for (ObsWeightMode m : kModes) {
      const VectorXd w = posterior_weights(p, obs, y, t, z, m, p.means.col(0));
      EXPECT_NEAR(w.sum(), 1.0, 1e-12);
      EXPECT_TRUE((w.array() >= 0.0).all());
    }
    // Off adds exact zeros to the prior log-responsibilities.
    const ReverseKernelParams kernel = gm_reverse_kernel(p, t, z);
    EXPECT_EQ(observation_weights(p, obs, y, kernel, ObsWeightMode::off), VectorXd::Zero(6));
    EXPECT_LT((posterior_weights(p, obs, y, t, z, ObsWeightMode::off, z) -
               gm_prior_score(p, t, z).weights).cwiseAbs().maxCoeff(), 1e-15);
  }
}

// p(k | z_t, y) from a dense grid over x0 of the joint density.
TEST(ObservationWeights, TwoComponentGridOracle) {
  MatrixXd means(1, 2);
  means << -1.0, 1.5;
  const double sig = 0.4;
  const GaussianMixturePrior p =
      GaussianMixturePrior::from_components(means, MatrixXd::Constant(1, 1, sig), 0.5);
  const double r = 0.3;
  const ObservationModel obs = ObservationModel::linear(MatrixXd::Identity(1, 1), MatrixXd::Constant(1, 1, r));
  const VectorXd y = VectorXd::Constant(1, 0.7);
  for (double t : {0.2, 0.5, 0.8}) {
    const VectorXd z = VectorXd::Constant(1, 0.3);
    const ScheduleValues s = noise_schedule(t, false);
    VectorXd oracle(2);
    const int n = 40001;
    const double lo = -12.0;
    const double hi = 12.0;
    const double h = (hi - lo) / (n - 1);
    for (int k = 0; k < 2; ++k) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) {
        const double x0 = lo + i * h;
        const double prior = std::exp(-0.5 * (x0 - means(0, k)) * (x0 - means(0, k)) / sig) /
                             std::sqrt(2 * M_PI * sig);
        const double fwd = std::exp(-0.5 * (z(0) - s.alpha * x0) * (z(0) - s.alpha * x0) / s.beta_sq) /
                           std::sqrt(2 * M_PI * s.beta_sq);
        const double lik = std::exp(-0.5 * (y(0) - x0) * (y(0) - x0) / r);
        acc += (i == 0 || i == n - 1 ? 0.5 : 1.0) * prior * fwd * lik;
      }
      oracle(k) = 0.5 * acc * h;
    }
    oracle /= oracle.sum();
    const VectorXd w = posterior_weights(p, obs, y, t, z, ObsWeightMode::component_point, z);
    EXPECT_LE(0.5 * (w - oracle).cwiseAbs().sum(), 1e-3) << "t=" << t;
  }
}

// With a single Gaussian prior, linear M and the exact Kalman posterior as
// reference, the score equals the diffused posterior score.
TEST(IEnSFScore, LinearGaussianExactness) {
  RngStream rng(RngKey(4));
  for (int problem = 0; problem < 10; ++problem) {
    const VectorXd mu = rng.normal_vector(2);
    const MatrixXd sigma = testing::random_spd(2, rng);
    const Eigen::Index r = 1 + problem % 2;
    MatrixXd h(r, 2);
    for (Eigen::Index i = 0; i < h.size(); ++i) h.data()[i] = rng.normal();
    const MatrixXd rc = 0.1 * testing::random_spd(r, rng);
    const ObservationModel obs = ObservationModel::linear(h, rc);
    const VectorXd y = rng.normal_vector(r);
    const GaussianParams post = kf_update({mu, sigma}, h, rc, y);
    const GaussianMixturePrior prior = GaussianMixturePrior::single(mu, sigma);
    const ReferencePosterior ref{post.mean, post.cov};
    for (int it = 0; it < 10; ++it) {
      const double t = 0.001 + 0.998 * it / 9.0;
      const ScheduleValues s = noise_schedule(t, false);
      const MatrixXd pt = s.alpha * s.alpha * post.cov + s.beta_sq * MatrixXd::Identity(2, 2);
      for (int iz = 0; iz < 10; ++iz) {
        const VectorXd z = 2.0 * rng.normal_vector(2);
        const VectorXd exact = -pt.llt().solve(z - s.alpha * post.mean);
        const VectorXd got = iensf_score(prior, ref, obs, y, t, z);
        EXPECT_LE((got - exact).norm(), 1e-6 * exact.norm()) << "problem " << problem << " t=" << t;
      }
    }
  }
}

TEST(IEnSFScore, FlatLikelihoodReducesToPriorScore) {
  RngStream rng(RngKey(5));
  const GaussianMixturePrior p = random_mixture(2, 5, rng);
  const ObservationModel obs = ObservationModel::select_linear(2, {0}, MatrixXd::Constant(1, 1, 1e14));
  const ReferencePosterior ref{rng.normal_vector(2), testing::random_spd(2, rng)};
  const VectorXd y = VectorXd::Constant(1, 3.0);
  for (double t : {0.1, 0.5, 0.9}) {
    const VectorXd z = rng.normal_vector(2);
    const VectorXd a = iensf_score(p, ref, obs, y, t, z);
    const VectorXd b = gm_prior_score(p, t, z).score;
    EXPECT_LT((a - b).norm(), 1e-9 * b.norm());
  }
}

TEST(IEnSFScore, TerminalTimeIsStandardGaussianScore) {
  RngStream rng(RngKey(6));
  const GaussianMixturePrior p = random_mixture(2, 3, rng);
  const ObservationModel obs = ObservationModel::radial(VectorXd::Ones(2), 0.1);
  const ReferencePosterior ref{rng.normal_vector(2), testing::random_spd(2, rng)};
  const VectorXd z = rng.normal_vector(2);
  const VectorXd s = iensf_score(p, ref, obs, VectorXd::Constant(1, 1.5), 1.0, z);
  EXPECT_LT((s + z).norm(), 1e-14);
}

struct FieldCase {
  const char* name;
  ObservationModel obs;
  ObsWeightMode mode;
  double gamma;
};

// Batched score fields match the per-point serial reference for every kernel path.
TEST(IEnSFScoreField, MatchesSerialReference) {
  RngStream rng(RngKey(7));
  const Eigen::Index d = 6;
  MatrixXd hdense(3, d);
  for (Eigen::Index i = 0; i < hdense.size(); ++i) hdense.data()[i] = rng.normal();
  const MatrixXd r2 = 0.2 * MatrixXd::Identity(2, 2);
  const std::vector<FieldCase> cases = {
      {"select", ObservationModel::select_linear(d, {1, 4}, r2), ObsWeightMode::component_point, 0.5},
      {"dense", ObservationModel::linear(hdense, 0.3 * MatrixXd::Identity(3, 3)), ObsWeightMode::component_point, 0.5},
      {"arctan", ObservationModel::arctan_selected(d, {0, 3}, r2), ObsWeightMode::component_point, 0.5},
      {"arctan-zeroth", ObservationModel::arctan_selected(d, {0, 3}, r2), ObsWeightMode::zeroth_order, 0.5},
      {"arctan-shared", ObservationModel::arctan_selected(d, {0, 3}, r2), ObsWeightMode::shared_point, 0.5},
      {"arctan-off", ObservationModel::arctan_selected(d, {0, 3}, r2), ObsWeightMode::off, 0.5},
      {"radial", ObservationModel::radial(VectorXd::Ones(d), 0.2), ObsWeightMode::component_point, 0.5},
      {"radial-zeroth", ObservationModel::radial(VectorXd::Ones(d), 0.2), ObsWeightMode::zeroth_order, 0.5},
      {"single", ObservationModel::arctan_selected(d, {0, 3}, r2), ObsWeightMode::component_point, 1.0},
  };
  Ensemble ens(d, 12);
  for (Eigen::Index k = 0; k < 12; ++k) ens.member(k) = rng.normal_vector(d);
  for (const auto& c : cases) {
    auto prior = std::make_shared<const GaussianMixturePrior>(build_gm_prior(ens, c.gamma));
    auto obs = std::make_shared<const ObservationModel>(c.obs);
    const VectorXd y = 0.5 * rng.normal_vector(c.obs.obs_dim());
    const ReferencePosterior ref{rng.normal_vector(d), testing::random_spd(d, rng)};
    ScoreConfig cfg;
    cfg.obs_weight_mode = c.mode;
    const IEnSFScoreField field(prior, ref, obs, y, cfg);
    for (double t : {0.001, 0.05, 0.3, 0.7, 0.999}) {
      const auto step = field.prepare(t);
      for (int i = 0; i < 4; ++i) {
        const VectorXd z = rng.normal_vector(d);
        VectorXd got(d);
        step->eval(z, got);
        const VectorXd want = iensf_score(*prior, ref, *obs, y, t, z, cfg);
        EXPECT_LE((got - want).norm(), 1e-9 * std::max(1.0, want.norm())) << c.name << " t=" << t;
      }
    }
  }
}

TEST(IEnSFScoreField, ContinuousInTime) {
  RngStream rng(RngKey(8));
  const Eigen::Index d = 4;
  Ensemble ens(d, 10);
  for (Eigen::Index k = 0; k < 10; ++k) ens.member(k) = rng.normal_vector(d);
  auto prior = std::make_shared<const GaussianMixturePrior>(build_gm_prior(ens, 0.5));
  auto obs = std::make_shared<const ObservationModel>(
      ObservationModel::arctan_selected(d, {0, 2}, 0.1 * MatrixXd::Identity(2, 2)));
  const ReferencePosterior ref{ens.mean(), sample_mean_cov(ens).cov};
  const IEnSFScoreField field(prior, ref, obs, (VectorXd(2) << 0.3, -0.4).finished(), ScoreConfig{});
  const VectorXd z = rng.normal_vector(d);
  const int n = 2000;
  std::vector<VectorXd> vals;
  for (int i = 0; i < n; ++i) {
    const double t = 0.001 + 0.998 * i / (n - 1.0);
    VectorXd out(d);
    field.prepare(t)->eval(z, out);
    vals.push_back(out);
  }
  std::vector<double> diff;
  for (int i = 0; i + 1 < n; ++i) diff.push_back((vals[i + 1] - vals[i]).norm());
  for (int i = 1; i + 2 < n; ++i) {
    const double local = std::max(diff[i - 1], diff[i + 1]);
    EXPECT_LE(diff[i], 10.0 * local + 1e-12) << "i=" << i;
  }
}

TEST(EnSFScore, DampingEndpointsAndStructuralGap) {
  RngStream rng(RngKey(9));
  const VectorXd mu = VectorXd::Constant(1, 0.5);
  const MatrixXd sigma = MatrixXd::Constant(1, 1, 1.3);
  const GaussianMixturePrior prior = GaussianMixturePrior::single(mu, sigma);
  const ObservationModel obs = ObservationModel::linear(MatrixXd::Identity(1, 1), MatrixXd::Constant(1, 1, 0.2));
  const VectorXd y = VectorXd::Constant(1, 2.0);
  const VectorXd z = VectorXd::Constant(1, 0.4);

  EXPECT_LT((ensf_score(prior, obs, y, 1.0, z) - gm_prior_score(prior, 1.0, z).score).norm(), 1e-15);
  const VectorXd full = gm_prior_score(prior, 0.0 + 1e-12, z).score + obs.likelihood_score(y, z);
  EXPECT_LT((ensf_score(prior, obs, y, 1e-12, z) - full).norm(), 1e-6 * full.norm());

  const GaussianParams post = kf_update({mu, sigma}, MatrixXd::Identity(1, 1), obs.obs_cov(), y);
  const VectorXd exact = iensf_score(prior, {post.mean, post.cov}, obs, y, 0.5, z);
  EXPECT_GT((ensf_score(prior, obs, y, 0.5, z) - exact).norm(), 1e-3);
}

TEST(EnSFScoreField, MatchesSerialReference) {
  RngStream rng(RngKey(10));
  const Eigen::Index d = 5;
  Ensemble ens(d, 8);
  for (Eigen::Index k = 0; k < 8; ++k) ens.member(k) = rng.normal_vector(d);
  auto obs = std::make_shared<const ObservationModel>(
      ObservationModel::arctan_selected(d, {1, 3}, 0.1 * MatrixXd::Identity(2, 2)));
  const VectorXd y = (VectorXd(2) << 0.2, -0.6).finished();
  for (double gamma : {0.0, 0.5}) {
    auto prior = std::make_shared<const GaussianMixturePrior>(
        gamma == 0.0 ? ensemble_delta_prior(ens) : build_gm_prior(ens, gamma));
    ScoreConfig cfg;
    cfg.method = ScoreMethod::ensf;
    const EnSFScoreField field(prior, obs, y, cfg);
    for (double t : {0.01, 0.4, 0.95}) {
      const auto step = field.prepare(t);
      const VectorXd z = rng.normal_vector(d);
      VectorXd got(d);
      step->eval(z, got);
      const VectorXd want = gamma == 0.0 ? ensf_score(ens, *obs, y, t, z, cfg)
                                         : ensf_score(*prior, *obs, y, t, z, cfg);
      EXPECT_LE((got - want).norm(), 1e-9 * std::max(1.0, want.norm())) << "gamma " << gamma << " t=" << t;
    }
  }
}

TEST(ScoreConfig, RejectsIncreasingDamping) {
  ScoreConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.ensf_damping = [](double t) { return t; };
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(ObsWeightMode, ParseRoundTrip) {
  for (ObsWeightMode m : kModes) EXPECT_EQ(parse_obs_weight_mode(to_string(m)), m);
  EXPECT_THROW(parse_obs_weight_mode("bogus"), ConfigError);
}

}  // namespace
}  // namespace scoreda
