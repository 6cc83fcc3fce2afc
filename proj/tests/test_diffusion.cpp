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
#include <cmath>
#include <cstring>
#include <limits>
#include <string>

#include <gtest/gtest.h>

#include "scoreda/diffusion.hpp"
#include "scoreda/gaussian_stats.hpp"
#include "test_util.hpp"

namespace scoreda {
namespace {

TEST(Schedule, EndpointsAndMidpoint) {
  const ScheduleValues s0 = noise_schedule(0.0);
  EXPECT_EQ(s0.alpha, 1.0);
  EXPECT_EQ(s0.beta_sq, 0.0);
  EXPECT_EQ(s0.drift, -1.0);
  EXPECT_EQ(s0.sigma_sq, 1.0);

  const ScheduleValues s1 = noise_schedule(1.0, false);
  EXPECT_EQ(s1.alpha, 0.0);
  EXPECT_EQ(s1.beta_sq, 1.0);

  const ScheduleValues h = noise_schedule(0.5);
  EXPECT_DOUBLE_EQ(h.alpha, 0.5);
  EXPECT_DOUBLE_EQ(h.beta_sq, 0.5);
  EXPECT_DOUBLE_EQ(h.drift, -2.0);
  EXPECT_DOUBLE_EQ(h.sigma_sq, 3.0);
}

TEST(Schedule, RejectsOutOfRangeAndSingularDrift) {
  EXPECT_THROW(noise_schedule(-0.1), DomainError);
  EXPECT_THROW(noise_schedule(1.1, false), DomainError);
  EXPECT_THROW(noise_schedule(1.0), DomainError);
}

TEST(Schedule, FiniteDifferenceConsistency) {
  RngStream rng(RngKey(11));
  const double dt = 1e-6;
  for (int i = 0; i < 20; ++i) {
    const double t = 0.01 + 0.94 * rng.uniform();
    const ScheduleValues s = noise_schedule(t);
    const ScheduleValues p = noise_schedule(t + dt);
    const ScheduleValues m = noise_schedule(t - dt);
    const double dlog = (std::log(p.alpha) - std::log(m.alpha)) / (2 * dt);
    const double dbeta = (p.beta_sq - m.beta_sq) / (2 * dt);
    EXPECT_NEAR(s.drift, dlog, 1e-5) << "t=" << t;
    EXPECT_NEAR(s.sigma_sq, dbeta - 2.0 * s.drift * s.beta_sq, 1e-4) << "t=" << t;
  }
}

TEST(Schedule, SignalToNoiseDecreases) {
  double prev = std::numeric_limits<double>::infinity();
  for (int i = 1; i < 1000; ++i) {
    const double t = i / 1000.0;
    const ScheduleValues s = noise_schedule(t, false);
    const double snr = s.alpha * s.alpha / s.beta_sq;
    EXPECT_LT(snr, prev);
    prev = snr;
  }
}

TEST(ForwardPerturb, Endpoints) {
  const VectorXd z0 = (VectorXd(3) << 1.0, -2.0, 0.5).finished();
  const VectorXd noise = (VectorXd(3) << 0.3, 0.1, -0.7).finished();
  EXPECT_EQ(forward_perturb(z0, 0.0, noise), z0);
  EXPECT_EQ(forward_perturb(z0, 1.0, noise), noise);
}

TEST(ForwardPerturb, MonteCarloMoments) {
  const VectorXd z0 = (VectorXd(2) << 2.0, -1.0).finished();
  RngStream rng(RngKey(3));
  const int n = 100000;
  Ensemble e(2, n);
  for (int k = 0; k < n; ++k) e.member(k) = forward_perturb(z0, 0.5, rng.normal_vector(2));
  const SampleStats st = sample_mean_cov(e);
  const double se_mean = std::sqrt(0.5 / n);
  const double se_var = 0.5 * std::sqrt(2.0 / n);
  for (int i = 0; i < 2; ++i) {
    EXPECT_NEAR(st.mean(i), 0.5 * z0(i), 3 * se_mean);
    EXPECT_NEAR(st.var(i), 0.5, 3 * se_var);
  }
}

TEST(ReverseIntegratorConfig, Validation) {
  ReverseIntegratorConfig c;
  EXPECT_NO_THROW(c.validate());
  c.n_steps = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.t_end = 0.5;
  c.t_start = 0.4;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(SampleReverse, ZeroStepsIsConfigError) {
  ReverseIntegratorConfig c;
  c.n_steps = 0;
  EXPECT_THROW(sample_reverse([](const VectorXd& z, double) { return VectorXd(-z); }, 4, 1, c,
                              RngKey(1)),
               ConfigError);
}

// Exact diffused score of N(0, I) is -z / (alpha^2 + beta^2).
TEST(SampleReverse, StandardGaussianMoments) {
  const long k = 10000;
  const ScoreFn score = [](const VectorXd& z, double t) {
    const ScheduleValues s = noise_schedule(t, false);
    return VectorXd(-z / (s.alpha * s.alpha + s.beta_sq));
  };
  const Ensemble e = sample_reverse(score, k, 2, ReverseIntegratorConfig{}, RngKey(5));
  const SampleStats st = sample_mean_cov(e);
  for (int i = 0; i < 2; ++i) {
    EXPECT_LT(std::abs(st.mean(i)), 4.0 / std::sqrt(static_cast<double>(k)));
    EXPECT_NEAR(st.var(i), 1.0, 0.1);
  }
}

TEST(SampleReverse, SingleGaussianScoreRecoversMoments) {
  const VectorXd mu = (VectorXd(2) << 3.0, -3.0).finished();
  const ScoreFn score = [mu](const VectorXd& z, double t) {
    const ScheduleValues s = noise_schedule(t, false);
    return VectorXd(-(z - s.alpha * mu) / (s.alpha * s.alpha + s.beta_sq));
  };
  const Ensemble e = sample_reverse(score, 10000, 2, ReverseIntegratorConfig{}, RngKey(6));
  const SampleStats st = sample_mean_cov(e);
  EXPECT_LT((st.mean - mu).norm() / mu.norm(), 0.05);
  EXPECT_LT((st.cov - MatrixXd::Identity(2, 2)).norm() / std::sqrt(2.0), 0.05);
}

TEST(SampleReverse, OdeSingleMemberIsDeterministic) {
  ReverseIntegratorConfig c;
  c.mode = ReverseMode::ode;
  const ScoreFn score = [](const VectorXd& z, double) { return VectorXd(-z); };
  const Ensemble a = sample_reverse(score, 1, 3, c, RngKey(9));
  const Ensemble b = sample_reverse(score, 1, 3, c, RngKey(9));
  ASSERT_EQ(a.matrix().size(), b.matrix().size());
  EXPECT_EQ(0, std::memcmp(a.matrix().data(), b.matrix().data(),
                           sizeof(double) * static_cast<std::size_t>(a.matrix().size())));
}

TEST(SampleReverse, NonFiniteScoreNamesMemberAndTime) {
  const ScoreFn score = [](const VectorXd& z, double t) {
    VectorXd out = -z;
    if (t < 0.5) out(0) = std::numeric_limits<double>::quiet_NaN();
    return out;
  };
  try {
    sample_reverse(score, 3, 2, ReverseIntegratorConfig{}, RngKey(1));
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("member"), std::string::npos) << msg;
    EXPECT_NE(msg.find("t ="), std::string::npos) << msg;
  }
}

TEST(SampleReverse, SerialAndParallelAgree) {
  const ScoreFn score = [](const VectorXd& z, double t) {
    const ScheduleValues s = noise_schedule(t, false);
    return VectorXd(-(z.array() - s.alpha).matrix() / (s.alpha * s.alpha + s.beta_sq));
  };
  const Ensemble a = sample_reverse(score, 64, 3, ReverseIntegratorConfig{}, RngKey(2), Exec::serial);
  const Ensemble b =
      sample_reverse(score, 64, 3, ReverseIntegratorConfig{}, RngKey(2), Exec::parallel);
  EXPECT_EQ(a.matrix(), b.matrix());
}

}  // namespace
}  // namespace scoreda
