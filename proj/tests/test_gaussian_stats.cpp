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

#include <gtest/gtest.h>

#include "scoreda/gaussian_stats.hpp"
#include "scoreda/rng.hpp"
#include "test_util.hpp"

namespace scoreda {
namespace {

TEST(SampleMeanCov, TwoPoints) {
  Ensemble e(MatrixXd((MatrixXd(2, 2) << 0, 2, 0, 2).finished()));
  const SampleStats st = sample_mean_cov(e);
  EXPECT_EQ(st.mean, VectorXd::Ones(2));
  EXPECT_EQ(st.cov, MatrixXd::Constant(2, 2, 2.0));
}

TEST(SampleMeanCov, IdenticalMembers) {
  const VectorXd v = (VectorXd(3) << 1.5, -2.0, 0.25).finished();
  Ensemble e(3, 5);
  for (int k = 0; k < 5; ++k) e.member(k) = v;
  const SampleStats st = sample_mean_cov(e);
  EXPECT_TRUE(st.mean.isApprox(v, 1e-15));
  EXPECT_LT(st.cov.norm(), 1e-15);
}

TEST(SampleMeanCov, MonteCarlo) {
  RngStream rng(RngKey(4));
  const VectorXd mu = (VectorXd(2) << 1.0, -0.5).finished();
  MatrixXd sigma(2, 2);
  sigma << 2.0, 0.6, 0.6, 1.0;
  const MatrixXd l = sigma.llt().matrixL();
  const int n = 100000;
  Ensemble e(2, n);
  for (int k = 0; k < n; ++k) e.member(k) = mu + l * rng.normal_vector(2);
  const SampleStats st = sample_mean_cov(e);
  for (int i = 0; i < 2; ++i) {
    EXPECT_NEAR(st.mean(i), mu(i), 3 * std::sqrt(sigma(i, i) / n));
    for (int j = 0; j < 2; ++j) {
      const double se = std::sqrt((sigma(i, i) * sigma(j, j) + sigma(i, j) * sigma(i, j)) / n);
      EXPECT_NEAR(st.cov(i, j), sigma(i, j), 3 * se);
    }
  }
}

TEST(SpdFactor, JitterOnlyWhenNeeded) {
  MatrixXd a(2, 2);
  a << 4, 1, 1, 3;
  EXPECT_EQ(SpdFactor(a).jitter(), 0.0);
  const SpdFactor singular(MatrixXd::Constant(2, 2, 1.0));
  EXPECT_GT(singular.jitter(), 0.0);
  EXPECT_THROW(SpdFactor(MatrixXd::Identity(2, 3)), DomainError);
}

TEST(SpdFactor, SolveWhitenColour) {
  RngStream rng(RngKey(8));
  const MatrixXd a = testing::random_spd(4, rng);
  const VectorXd b = rng.normal_vector(4);
  const SpdFactor f(a);
  EXPECT_LT((a * f.solve(b) - b).norm(), 1e-12);
  EXPECT_LT((f.colour(f.whiten(b)) - b).norm(), 1e-12);
  EXPECT_NEAR(f.log_det(), std::log(a.determinant()), 1e-12);
}

TEST(GaussianScore, ExamplesAndFiniteDifferences) {
  GaussianParams g{VectorXd::Zero(1), MatrixXd::Identity(1, 1)};
  EXPECT_DOUBLE_EQ(gaussian_score((VectorXd(1) << 2.0).finished(), g)(0), -2.0);

  RngStream rng(RngKey(2));
  GaussianParams h{rng.normal_vector(2), testing::random_spd(2, rng)};
  EXPECT_LT(gaussian_score(h.mean, h).norm(), 1e-14);
  const VectorXd x = rng.normal_vector(2);
  const VectorXd fd = testing::fd_gradient([&](const VectorXd& v) { return gaussian_logpdf(v, h); }, x);
  EXPECT_LT((gaussian_score(x, h) - fd).norm(), 1e-5);
}

TEST(GaussianScore, LinearInX) {
  RngStream rng(RngKey(12));
  GaussianParams g{rng.normal_vector(3), testing::random_spd(3, rng)};
  const VectorXd x = rng.normal_vector(3);
  const VectorXd y = rng.normal_vector(3);
  const VectorXd lhs = gaussian_score(x, g) - gaussian_score(y, g);
  const VectorXd rhs = -g.cov.llt().solve(x - y);
  EXPECT_LT((lhs - rhs).norm(), 1e-10);
}

TEST(GaussianKl, ClosedForms) {
  GaussianParams p{VectorXd::Zero(1), MatrixXd::Identity(1, 1)};
  GaussianParams q1{VectorXd::Ones(1), MatrixXd::Identity(1, 1)};
  GaussianParams q4{VectorXd::Zero(1), 4.0 * MatrixXd::Identity(1, 1)};
  EXPECT_EQ(gaussian_kl(p, p), 0.0);
  EXPECT_NEAR(gaussian_kl(p, q1), 0.5, 1e-14);
  EXPECT_NEAR(gaussian_kl(p, q4), 0.5 * (std::log(4.0) + 0.25 - 1.0), 1e-14);
}

TEST(GaussianKl, NonNegativeOnRandomPairs) {
  RngStream rng(RngKey(21));
  for (int i = 0; i < 50; ++i) {
    GaussianParams p{rng.normal_vector(3), testing::random_spd(3, rng)};
    GaussianParams q{rng.normal_vector(3), testing::random_spd(3, rng)};
    EXPECT_GT(gaussian_kl(p, q), 0.0);
    EXPECT_NEAR(gaussian_kl(p, p), 0.0, 1e-12);
  }
}

TEST(GaspariCohn, Examples) {
  EXPECT_EQ(gaspari_cohn_taper(0.0, 3.0), 1.0);
  EXPECT_EQ(gaspari_cohn_taper(6.0, 3.0), 0.0);
  EXPECT_EQ(gaspari_cohn_taper(7.0, 3.0), 0.0);
  EXPECT_NEAR(gaspari_cohn_taper(3.0, 3.0), -0.25 + 0.5 + 0.625 - 5.0 / 3.0 + 1.0, 1e-14);
}

TEST(LocalizeCov, LimitsAndStructure) {
  RngStream rng(RngKey(5));
  const MatrixXd c = testing::random_spd(6, rng);
  const MatrixXd wide = localize_cov(c, 6.0e4);
  EXPECT_LT((wide - c).norm() / c.norm(), 1e-6);

  const MatrixXd narrow = localize_cov(c, 1.5);
  EXPECT_EQ(narrow.diagonal(), c.diagonal());
  EXPECT_EQ(narrow, narrow.transpose());

  const MatrixXd ring = localize_cov(MatrixXd::Constant(4, 4, 1.0), 1.0);
  EXPECT_EQ(ring(0, 2), 0.0);
  EXPECT_EQ(ring(1, 3), 0.0);
  // Ring distance from 0 to 3 is 1.
  EXPECT_GT(ring(0, 3), 0.0);
}

TEST(Softmax, SumsToOne) {
  VectorXd v(4);
  v << 1000.0, 999.0, -5.0, 998.5;
  EXPECT_NEAR(log_sum_exp(v), 1000.0 + std::log(1 + std::exp(-1.0) + std::exp(-1005.0) + std::exp(-1.5)),
              1e-12);
  softmax_inplace(v);
  EXPECT_NEAR(v.sum(), 1.0, 1e-12);
  EXPECT_TRUE((v.array() >= 0.0).all());
}

}  // namespace
}  // namespace scoreda
