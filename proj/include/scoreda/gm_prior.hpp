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

#include <optional>

#include "scoreda/diffusion.hpp"
#include "scoreda/gaussian_stats.hpp"
#include "scoreda/types.hpp"

namespace scoreda {

/// Equal-weight Gaussian mixture with one shared covariance. Component means
/// are stored column-wise (d x K).
struct GaussianMixturePrior {
  MatrixXd means;
  MatrixXd shared_cov;
  VectorXd weights;
  double gamma = 0.0;
  /// Set when every column of `means` is identical, which makes all mixture
  /// weights equal and lets the score kernels skip the component sums.
  bool identical_means = false;

  Eigen::Index dim() const { return means.rows(); }
  Eigen::Index size() const { return means.cols(); }

  /// One-component mixture N(mean, cov).
  static GaussianMixturePrior single(const VectorXd& mean, const MatrixXd& cov);
  /// Mixture with uniform weights; validates shapes and detects identical means.
  static GaussianMixturePrior from_components(MatrixXd means, MatrixXd shared_cov,
                                              double gamma);
};

struct GmPriorOptions {
  double gamma = 0.5;
  std::optional<double> loc_halfwidth;
  double inflation = 1.0;
  /// 2: Sigma = gamma^2 Sigma_bar (variance preserving). 1: Sigma = gamma Sigma_bar.
  int gamma_exponent = 2;
  LocalizationMetric metric = LocalizationMetric::index_ring;
};

/// Inflated and optionally localized sample moments (x_bar, Sigma_bar) that
/// the mixture is split from.
GaussianParams inflated_moments(const Ensemble& ensemble, const GmPriorOptions& opt);

/// Splits the ensemble into K components: mu_k = sqrt(1 - gamma^2)(x_k - x_bar)
/// + x_bar and shared covariance gamma^2 Sigma_bar (or gamma Sigma_bar).
GaussianMixturePrior build_gm_prior(const Ensemble& ensemble, const GmPriorOptions& opt);

GaussianMixturePrior build_gm_prior(const Ensemble& ensemble, double gamma,
                                    std::optional<double> loc_halfwidth = std::nullopt,
                                    double inflation = 1.0);

struct ForwardMarginal {
  MatrixXd means;  // alpha_t mu_k
  MatrixXd cov;    // alpha_t^2 Sigma + beta_t^2 I
};

ForwardMarginal gm_forward_marginal(const GaussianMixturePrior& prior, double t,
                                    const NoiseSchedule& schedule = default_schedule());

struct ReverseKernelParams {
  MatrixXd means;  // mu_{0|t,k}(z_t), d x K
  MatrixXd cov;    // Sigma_{0|t}
  MatrixXd chol;   // lower-triangular, cov = chol chol^T
};

ReverseKernelParams gm_reverse_kernel(const GaussianMixturePrior& prior, double t,
                                      const Eigen::Ref<const VectorXd>& z,
                                      const NoiseSchedule& schedule = default_schedule());

struct MixtureScore {
  VectorXd score;
  VectorXd weights;  // prior responsibilities w(k | z_t)
};

MixtureScore gm_prior_score(const GaussianMixturePrior& prior, double t,
                            const Eigen::Ref<const VectorXd>& z,
                            const NoiseSchedule& schedule = default_schedule());

/// log of the diffused mixture density at (t, z). Used by finite-difference
/// checks and the posterior-weight oracle.
double gm_log_density(const GaussianMixturePrior& prior, double t,
                      const Eigen::Ref<const VectorXd>& z,
                      const NoiseSchedule& schedule = default_schedule());

/// Monte Carlo prior score of the raw ensemble (kernel width beta_t, no
/// shared covariance).
VectorXd ensf_prior_score(const Ensemble& ensemble, double t,
                          const Eigen::Ref<const VectorXd>& z,
                          const NoiseSchedule& schedule = default_schedule());

/// J(t) = alpha_t Sigma (alpha_t^2 Sigma + beta_t^2 I)^{-1}; exactly I at
/// beta_t = 0 and exactly 0 at alpha_t = 0.
MatrixXd time_scaling_J(const MatrixXd& sigma, double t,
                        const NoiseSchedule& schedule = default_schedule());

}  // namespace scoreda
