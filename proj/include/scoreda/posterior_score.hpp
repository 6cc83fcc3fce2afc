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

#include <functional>
#include <memory>
#include <string>

#include "scoreda/diffusion.hpp"
#include "scoreda/gm_prior.hpp"
#include "scoreda/models.hpp"

namespace scoreda {

/// Gaussian surrogate (mu*, Sigma*) of the posterior that anchors the point
/// where the likelihood score is evaluated.
struct ReferencePosterior {
  VectorXd mu_star;
  MatrixXd sigma_star;
};

enum class ObsWeightMode { component_point, zeroth_order, shared_point, off };
enum class ScoreMethod { iensf, ensf };

ObsWeightMode parse_obs_weight_mode(const std::string& s);
std::string to_string(ObsWeightMode m);

using DampingFn = std::function<double(double)>;

struct ScoreConfig {
  ObsWeightMode obs_weight_mode = ObsWeightMode::component_point;
  ScoreMethod method = ScoreMethod::iensf;
  /// EnSF likelihood damping h(t), h(0) = 1, h(1) = 0.
  DampingFn ensf_damping = [](double t) { return 1.0 - t; };

  /// Throws ConfigError if h is not monotone decreasing on a grid of [0, 1].
  void validate() const;
};

/// mu_bar_0*(z_t) = mu* + alpha_t Sigma* (alpha_t^2 Sigma* + beta_t^2 I)^{-1} (z_t - alpha_t mu*).
VectorXd eval_point_mubar(const ReferencePosterior& ref, double t,
                          const Eigen::Ref<const VectorXd>& z,
                          const NoiseSchedule& schedule = default_schedule());

/// Per-component log p(y | z_t, k) under the chosen approximation.
/// `expansion_point` is required for the shared-point mode.
VectorXd observation_weights(const GaussianMixturePrior& prior, const ObservationModel& obs,
                             const Eigen::Ref<const VectorXd>& y,
                             const ReverseKernelParams& kernel, ObsWeightMode mode,
                             const VectorXd* expansion_point = nullptr);

/// Reference (unbatched) IEnSF posterior score at a single (t, z_t).
VectorXd iensf_score(const GaussianMixturePrior& prior, const ReferencePosterior& ref,
                     const ObservationModel& obs, const Eigen::Ref<const VectorXd>& y, double t,
                     const Eigen::Ref<const VectorXd>& z, const ScoreConfig& cfg = {},
                     const NoiseSchedule& schedule = default_schedule());

/// EnSF score: Monte Carlo ensemble prior score plus h(t) S(y | z_t).
VectorXd ensf_score(const Ensemble& ensemble, const ObservationModel& obs,
                    const Eigen::Ref<const VectorXd>& y, double t,
                    const Eigen::Ref<const VectorXd>& z, const ScoreConfig& cfg = {},
                    const NoiseSchedule& schedule = default_schedule());

/// EnSF score with an analytic mixture prior in place of the Monte Carlo one.
VectorXd ensf_score(const GaussianMixturePrior& prior, const ObservationModel& obs,
                    const Eigen::Ref<const VectorXd>& y, double t,
                    const Eigen::Ref<const VectorXd>& z, const ScoreConfig& cfg = {},
                    const NoiseSchedule& schedule = default_schedule());

/// Batched IEnSF score field. prepare(t) factorizes Sigma_t and
/// alpha_t^2 Sigma* + beta_t^2 I once and precomputes everything that does
/// not depend on z_t; eval() then costs O(d^2 + K d) per member for linear
/// operators.
class IEnSFScoreField final : public ScoreField {
 public:
  IEnSFScoreField(std::shared_ptr<const GaussianMixturePrior> prior, ReferencePosterior ref,
                  std::shared_ptr<const ObservationModel> obs, VectorXd y, ScoreConfig cfg,
                  const NoiseSchedule& schedule = default_schedule());

  Eigen::Index dim() const override { return prior_->dim(); }
  std::unique_ptr<const ScoreStep> prepare(double t) const override;

 private:
  std::shared_ptr<const GaussianMixturePrior> prior_;
  ReferencePosterior ref_;
  std::shared_ptr<const ObservationModel> obs_;
  VectorXd y_;
  ScoreConfig cfg_;
  const NoiseSchedule& schedule_;
  // Jacobian and value of M at mu*, used by the shared-point mode.
  MatrixXd h_star_;
  VectorXd m_star_;
};

/// Batched EnSF score field over a mixture prior. A prior with zero shared
/// covariance gives the Monte Carlo ensemble estimator.
class EnSFScoreField final : public ScoreField {
 public:
  EnSFScoreField(std::shared_ptr<const GaussianMixturePrior> prior,
                 std::shared_ptr<const ObservationModel> obs, VectorXd y, ScoreConfig cfg,
                 const NoiseSchedule& schedule = default_schedule());

  Eigen::Index dim() const override { return prior_->dim(); }
  std::unique_ptr<const ScoreStep> prepare(double t) const override;

 private:
  std::shared_ptr<const GaussianMixturePrior> prior_;
  std::shared_ptr<const ObservationModel> obs_;
  VectorXd y_;
  ScoreConfig cfg_;
  const NoiseSchedule& schedule_;
};

/// Mixture with zero shared covariance centred on the raw members.
GaussianMixturePrior ensemble_delta_prior(const Ensemble& ensemble);

}  // namespace scoreda
