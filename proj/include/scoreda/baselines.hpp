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
#include <vector>

#include "scoreda/gaussian_stats.hpp"
#include "scoreda/models.hpp"
#include "scoreda/parallel.hpp"
#include "scoreda/rng.hpp"

namespace scoreda {

struct LinearGaussianModel {
  MatrixXd transition;
  MatrixXd process_cov;
  MatrixXd obs_matrix;
  MatrixXd obs_cov;

  /// Throws ConfigError on inconsistent shapes.
  void validate() const;
};

GaussianParams kf_predict(const GaussianParams& state, const LinearGaussianModel& model);
/// Kalman analysis with a Joseph-form covariance update.
GaussianParams kf_update(const GaussianParams& prior, const MatrixXd& h, const MatrixXd& r,
                         const VectorXd& y);
GaussianParams kf_step(const GaussianParams& state, const LinearGaussianModel& model,
                       const VectorXd& y);

struct LocalizationOptions {
  std::optional<double> halfwidth;
  LocalizationMetric metric = LocalizationMetric::index_ring;
};

/// Stochastic EnKF with perturbed observations. Member j perturbs its
/// observation with key.derive(j). Nonlinear operators use the sample
/// cross-covariance of (x, M(x)).
Ensemble enkf_update(const Ensemble& ensemble, const ObservationModel& obs, const VectorXd& y,
                     double inflation, const LocalizationOptions& loc, RngKey key);

/// LETKF: independent ensemble-transform analyses per state index with
/// Gaspari-Cohn tapered observation precision. Observations without a state
/// location (or without a half-width) enter every local analysis untapered.
Ensemble letkf_update(const Ensemble& ensemble, const ObservationModel& obs, const VectorXd& y,
                      double inflation, const LocalizationOptions& loc,
                      Exec exec = Exec::parallel);

/// Indices chosen by systematic resampling with offset u in [0, 1).
std::vector<Eigen::Index> systematic_resample(const Eigen::Ref<const VectorXd>& weights,
                                              double u);

struct ParticleState {
  Ensemble particles;
  VectorXd weights;
  bool resampled = false;
};

/// Bootstrap particle-filter analysis: reweight by p(y | x_j), resample
/// systematically when ESS < ess_fraction * K. Throws NumericalError when every
/// likelihood underflows.
ParticleState pf_update(const Ensemble& particles, const VectorXd& weights,
                        const ObservationModel& obs, const VectorXd& y, RngKey key,
                        double ess_fraction = 0.5);

double effective_sample_size(const Eigen::Ref<const VectorXd>& weights);

}  // namespace scoreda
