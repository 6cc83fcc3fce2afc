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
#include <optional>
#include <utility>
#include <vector>

#include "scoreda/gaussian_stats.hpp"
#include "scoreda/models.hpp"
#include "scoreda/rng.hpp"

namespace scoreda {

using LogDensityFn = std::function<double(const VectorXd&)>;

/// Dense-grid posterior for d <= 3. log_density is normalized so that the
/// trapezoidal integral of exp(log_density) is 1; cells are flattened with
/// the last axis fastest. grid_bayes_oracle throws DomainError when the
/// unnormalized mass inside the box underflows to zero.
struct GridPosterior {
  std::vector<VectorXd> axes;
  VectorXd log_density;
  GaussianParams moments;
  double integral = 0.0;
};

GridPosterior grid_bayes_oracle(const LogDensityFn& log_prior, const ObservationModel& obs,
                                const VectorXd& y,
                                const std::vector<std::pair<double, double>>& bounds,
                                int n_points);

struct RmseSplit {
  std::optional<double> obs;
  std::optional<double> unobs;
  double all = 0.0;
};

RmseSplit rmse_split(const Eigen::Ref<const VectorXd>& estimate,
                     const Eigen::Ref<const VectorXd>& truth,
                     const std::vector<Eigen::Index>& observed_idx);

/// KL(fit || reference) where fit is the Gaussian with the ensemble's sample
/// mean and unbiased covariance.
double ensemble_kl(const Ensemble& ensemble, const GaussianParams& reference);

/// sqrt of the mean per-coordinate ensemble variance.
double ensemble_spread(const Ensemble& ensemble);

/// Random-walk Metropolis with isotropic Gaussian proposals; keeps every
/// `thin`-th state after `burn_in` steps.
Ensemble random_walk_metropolis(const LogDensityFn& log_target, const VectorXd& x0,
                                double step, long n_steps, long burn_in, long thin,
                                RngKey key);

}  // namespace scoreda
