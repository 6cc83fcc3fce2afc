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

#include <vector>

#include "scoreda/diffusion.hpp"
#include "scoreda/gm_prior.hpp"
#include "scoreda/posterior_score.hpp"

namespace scoreda {

enum class ConvergenceMetric { relative, symmetric_kl };

struct IEnSFConfig {
  int max_iters = 5;
  double eta1 = 1.0;  // mean smoothing
  double eta2 = 0.5;  // covariance smoothing
  double tol = 1e-2;
  ConvergenceMetric metric = ConvergenceMetric::relative;
  GmPriorOptions prior;
  /// Localize the fitted covariance before it enters the reference update
  /// (only when prior.loc_halfwidth is set).
  bool localize_reference = true;
  ScoreConfig score_cfg;
  ReverseIntegratorConfig integ_cfg;
  Exec exec = Exec::parallel;

  void validate() const;
};

struct IterationRecord {
  int iteration = 0;  // 1-based
  double distance = 0.0;
  VectorXd mean;
  MatrixXd cov;
};

struct IEnSFResult {
  Ensemble posterior;
  std::vector<IterationRecord> iterations;
  bool converged = false;
};

/// ||mu_a - mu_b|| / (1 + ||mu_b||) + ||S_a - S_b||_F / (1 + ||S_b||_F).
/// Relative to b, so it is not invariant under a common rescaling.
double convergence_distance(const GaussianParams& a, const GaussianParams& b);

double convergence_distance(const GaussianParams& a, const GaussianParams& b,
                            ConvergenceMetric metric);

/// One assimilation update. Builds the mixture prior from the ensemble, seeds
/// the reference posterior with the prior moments and refines it. Iteration m
/// samples with key.derive(m).
IEnSFResult iensf_update(const Ensemble& prior_ensemble, const VectorXd& y,
                         const ObservationModel& obs, const IEnSFConfig& cfg, RngKey key);

/// Same loop with an explicit mixture prior and initial reference.
IEnSFResult iensf_update(std::shared_ptr<const GaussianMixturePrior> prior,
                         ReferencePosterior reference, Eigen::Index n_samples, const VectorXd& y,
                         const ObservationModel& obs, const IEnSFConfig& cfg, RngKey key);

/// Single-pass EnSF update using the Monte Carlo ensemble prior score.
Ensemble ensf_update(const Ensemble& prior_ensemble, const VectorXd& y,
                     const ObservationModel& obs, const ScoreConfig& score_cfg,
                     const ReverseIntegratorConfig& integ, RngKey key,
                     Exec exec = Exec::parallel);

/// EnSF update with an analytic mixture prior.
Ensemble ensf_update(std::shared_ptr<const GaussianMixturePrior> prior, Eigen::Index n_samples,
                     const VectorXd& y, const ObservationModel& obs,
                     const ScoreConfig& score_cfg, const ReverseIntegratorConfig& integ,
                     RngKey key, Exec exec = Exec::parallel);

}  // namespace scoreda
