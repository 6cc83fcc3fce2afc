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

#include "scoreda/iensf.hpp"

#include <string>

namespace scoreda {

void IEnSFConfig::validate() const {
  if (max_iters < 1) throw ConfigError("iensf: max_iters must be >= 1");
  if (!(eta1 >= 0.0 && eta1 <= 1.0) || !(eta2 >= 0.0 && eta2 <= 1.0)) {
    throw ConfigError("iensf: eta1 and eta2 must lie in [0, 1]");
  }
  if (!(tol >= 0.0)) throw ConfigError("iensf: tol must be non-negative");
  integ_cfg.validate();
  score_cfg.validate();
}

double convergence_distance(const GaussianParams& a, const GaussianParams& b) {
  return (a.mean - b.mean).norm() / (1.0 + b.mean.norm()) +
         (a.cov - b.cov).norm() / (1.0 + b.cov.norm());
}

double convergence_distance(const GaussianParams& a, const GaussianParams& b,
                            ConvergenceMetric metric) {
  if (metric == ConvergenceMetric::relative) return convergence_distance(a, b);
  return 0.5 * (gaussian_kl(a, b) + gaussian_kl(b, a));
}

IEnSFResult iensf_update(std::shared_ptr<const GaussianMixturePrior> prior,
                         ReferencePosterior reference, Eigen::Index n_samples, const VectorXd& y,
                         const ObservationModel& obs, const IEnSFConfig& cfg, RngKey key) {
  cfg.validate();
  if (n_samples < 2) throw DomainError("iensf: at least 2 samples required");
  auto obs_ptr = std::make_shared<const ObservationModel>(obs);
  const bool localize = cfg.localize_reference && cfg.prior.loc_halfwidth.has_value();

  IEnSFResult result;
  for (int m = 1; m <= cfg.max_iters; ++m) {
    const IEnSFScoreField field(prior, reference, obs_ptr, y, cfg.score_cfg);
    try {
      result.posterior = sample_reverse(field, n_samples, cfg.integ_cfg,
                                        key.derive(static_cast<std::uint64_t>(m)), cfg.exec);
    } catch (const NumericalError& e) {
      throw NumericalError("iensf iteration " + std::to_string(m) + ": " + e.what());
    }
    SampleStats fit = sample_mean_cov(result.posterior);
    if (localize) fit.cov = localize_cov(fit.cov, *cfg.prior.loc_halfwidth, cfg.prior.metric);

    IterationRecord rec;
    rec.iteration = m;
    rec.distance = convergence_distance({fit.mean, fit.cov},
                                        {reference.mu_star, reference.sigma_star}, cfg.metric);
    rec.mean = fit.mean;
    rec.cov = fit.cov;
    result.iterations.push_back(rec);
    if (rec.distance <= cfg.tol) {
      result.converged = true;
      break;
    }
    reference.mu_star = (1.0 - cfg.eta1) * reference.mu_star + cfg.eta1 * fit.mean;
    reference.sigma_star = (1.0 - cfg.eta2) * reference.sigma_star + cfg.eta2 * fit.cov;
  }
  return result;
}

IEnSFResult iensf_update(const Ensemble& prior_ensemble, const VectorXd& y,
                         const ObservationModel& obs, const IEnSFConfig& cfg, RngKey key) {
  if (prior_ensemble.size() < 2) throw DomainError("iensf: at least 2 members required");
  auto prior = std::make_shared<const GaussianMixturePrior>(build_gm_prior(prior_ensemble, cfg.prior));
  const GaussianParams moments = inflated_moments(prior_ensemble, cfg.prior);
  return iensf_update(std::move(prior), ReferencePosterior{moments.mean, moments.cov},
                      prior_ensemble.size(), y, obs, cfg, key);
}

Ensemble ensf_update(std::shared_ptr<const GaussianMixturePrior> prior, Eigen::Index n_samples,
                     const VectorXd& y, const ObservationModel& obs,
                     const ScoreConfig& score_cfg, const ReverseIntegratorConfig& integ,
                     RngKey key, Exec exec) {
  const EnSFScoreField field(std::move(prior), std::make_shared<const ObservationModel>(obs), y,
                             score_cfg);
  return sample_reverse(field, n_samples, integ, key, exec);
}

Ensemble ensf_update(const Ensemble& prior_ensemble, const VectorXd& y,
                     const ObservationModel& obs, const ScoreConfig& score_cfg,
                     const ReverseIntegratorConfig& integ, RngKey key, Exec exec) {
  auto prior = std::make_shared<const GaussianMixturePrior>(ensemble_delta_prior(prior_ensemble));
  return ensf_update(std::move(prior), prior_ensemble.size(), y, obs, score_cfg, integ, key, exec);
}

}  // namespace scoreda
