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

#include "scoreda/metrics.hpp"

#include <cmath>
#include <limits>

namespace scoreda {

GridPosterior grid_bayes_oracle(const LogDensityFn& log_prior, const ObservationModel& obs,
                                const VectorXd& y,
                                const std::vector<std::pair<double, double>>& bounds,
                                int n_points) {
  const auto d = static_cast<Eigen::Index>(bounds.size());
  if (d < 1 || d > 3) throw DomainError("grid oracle: only 1 <= d <= 3 supported");
  if (obs.state_dim() != d) throw DomainError("grid oracle: operator dimension mismatch");
  if (n_points < 3) throw ConfigError("grid oracle: at least 3 points per axis");

  GridPosterior g;
  std::vector<VectorXd> trap(static_cast<std::size_t>(d));
  for (Eigen::Index a = 0; a < d; ++a) {
    const auto [lo, hi] = bounds[static_cast<std::size_t>(a)];
    if (!(hi > lo)) throw ConfigError("grid oracle: empty bounds");
    g.axes.push_back(VectorXd::LinSpaced(n_points, lo, hi));
    VectorXd w = VectorXd::Constant(n_points, (hi - lo) / (n_points - 1));
    w[0] *= 0.5;
    w[n_points - 1] *= 0.5;
    trap[static_cast<std::size_t>(a)] = w;
  }
  long n_cells = 1;
  for (Eigen::Index a = 0; a < d; ++a) n_cells *= n_points;

  auto coords = [&](long cell, VectorXd& x, double& log_w) {
    long rem = cell;
    log_w = 0.0;
    for (Eigen::Index a = d - 1; a >= 0; --a) {
      const long i = rem % n_points;
      rem /= n_points;
      x[a] = g.axes[static_cast<std::size_t>(a)][i];
      log_w += std::log(trap[static_cast<std::size_t>(a)][i]);
    }
  };

  VectorXd logp(n_cells);
  VectorXd logq(n_cells);  // including quadrature weight
#pragma omp parallel
  {
    VectorXd x(d);
    double lw = 0.0;
#pragma omp for schedule(static)
    for (long c = 0; c < n_cells; ++c) {
      coords(c, x, lw);
      logp[c] = log_prior(x) + obs.log_likelihood(y, x);
      logq[c] = logp[c] + lw;
    }
  }
  const double log_z = log_sum_exp(logq);
  // Box evidence below the smallest positive double: nothing of the posterior is inside.
  if (!std::isfinite(log_z) || std::exp(log_z) == 0.0) {
    throw DomainError("grid oracle: zero posterior mass inside the bounds (coverage error)");
  }
  g.log_density = logp.array() - log_z;

  VectorXd mean = VectorXd::Zero(d);
  MatrixXd second = MatrixXd::Zero(d, d);
  double total = 0.0;
  VectorXd x(d);
  double lw = 0.0;
  for (long c = 0; c < n_cells; ++c) {
    coords(c, x, lw);
    const double p = std::exp(logq[c] - log_z);
    total += p;
    mean += p * x;
    second.noalias() += p * x * x.transpose();
  }
  g.integral = total;
  g.moments.mean = mean / total;
  g.moments.cov = second / total - g.moments.mean * g.moments.mean.transpose();
  return g;
}

RmseSplit rmse_split(const Eigen::Ref<const VectorXd>& estimate,
                     const Eigen::Ref<const VectorXd>& truth,
                     const std::vector<Eigen::Index>& observed_idx) {
  const Eigen::Index d = truth.size();
  if (estimate.size() != d) throw DomainError("rmse_split: size mismatch");
  std::vector<bool> is_obs(static_cast<std::size_t>(d), false);
  for (auto i : observed_idx) {
    if (i < 0 || i >= d) throw DomainError("rmse_split: observed index out of range");
    is_obs[static_cast<std::size_t>(i)] = true;
  }
  double s_obs = 0.0;
  double s_un = 0.0;
  long n_obs = 0;
  long n_un = 0;
  for (Eigen::Index i = 0; i < d; ++i) {
    const double e = estimate[i] - truth[i];
    if (is_obs[static_cast<std::size_t>(i)]) {
      s_obs += e * e;
      ++n_obs;
    } else {
      s_un += e * e;
      ++n_un;
    }
  }
  RmseSplit out;
  if (n_obs > 0) out.obs = std::sqrt(s_obs / static_cast<double>(n_obs));
  if (n_un > 0) out.unobs = std::sqrt(s_un / static_cast<double>(n_un));
  out.all = std::sqrt((s_obs + s_un) / static_cast<double>(d));
  return out;
}

double ensemble_kl(const Ensemble& ensemble, const GaussianParams& reference) {
  if (ensemble.size() < ensemble.dim() + 2) {
    throw DomainError("ensemble_kl: need at least d + 2 members");
  }
  const SampleStats s = sample_mean_cov(ensemble);
  return gaussian_kl({s.mean, s.cov}, reference);
}

double ensemble_spread(const Ensemble& ensemble) {
  if (ensemble.size() < 2) return 0.0;
  return std::sqrt(sample_mean_cov(ensemble).var.mean());
}

Ensemble random_walk_metropolis(const LogDensityFn& log_target, const VectorXd& x0,
                                double step, long n_steps, long burn_in, long thin,
                                RngKey key) {
  if (!(step > 0.0) || thin < 1 || burn_in < 0 || n_steps <= burn_in) {
    throw ConfigError("metropolis: invalid chain settings");
  }
  RngStream rng(key);
  VectorXd x = x0;
  double lp = log_target(x);
  std::vector<VectorXd> kept;
  VectorXd prop(x.size());
  for (long n = 0; n < n_steps; ++n) {
    rng.fill_normal(prop);
    prop = x + step * prop;
    const double lq = log_target(prop);
    if (std::log(rng.uniform()) < lq - lp) {
      x = prop;
      lp = lq;
    }
    if (n >= burn_in && (n - burn_in) % thin == 0) kept.push_back(x);
  }
  MatrixXd out(x.size(), static_cast<Eigen::Index>(kept.size()));
  for (std::size_t i = 0; i < kept.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = kept[i];
  return Ensemble(std::move(out));
}

}  // namespace scoreda
