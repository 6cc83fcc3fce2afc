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

#include "scoreda/gm_prior.hpp"

#include <cmath>

namespace scoreda {

namespace {

MatrixXd diffused_cov(const MatrixXd& sigma, const ScheduleValues& s) {
  MatrixXd st = s.alpha * s.alpha * sigma;
  st.diagonal().array() += s.beta_sq;
  return st;
}

}  // namespace

GaussianMixturePrior GaussianMixturePrior::single(const VectorXd& mean, const MatrixXd& cov) {
  return from_components(mean, cov, 1.0);
}

GaussianMixturePrior GaussianMixturePrior::from_components(MatrixXd means, MatrixXd shared_cov,
                                                           double gamma) {
  const Eigen::Index d = means.rows();
  const Eigen::Index k = means.cols();
  if (d == 0 || k == 0) throw ConfigError("mixture prior: empty means");
  if (shared_cov.rows() != d || shared_cov.cols() != d) {
    throw ConfigError("mixture prior: covariance shape does not match means");
  }
  GaussianMixturePrior p;
  p.identical_means = true;
  for (Eigen::Index j = 1; j < k && p.identical_means; ++j) {
    p.identical_means = (means.col(j).array() == means.col(0).array()).all();
  }
  p.means = std::move(means);
  p.shared_cov = std::move(shared_cov);
  p.weights = VectorXd::Constant(k, 1.0 / static_cast<double>(k));
  p.gamma = gamma;
  return p;
}

GaussianParams inflated_moments(const Ensemble& ensemble, const GmPriorOptions& opt) {
  if (ensemble.size() < 2) throw DomainError("mixture prior: at least 2 members required");
  if (!(opt.inflation >= 1.0)) throw ConfigError("mixture prior: inflation must be >= 1");
  SampleStats st = sample_mean_cov(ensemble);
  GaussianParams g{st.mean, opt.inflation * opt.inflation * st.cov};
  if (opt.loc_halfwidth) g.cov = localize_cov(g.cov, *opt.loc_halfwidth, opt.metric);
  return g;
}

GaussianMixturePrior build_gm_prior(const Ensemble& ensemble, const GmPriorOptions& opt) {
  if (!(opt.gamma >= 0.0 && opt.gamma <= 1.0)) {
    throw ConfigError("mixture prior: gamma must lie in [0, 1]");
  }
  if (opt.gamma_exponent != 1 && opt.gamma_exponent != 2) {
    throw ConfigError("mixture prior: gamma_exponent must be 1 or 2");
  }
  const GaussianParams g = inflated_moments(ensemble, opt);
  const double shrink = std::sqrt(1.0 - opt.gamma * opt.gamma) * opt.inflation;
  MatrixXd means = (ensemble.matrix().colwise() - g.mean) * shrink;
  means.colwise() += g.mean;
  const double scale = opt.gamma_exponent == 2 ? opt.gamma * opt.gamma : opt.gamma;
  return GaussianMixturePrior::from_components(std::move(means), scale * g.cov, opt.gamma);
}

GaussianMixturePrior build_gm_prior(const Ensemble& ensemble, double gamma,
                                    std::optional<double> loc_halfwidth, double inflation) {
  GmPriorOptions opt;
  opt.gamma = gamma;
  opt.loc_halfwidth = loc_halfwidth;
  opt.inflation = inflation;
  return build_gm_prior(ensemble, opt);
}

ForwardMarginal gm_forward_marginal(const GaussianMixturePrior& prior, double t,
                                    const NoiseSchedule& schedule) {
  const ScheduleValues s = schedule.at(t, false);
  return {s.alpha * prior.means, diffused_cov(prior.shared_cov, s)};
}

MatrixXd time_scaling_J(const MatrixXd& sigma, double t, const NoiseSchedule& schedule) {
  const ScheduleValues s = schedule.at(t, false);
  const Eigen::Index d = sigma.rows();
  if (s.beta_sq == 0.0) return MatrixXd::Identity(d, d);
  if (s.alpha == 0.0) return MatrixXd::Zero(d, d);
  const SpdFactor f(diffused_cov(sigma, s));
  // Sigma and Sigma_t are symmetric, so Sigma Sigma_t^{-1} = (Sigma_t^{-1} Sigma)^T.
  return s.alpha * f.solve_mat(sigma).transpose();
}

ReverseKernelParams gm_reverse_kernel(const GaussianMixturePrior& prior, double t,
                                      const Eigen::Ref<const VectorXd>& z,
                                      const NoiseSchedule& schedule) {
  if (!(t > 0.0)) throw DomainError("reverse kernel: t must be positive");
  const ScheduleValues s = schedule.at(t, false);
  const Eigen::Index d = prior.dim();
  const MatrixXd j = time_scaling_J(prior.shared_cov, t, schedule);
  ReverseKernelParams out;
  // mu_k + J (z - alpha mu_k)
  out.means = prior.means - s.alpha * j * prior.means;
  out.means.colwise() += j * z;
  out.cov = prior.shared_cov - s.alpha * j * prior.shared_cov;
  out.cov = (0.5 * (out.cov + out.cov.transpose())).eval();
  if (out.cov.cwiseAbs().maxCoeff() == 0.0) {
    out.chol = MatrixXd::Zero(d, d);
  } else {
    out.chol = SpdFactor(out.cov).matrix_l();
  }
  return out;
}

namespace {

// Prior responsibilities from whitened distances under the shared Sigma_t.
VectorXd mixture_log_terms(const GaussianMixturePrior& prior, const SpdFactor& st,
                           double alpha, const Eigen::Ref<const VectorXd>& z) {
  const VectorXd wz = st.whiten(VectorXd(z));
  const MatrixXd wm = st.whiten_mat(alpha * prior.means);
  VectorXd logw = -0.5 * (wm.colwise() - wz).colwise().squaredNorm().transpose();
  logw.array() += prior.weights.array().log();
  return logw;
}

}  // namespace

MixtureScore gm_prior_score(const GaussianMixturePrior& prior, double t,
                            const Eigen::Ref<const VectorXd>& z,
                            const NoiseSchedule& schedule) {
  const ScheduleValues s = schedule.at(t, false);
  const SpdFactor st(diffused_cov(prior.shared_cov, s));
  MixtureScore out;
  out.weights = mixture_log_terms(prior, st, s.alpha, z);
  softmax_inplace(out.weights);
  const VectorXd mbar = prior.means * out.weights;
  out.score = -st.solve(VectorXd(z - s.alpha * mbar));
  return out;
}

double gm_log_density(const GaussianMixturePrior& prior, double t,
                      const Eigen::Ref<const VectorXd>& z, const NoiseSchedule& schedule) {
  const ScheduleValues s = schedule.at(t, false);
  const SpdFactor st(diffused_cov(prior.shared_cov, s));
  const VectorXd logw = mixture_log_terms(prior, st, s.alpha, z);
  constexpr double kLog2Pi = 1.8378770664093454835606594728112;
  return log_sum_exp(logw) - 0.5 * (st.log_det() + static_cast<double>(z.size()) * kLog2Pi);
}

VectorXd ensf_prior_score(const Ensemble& ensemble, double t,
                          const Eigen::Ref<const VectorXd>& z, const NoiseSchedule& schedule) {
  const ScheduleValues s = schedule.at(t, false);
  if (!(s.beta_sq > 0.0)) throw DomainError("ensemble prior score: singular at beta_t = 0");
  const MatrixXd& x = ensemble.matrix();
  VectorXd logw =
      -0.5 * ((s.alpha * x).colwise() - z).colwise().squaredNorm().transpose() / s.beta_sq;
  softmax_inplace(logw);
  return -(z - s.alpha * (x * logw)) / s.beta_sq;
}

}  // namespace scoreda
