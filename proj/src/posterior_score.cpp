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

#include "scoreda/posterior_score.hpp"

#include <cmath>

namespace scoreda {

namespace {

MatrixXd diffused(const MatrixXd& sigma, const ScheduleValues& s) {
  MatrixXd out = s.alpha * s.alpha * sigma;
  out.diagonal().array() += s.beta_sq;
  return out;
}

MatrixXd symmetrized(const MatrixXd& a) { return 0.5 * (a + a.transpose()); }

// Per-member matrix-vector product. Small operands skip the blocked GEMV
// kernel, whose dispatch cost dominates at d of a few units.
VectorXd matvec(const MatrixXd& a, const Eigen::Ref<const VectorXd>& x) {
  if (a.rows() <= 16 && a.cols() <= 16) return a.lazyProduct(x);
  return a * x;
}

}  // namespace

ObsWeightMode parse_obs_weight_mode(const std::string& s) {
  if (s == "component-point" || s == "component_point") return ObsWeightMode::component_point;
  if (s == "zeroth-order" || s == "zeroth_order") return ObsWeightMode::zeroth_order;
  if (s == "shared-point" || s == "shared_point") return ObsWeightMode::shared_point;
  if (s == "off") return ObsWeightMode::off;
  throw ConfigError("unknown observation weight mode: " + s);
}

std::string to_string(ObsWeightMode m) {
  switch (m) {
    case ObsWeightMode::component_point: return "component-point";
    case ObsWeightMode::zeroth_order: return "zeroth-order";
    case ObsWeightMode::shared_point: return "shared-point";
    case ObsWeightMode::off: return "off";
  }
  return "?";
}

void ScoreConfig::validate() const {
  if (!ensf_damping) throw ConfigError("score config: damping function missing");
  double prev = ensf_damping(0.0);
  for (int i = 1; i <= 100; ++i) {
    const double h = ensf_damping(i / 100.0);
    if (!(h <= prev + 1e-15)) throw ConfigError("score config: damping must be non-increasing");
    prev = h;
  }
}

VectorXd eval_point_mubar(const ReferencePosterior& ref, double t,
                          const Eigen::Ref<const VectorXd>& z, const NoiseSchedule& schedule) {
  const ScheduleValues s = schedule.at(t, false);
  const MatrixXd j = time_scaling_J(ref.sigma_star, t, schedule);
  return ref.mu_star + j * (z - s.alpha * ref.mu_star);
}

VectorXd observation_weights(const GaussianMixturePrior& prior, const ObservationModel& obs,
                             const Eigen::Ref<const VectorXd>& y,
                             const ReverseKernelParams& kernel, ObsWeightMode mode,
                             const VectorXd* expansion_point) {
  const Eigen::Index k_count = prior.size();
  VectorXd logw = VectorXd::Zero(k_count);
  if (mode == ObsWeightMode::off) return logw;

  const MatrixXd& r = obs.obs_cov();
  if (mode == ObsWeightMode::shared_point) {
    if (expansion_point == nullptr) {
      throw ConfigError("shared-point weights need an expansion point");
    }
    const MatrixXd h = obs.jacobian(*expansion_point);
    const VectorXd m0 = obs.apply(*expansion_point);
    const SpdFactor c(symmetrized(h * kernel.cov * h.transpose() + r));
    for (Eigen::Index k = 0; k < k_count; ++k) {
      const VectorXd pred = m0 + h * (kernel.means.col(k) - *expansion_point);
      logw[k] = gaussian_logpdf(y, pred, c);
    }
    return logw;
  }
  for (Eigen::Index k = 0; k < k_count; ++k) {
    const VectorXd m = kernel.means.col(k);
    if (mode == ObsWeightMode::zeroth_order) {
      logw[k] = obs.log_likelihood(y, m);
    } else {
      const MatrixXd h = obs.jacobian(m);
      const SpdFactor c(symmetrized(h * kernel.cov * h.transpose() + r));
      logw[k] = gaussian_logpdf(y, obs.apply(m), c);
    }
  }
  return logw;
}

VectorXd iensf_score(const GaussianMixturePrior& prior, const ReferencePosterior& ref,
                     const ObservationModel& obs, const Eigen::Ref<const VectorXd>& y, double t,
                     const Eigen::Ref<const VectorXd>& z, const ScoreConfig& cfg,
                     const NoiseSchedule& schedule) {
  const ScheduleValues s = schedule.at(t, false);
  const SpdFactor st(diffused(prior.shared_cov, s));
  const Eigen::Index k_count = prior.size();

  VectorXd logw(k_count);
  for (Eigen::Index k = 0; k < k_count; ++k) {
    logw[k] = std::log(prior.weights[k]) +
              gaussian_logpdf(z, VectorXd(s.alpha * prior.means.col(k)), st);
  }
  const ReverseKernelParams kernel = gm_reverse_kernel(prior, t, z, schedule);
  logw += observation_weights(prior, obs, y, kernel, cfg.obs_weight_mode, &ref.mu_star);
  softmax_inplace(logw);

  VectorXd out = VectorXd::Zero(z.size());
  for (Eigen::Index k = 0; k < k_count; ++k) {
    out -= logw[k] * st.solve(VectorXd(z - s.alpha * prior.means.col(k)));
  }
  const VectorXd mubar = eval_point_mubar(ref, t, z, schedule);
  out += time_scaling_J(prior.shared_cov, t, schedule) * obs.likelihood_score(y, mubar);
  return out;
}

VectorXd ensf_score(const Ensemble& ensemble, const ObservationModel& obs,
                    const Eigen::Ref<const VectorXd>& y, double t,
                    const Eigen::Ref<const VectorXd>& z, const ScoreConfig& cfg,
                    const NoiseSchedule& schedule) {
  return ensf_prior_score(ensemble, t, z, schedule) +
         cfg.ensf_damping(t) * obs.likelihood_score(y, z);
}

VectorXd ensf_score(const GaussianMixturePrior& prior, const ObservationModel& obs,
                    const Eigen::Ref<const VectorXd>& y, double t,
                    const Eigen::Ref<const VectorXd>& z, const ScoreConfig& cfg,
                    const NoiseSchedule& schedule) {
  return gm_prior_score(prior, t, z, schedule).score +
         cfg.ensf_damping(t) * obs.likelihood_score(y, z);
}

GaussianMixturePrior ensemble_delta_prior(const Ensemble& ensemble) {
  const Eigen::Index d = ensemble.dim();
  return GaussianMixturePrior::from_components(ensemble.matrix(), MatrixXd::Zero(d, d), 0.0);
}

// ---------------------------------------------------------------------------
// Batched kernels

namespace {

enum class WeightPath { none, affine, selective, general };

// Shared pieces of both per-step kernels: the mixture prior responsibilities.
struct MixtureCache {
  const GaussianMixturePrior* prior = nullptr;
  double alpha = 0.0;
  SpdFactor st;
  MatrixXd wm_t;  // (L_t^{-1} alpha mu_k)^T, K x d so that sums run over K
  MatrixXd means_t;

  void init(const GaussianMixturePrior& p, const ScheduleValues& s) {
    prior = &p;
    alpha = s.alpha;
    st = SpdFactor(diffused(p.shared_cov, s));
    if (!p.identical_means) {
      wm_t = st.whiten_mat(s.alpha * p.means).transpose();
      means_t = p.means.transpose();
    }
  }

  // sum_k w_k mu_k
  VectorXd weighted_mean(const VectorXd& w) const {
    VectorXd m(means_t.cols());
    for (Eigen::Index i = 0; i < m.size(); ++i) m[i] = means_t.col(i).dot(w);
    return m;
  }

  // log prior responsibilities (uniform weights dropped) into logw.
  void log_terms(const VectorXd& wz, VectorXd& logw) const {
    logw.setZero();
    for (Eigen::Index i = 0; i < wz.size(); ++i) {
      logw.array() -= 0.5 * (wm_t.col(i).array() - wz[i]).square();
    }
  }

  void add_prior_score(const Eigen::Ref<const VectorXd>& z, const VectorXd& mbar,
                       Eigen::Ref<VectorXd> out) const {
    out = -st.solve(VectorXd(z - alpha * mbar));
  }
};

class IEnSFStep final : public ScoreStep {
 public:
  MixtureCache mix;
  const ObservationModel* obs = nullptr;
  const VectorXd* y = nullptr;
  MatrixXd j;        // J(t)
  MatrixXd j_star;   // reference J*(t)
  VectorXd c_star;   // mu* - alpha J* mu*

  WeightPath path = WeightPath::none;
  ObsWeightMode mode = ObsWeightMode::off;
  // affine path
  MatrixXd wy_t;  // (L_C^{-1}(y_eff - H base_k))^T, K x r
  MatrixXd g;   // L_C^{-1} H J
  // selective path
  MatrixXd base_sel;  // S base_k
  MatrixXd j_sel;     // S J
  MatrixXd p_sel;     // S Sigma_{0|t} S^T
  // general path
  MatrixXd base;      // (I - alpha J) mu_k
  MatrixXd sigma0t;
  const MatrixXd* h_star = nullptr;
  const VectorXd* m_star = nullptr;
  const VectorXd* mu_star = nullptr;

  void obs_log_terms(const Eigen::Ref<const VectorXd>& z, VectorXd& logw) const {
    const Eigen::Index k_count = logw.size();
    switch (path) {
      case WeightPath::none:
        return;
      case WeightPath::affine: {
        const VectorXd v = matvec(g, z);
        for (Eigen::Index i = 0; i < v.size(); ++i) {
          logw.array() -= 0.5 * (wy_t.col(i).array() - v[i]).square();
        }
        return;
      }
      case WeightPath::selective: {
        const VectorXd jz = matvec(j_sel, z);
        const Eigen::Index r = jz.size();
        VectorXd innov(r);
        VectorXd deriv(r);
        const MatrixXd& rcov = obs->obs_cov();
        for (Eigen::Index k = 0; k < k_count; ++k) {
          for (Eigen::Index i = 0; i < r; ++i) {
            const double m = base_sel(i, k) + jz[i];
            innov[i] = (*y)[i] - obs->selected_map(m);
            deriv[i] = obs->selected_derivative(m);
          }
          if (mode == ObsWeightMode::zeroth_order) {
            logw[k] -= 0.5 * obs->obs_factor().whiten(innov).squaredNorm();
          } else {
            const MatrixXd c = deriv.asDiagonal() * p_sel * deriv.asDiagonal() + rcov;
            const SpdFactor f(c);
            logw[k] -= 0.5 * (f.whiten(innov).squaredNorm() + f.log_det());
          }
        }
        return;
      }
      case WeightPath::general: {
        const VectorXd jz = matvec(j, z);
        VectorXd m(jz.size());
        for (Eigen::Index k = 0; k < k_count; ++k) {
          m = base.col(k) + jz;
          if (mode == ObsWeightMode::zeroth_order) {
            logw[k] += obs->log_likelihood(*y, m);
          } else if (mode == ObsWeightMode::shared_point) {
            const VectorXd pred = *m_star + *h_star * (m - *mu_star);
            const SpdFactor f(symmetrized(*h_star * sigma0t * h_star->transpose() +
                                          obs->obs_cov()));
            logw[k] += gaussian_logpdf(*y, pred, f);
          } else {
            const MatrixXd h = obs->jacobian(m);
            const SpdFactor f(symmetrized(h * sigma0t * h.transpose() + obs->obs_cov()));
            logw[k] += gaussian_logpdf(*y, obs->apply(m), f);
          }
        }
        return;
      }
    }
  }

  void eval(const Eigen::Ref<const VectorXd>& z, Eigen::Ref<VectorXd> out) const override {
    const GaussianMixturePrior& prior = *mix.prior;
    VectorXd mbar;
    if (prior.identical_means) {
      mbar = prior.means.col(0);
    } else {
      const VectorXd wz = mix.st.whiten(VectorXd(z));
      VectorXd logw(prior.size());
      mix.log_terms(wz, logw);
      obs_log_terms(z, logw);
      softmax_inplace(logw);
      mbar = mix.weighted_mean(logw);
    }
    mix.add_prior_score(z, mbar, out);
    const VectorXd mubar = c_star + matvec(j_star, z);
    out += matvec(j, obs->likelihood_score(*y, mubar));
  }
};

class EnSFStep final : public ScoreStep {
 public:
  MixtureCache mix;
  const ObservationModel* obs = nullptr;
  const VectorXd* y = nullptr;
  double h = 0.0;

  void eval(const Eigen::Ref<const VectorXd>& z, Eigen::Ref<VectorXd> out) const override {
    const GaussianMixturePrior& prior = *mix.prior;
    VectorXd mbar;
    if (prior.identical_means) {
      mbar = prior.means.col(0);
    } else {
      const VectorXd wz = mix.st.whiten(VectorXd(z));
      VectorXd logw(prior.size());
      mix.log_terms(wz, logw);
      softmax_inplace(logw);
      mbar = mix.weighted_mean(logw);
    }
    mix.add_prior_score(z, mbar, out);
    if (h != 0.0) out.noalias() += h * obs->likelihood_score(*y, z);
  }
};

}  // namespace

IEnSFScoreField::IEnSFScoreField(std::shared_ptr<const GaussianMixturePrior> prior,
                                 ReferencePosterior ref,
                                 std::shared_ptr<const ObservationModel> obs, VectorXd y,
                                 ScoreConfig cfg, const NoiseSchedule& schedule)
    : prior_(std::move(prior)),
      ref_(std::move(ref)),
      obs_(std::move(obs)),
      y_(std::move(y)),
      cfg_(std::move(cfg)),
      schedule_(schedule) {
  const Eigen::Index d = prior_->dim();
  if (obs_->state_dim() != d || ref_.mu_star.size() != d || ref_.sigma_star.rows() != d) {
    throw ConfigError("IEnSF score: dimension mismatch between prior, reference and operator");
  }
  if (y_.size() != obs_->obs_dim()) throw ConfigError("IEnSF score: observation size mismatch");
  if (cfg_.obs_weight_mode == ObsWeightMode::shared_point) {
    h_star_ = obs_->jacobian(ref_.mu_star);
    m_star_ = obs_->apply(ref_.mu_star);
  }
}

std::unique_ptr<const ScoreStep> IEnSFScoreField::prepare(double t) const {
  const ScheduleValues s = schedule_.at(t, false);
  auto step = std::make_unique<IEnSFStep>();
  step->mix.init(*prior_, s);
  step->obs = obs_.get();
  step->y = &y_;
  step->j = time_scaling_J(prior_->shared_cov, t, schedule_);
  step->j_star = time_scaling_J(ref_.sigma_star, t, schedule_);
  step->c_star = ref_.mu_star - s.alpha * (step->j_star * ref_.mu_star);
  step->mode = cfg_.obs_weight_mode;

  if (prior_->identical_means || cfg_.obs_weight_mode == ObsWeightMode::off) {
    step->path = WeightPath::none;
    return step;
  }
  const MatrixXd base = prior_->means - s.alpha * (step->j * prior_->means);
  const MatrixXd sigma0t =
      symmetrized(prior_->shared_cov - s.alpha * (step->j * prior_->shared_cov));

  auto make_affine = [&](const MatrixXd& h, const VectorXd& y_eff, const MatrixXd& c) {
    const SpdFactor fc(symmetrized(c));
    MatrixXd innov = -(h * base);
    innov.colwise() += y_eff;
    step->wy_t = fc.whiten_mat(innov).transpose();
    step->g = fc.whiten_mat(h * step->j);
    step->path = WeightPath::affine;
  };

  const MatrixXd& r = obs_->obs_cov();
  if (cfg_.obs_weight_mode == ObsWeightMode::shared_point) {
    const VectorXd y_eff = y_ - m_star_ + h_star_ * ref_.mu_star;
    make_affine(h_star_, y_eff, h_star_ * sigma0t * h_star_.transpose() + r);
  } else if (obs_->is_linear()) {
    const MatrixXd& h = obs_->linear_matrix();
    if (cfg_.obs_weight_mode == ObsWeightMode::zeroth_order) {
      make_affine(h, y_, r);
    } else {
      make_affine(h, y_, h * sigma0t * h.transpose() + r);
    }
  } else if (obs_->is_selective()) {
    const auto& idx = obs_->selected();
    const auto r_dim = static_cast<Eigen::Index>(idx.size());
    step->base_sel.resize(r_dim, base.cols());
    step->j_sel.resize(r_dim, base.rows());
    step->p_sel.resize(r_dim, r_dim);
    for (Eigen::Index i = 0; i < r_dim; ++i) {
      step->base_sel.row(i) = base.row(idx[static_cast<std::size_t>(i)]);
      step->j_sel.row(i) = step->j.row(idx[static_cast<std::size_t>(i)]);
      for (Eigen::Index l = 0; l < r_dim; ++l) {
        step->p_sel(i, l) = sigma0t(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(l)]);
      }
    }
    step->path = WeightPath::selective;
  } else {
    step->base = base;
    step->sigma0t = sigma0t;
    step->path = WeightPath::general;
  }
  step->h_star = &h_star_;
  step->m_star = &m_star_;
  step->mu_star = &ref_.mu_star;
  return step;
}

EnSFScoreField::EnSFScoreField(std::shared_ptr<const GaussianMixturePrior> prior,
                               std::shared_ptr<const ObservationModel> obs, VectorXd y,
                               ScoreConfig cfg, const NoiseSchedule& schedule)
    : prior_(std::move(prior)),
      obs_(std::move(obs)),
      y_(std::move(y)),
      cfg_(std::move(cfg)),
      schedule_(schedule) {
  if (obs_->state_dim() != prior_->dim()) throw ConfigError("EnSF score: dimension mismatch");
  if (y_.size() != obs_->obs_dim()) throw ConfigError("EnSF score: observation size mismatch");
}

std::unique_ptr<const ScoreStep> EnSFScoreField::prepare(double t) const {
  const ScheduleValues s = schedule_.at(t, false);
  auto step = std::make_unique<EnSFStep>();
  step->mix.init(*prior_, s);
  step->obs = obs_.get();
  step->y = &y_;
  step->h = cfg_.ensf_damping(t);
  return step;
}

}  // namespace scoreda
