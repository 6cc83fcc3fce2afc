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

#include "scoreda/baselines.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

namespace scoreda {

void LinearGaussianModel::validate() const {
  const Eigen::Index d = transition.rows();
  if (transition.cols() != d || process_cov.rows() != d || process_cov.cols() != d ||
      obs_matrix.cols() != d || obs_cov.rows() != obs_matrix.rows() ||
      obs_cov.cols() != obs_matrix.rows()) {
    throw ConfigError("linear Gaussian model: inconsistent dimensions");
  }
}

GaussianParams kf_predict(const GaussianParams& state, const LinearGaussianModel& model) {
  GaussianParams out;
  out.mean = model.transition * state.mean;
  out.cov = model.transition * state.cov * model.transition.transpose() + model.process_cov;
  out.cov = (0.5 * (out.cov + out.cov.transpose())).eval();
  return out;
}

GaussianParams kf_update(const GaussianParams& prior, const MatrixXd& h, const MatrixXd& r,
                         const VectorXd& y) {
  const Eigen::Index d = prior.dim();
  const MatrixXd s = h * prior.cov * h.transpose() + r;
  const SpdFactor fs(0.5 * (s + s.transpose()));
  // K = P H^T S^{-1} = (S^{-1} H P)^T
  const MatrixXd gain = fs.solve_mat(h * prior.cov).transpose();
  GaussianParams out;
  out.mean = prior.mean + gain * (y - h * prior.mean);
  const MatrixXd ikh = MatrixXd::Identity(d, d) - gain * h;
  out.cov = ikh * prior.cov * ikh.transpose() + gain * r * gain.transpose();
  out.cov = (0.5 * (out.cov + out.cov.transpose())).eval();
  return out;
}

GaussianParams kf_step(const GaussianParams& state, const LinearGaussianModel& model,
                       const VectorXd& y) {
  model.validate();
  return kf_update(kf_predict(state, model), model.obs_matrix, model.obs_cov, y);
}

namespace {

Ensemble inflate(const Ensemble& ensemble, double inflation) {
  if (!(inflation >= 1.0)) throw ConfigError("inflation must be >= 1");
  const VectorXd mean = ensemble.mean();
  MatrixXd x = (ensemble.matrix().colwise() - mean) * inflation;
  x.colwise() += mean;
  return Ensemble(std::move(x));
}

MatrixXd observe_members(const Ensemble& ensemble, const ObservationModel& obs) {
  MatrixXd y(obs.obs_dim(), ensemble.size());
  for (Eigen::Index j = 0; j < ensemble.size(); ++j) y.col(j) = obs.apply(ensemble.member(j));
  return y;
}

// Observation locations, empty when any observation has no state index.
std::vector<Eigen::Index> obs_locations(const ObservationModel& obs) {
  std::vector<Eigen::Index> loc;
  for (Eigen::Index l = 0; l < obs.obs_dim(); ++l) {
    const auto i = obs.location(l);
    if (!i) return {};
    loc.push_back(*i);
  }
  return loc;
}

}  // namespace

Ensemble enkf_update(const Ensemble& ensemble, const ObservationModel& obs, const VectorXd& y,
                     double inflation, const LocalizationOptions& loc, RngKey key) {
  const Eigen::Index k = ensemble.size();
  const Eigen::Index d = ensemble.dim();
  if (k < 2) throw DomainError("enkf: at least 2 members required");
  const Ensemble xf = inflate(ensemble, inflation);
  const MatrixXd yf = observe_members(xf, obs);
  const VectorXd xm = xf.mean();
  const VectorXd ym = yf.rowwise().mean();
  const MatrixXd a = xf.matrix().colwise() - xm;
  const MatrixXd b = yf.colwise() - ym;
  const double denom = static_cast<double>(k - 1);
  MatrixXd pxy = a * b.transpose() / denom;
  MatrixXd pyy = b * b.transpose() / denom;

  const auto locs = obs_locations(obs);
  if (loc.halfwidth && !locs.empty()) {
    const Eigen::Index r = obs.obs_dim();
    for (Eigen::Index l = 0; l < r; ++l) {
      const Eigen::Index il = locs[static_cast<std::size_t>(l)];
      for (Eigen::Index i = 0; i < d; ++i) {
        pxy(i, l) *= gaspari_cohn_taper(index_distance(i, il, d, loc.metric), *loc.halfwidth);
      }
      for (Eigen::Index m = 0; m < r; ++m) {
        pyy(l, m) *= gaspari_cohn_taper(
            index_distance(il, locs[static_cast<std::size_t>(m)], d, loc.metric), *loc.halfwidth);
      }
    }
  }
  pyy += obs.obs_cov();
  const SpdFactor fs(0.5 * (pyy + pyy.transpose()));
  const MatrixXd gain_t = fs.solve_mat(pxy.transpose());  // (P_yy^{-1} P_xy^T)

  MatrixXd out = xf.matrix();
  for (Eigen::Index j = 0; j < k; ++j) {
    RngStream rng(key.derive(static_cast<std::uint64_t>(j)));
    const VectorXd eps = obs.obs_factor().colour(rng.normal_vector(obs.obs_dim()));
    out.col(j) += gain_t.transpose() * (y + eps - yf.col(j));
  }
  return Ensemble(std::move(out));
}

namespace {

// Ensemble transform from whitened observation anomalies yw (m x K) and
// whitened innovation dw. With yw^T = U S V^T the analysis weights are
//   W = sqrt(rho) I + U (diag(a) - sqrt(rho)) U^T,  a_i = sqrt((K-1) / (c + s_i^2)),
//   wbar = U diag(s_i / (c + s_i^2)) V^T dw,          c = (K-1) / rho,
// so nothing K x K is formed.
struct EtkfTransform {
  MatrixXd u;
  VectorXd coef;
  VectorXd wbar;
  double sqrt_rho = 1.0;

  // rows (n x K) of anomalies -> analysis anomalies plus mean shift.
  MatrixXd apply(const MatrixXd& anomalies) const {
    MatrixXd out = sqrt_rho * anomalies;
    out.noalias() += (anomalies * u) * coef.asDiagonal() * u.transpose();
    out.colwise() += anomalies * wbar;
    return out;
  }
};

EtkfTransform etkf_transform(const MatrixXd& yw, const VectorXd& dw, double rho) {
  const Eigen::Index k = yw.cols();
  const double km1 = static_cast<double>(k - 1);
  const double c = km1 / rho;
  const Eigen::JacobiSVD<MatrixXd> svd(yw.transpose(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VectorXd& sv = svd.singularValues();
  const VectorXd denom = (sv.array().square() + c).matrix();
  EtkfTransform t;
  t.sqrt_rho = std::sqrt(rho);
  t.u = svd.matrixU();
  t.coef = ((km1 / denom.array()).sqrt() - t.sqrt_rho).matrix();
  t.wbar = t.u * (sv.cwiseQuotient(denom).asDiagonal() * (svd.matrixV().transpose() * dw));
  return t;
}

}  // namespace

Ensemble letkf_update(const Ensemble& ensemble, const ObservationModel& obs, const VectorXd& y,
                      double inflation, const LocalizationOptions& loc, Exec exec) {
  const Eigen::Index k = ensemble.size();
  const Eigen::Index d = ensemble.dim();
  if (k < 2) throw DomainError("letkf: at least 2 members required");
  if (!(inflation >= 1.0)) throw ConfigError("inflation must be >= 1");
  const double rho = inflation * inflation;

  const MatrixXd yf = observe_members(ensemble, obs);
  const VectorXd xm = ensemble.mean();
  const VectorXd ym = yf.rowwise().mean();
  const MatrixXd xa = ensemble.matrix().colwise() - xm;
  const MatrixXd yb = yf.colwise() - ym;
  const VectorXd dy = y - ym;
  const MatrixXd& r = obs.obs_cov();
  const Eigen::Index n_obs = obs.obs_dim();

  const auto locs = obs_locations(obs);
  MatrixXd out(d, k);
  if (!loc.halfwidth || locs.empty()) {
    const SpdFactor& rf = obs.obs_factor();
    out = etkf_transform(rf.whiten_mat(yb), rf.whiten(dy), rho).apply(xa);
    out.colwise() += xm;
    return Ensemble(std::move(out));
  }

  const bool diag_r = r.isDiagonal();
  const bool parallel = exec == Exec::parallel;
#pragma omp parallel for schedule(dynamic, 4) if (parallel)
  for (Eigen::Index i = 0; i < d; ++i) {
    std::vector<Eigen::Index> sel;
    std::vector<double> taper;
    for (Eigen::Index l = 0; l < n_obs; ++l) {
      const double rl = index_distance(i, locs[static_cast<std::size_t>(l)], d, loc.metric);
      const double tw = gaspari_cohn_taper(rl, *loc.halfwidth);
      if (tw > 1e-6) {
        sel.push_back(l);
        taper.push_back(tw);
      }
    }
    if (sel.empty()) {
      out.row(i) = ensemble.matrix().row(i);
      continue;
    }
    const auto m = static_cast<Eigen::Index>(sel.size());
    MatrixXd yl(m, k);
    VectorXd dyl(m);
    MatrixXd rl(m, m);
    for (Eigen::Index a = 0; a < m; ++a) {
      const Eigen::Index la = sel[static_cast<std::size_t>(a)];
      yl.row(a) = yb.row(la);
      dyl[a] = dy[la];
      for (Eigen::Index b = 0; b < m; ++b) rl(a, b) = r(la, sel[static_cast<std::size_t>(b)]);
    }
    // Tapered precision D^{1/2} R^{-1} D^{1/2} enters through D^{1/2} scaling before whitening.
    const VectorXd sq = Eigen::Map<const VectorXd>(taper.data(), m).cwiseSqrt();
    yl = sq.asDiagonal() * yl;
    dyl = sq.cwiseProduct(dyl);
    if (diag_r) {
      const VectorXd inv_sd = rl.diagonal().cwiseSqrt().cwiseInverse();
      yl = inv_sd.asDiagonal() * yl;
      dyl = inv_sd.cwiseProduct(dyl);
    } else {
      const SpdFactor rf(rl);
      yl = rf.whiten_mat(yl);
      dyl = rf.whiten(dyl);
    }
    const EtkfTransform tr = etkf_transform(yl, dyl, rho);
    out.row(i) = tr.apply(xa.row(i)).array() + xm[i];
  }
  return Ensemble(std::move(out));
}

std::vector<Eigen::Index> systematic_resample(const Eigen::Ref<const VectorXd>& weights,
                                              double u) {
  const Eigen::Index k = weights.size();
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(k));
  double cum = weights[0];
  Eigen::Index j = 0;
  for (Eigen::Index n = 0; n < k; ++n) {
    const double pos = (static_cast<double>(n) + u) / static_cast<double>(k);
    while (pos > cum && j < k - 1) cum += weights[++j];
    idx[static_cast<std::size_t>(n)] = j;
  }
  return idx;
}

double effective_sample_size(const Eigen::Ref<const VectorXd>& weights) {
  return 1.0 / weights.squaredNorm();
}

ParticleState pf_update(const Ensemble& particles, const VectorXd& weights,
                        const ObservationModel& obs, const VectorXd& y, RngKey key,
                        double ess_fraction) {
  const Eigen::Index k = particles.size();
  if (weights.size() != k) throw DomainError("pf: weight count does not match particles");
  if (std::abs(weights.sum() - 1.0) > 1e-9 || (weights.array() < 0.0).any()) {
    throw DomainError("pf: weights are not on the simplex");
  }
  VectorXd logw(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    logw[j] = std::log(weights[j]) + obs.log_likelihood(y, particles.member(j));
  }
  if (logw.maxCoeff() == -std::numeric_limits<double>::infinity() || logw.hasNaN()) {
    throw NumericalError("pf: degenerate weights, every likelihood underflowed");
  }
  softmax_inplace(logw);

  ParticleState out{particles, logw, false};
  if (effective_sample_size(logw) < ess_fraction * static_cast<double>(k)) {
    RngStream rng(key);
    const auto idx = systematic_resample(logw, rng.uniform());
    MatrixXd x(particles.dim(), k);
    for (Eigen::Index n = 0; n < k; ++n) x.col(n) = particles.member(idx[static_cast<std::size_t>(n)]);
    out.particles = Ensemble(std::move(x));
    out.weights = VectorXd::Constant(k, 1.0 / static_cast<double>(k));
    out.resampled = true;
  }
  return out;
}

}  // namespace scoreda
