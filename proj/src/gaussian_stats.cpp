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

#include "scoreda/gaussian_stats.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace scoreda {

namespace {
constexpr double kLog2Pi = 1.8378770664093454835606594728112;
}  // namespace

SpdFactor::SpdFactor(const MatrixXd& a) {
  if (a.rows() != a.cols()) throw DomainError("SpdFactor: matrix is not square");
  const Eigen::Index d = a.rows();
  if (d == 0) return;
  llt_.compute(a);
  if (llt_.info() != Eigen::Success || !llt_.matrixLLT().allFinite()) {
    const double scale = a.trace() / static_cast<double>(d);
    bool ok = false;
    if (scale > 0.0 && std::isfinite(scale)) {
      for (double f = 1e-12; f <= 1e-6 * (1.0 + 1e-9); f *= 10.0) {
        jitter_ = f * scale;
        MatrixXd b = a;
        b.diagonal().array() += jitter_;
        llt_.compute(b);
        if (llt_.info() == Eigen::Success && llt_.matrixLLT().allFinite()) {
          ok = true;
          break;
        }
      }
    }
    if (!ok) throw NumericalError("singular covariance: Cholesky failed after maximum jitter");
  }
  log_det_ = 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
}

VectorXd SpdFactor::whiten(const Eigen::Ref<const VectorXd>& b) const {
  return llt_.matrixL().solve(b);
}

MatrixXd SpdFactor::whiten_mat(const Eigen::Ref<const MatrixXd>& b) const {
  return llt_.matrixL().solve(b);
}

VectorXd SpdFactor::colour(const Eigen::Ref<const VectorXd>& b) const {
  return llt_.matrixL() * b;
}

bool is_symmetric(const MatrixXd& a, double rel_tol) {
  if (a.rows() != a.cols()) return false;
  const double scale = std::max(a.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

SampleStats sample_mean_cov(const Ensemble& ensemble, bool with_cov) {
  const Eigen::Index k = ensemble.size();
  if (k < 1) throw DomainError("sample_mean_cov: empty ensemble");
  SampleStats s;
  s.mean = ensemble.mean();
  if (!with_cov) return s;
  if (k < 2) throw DomainError("sample_mean_cov: covariance needs at least 2 members");
  const MatrixXd anomalies = ensemble.matrix().colwise() - s.mean;
  s.cov = anomalies * anomalies.transpose() / static_cast<double>(k - 1);
  s.var = s.cov.diagonal();
  return s;
}

double gaussian_logpdf(const Eigen::Ref<const VectorXd>& x,
                       const Eigen::Ref<const VectorXd>& mean, const SpdFactor& cov) {
  const VectorXd w = cov.whiten(VectorXd(x - mean));
  return -0.5 * (w.squaredNorm() + cov.log_det() + static_cast<double>(x.size()) * kLog2Pi);
}

double gaussian_logpdf(const Eigen::Ref<const VectorXd>& x, const GaussianParams& g) {
  return gaussian_logpdf(x, g.mean, SpdFactor(g.cov));
}

VectorXd gaussian_score(const Eigen::Ref<const VectorXd>& x, const GaussianParams& g) {
  const SpdFactor f(g.cov);
  return -f.solve(VectorXd(x - g.mean));
}

double gaussian_kl(const GaussianParams& p, const GaussianParams& q) {
  const Eigen::Index d = p.dim();
  if (q.dim() != d) throw DomainError("gaussian_kl: dimension mismatch");
  const SpdFactor fq(q.cov);
  const SpdFactor fp(p.cov);
  const MatrixXd lq_inv_lp = fq.whiten_mat(fp.matrix_l());
  const double trace_term = lq_inv_lp.squaredNorm();
  const double maha = fq.whiten(VectorXd(q.mean - p.mean)).squaredNorm();
  const double kl = 0.5 * (trace_term + maha - static_cast<double>(d) + fq.log_det() - fp.log_det());
  return std::max(kl, 0.0);
}

double gaspari_cohn_taper(double r, double c) {
  if (!(c > 0.0)) throw DomainError("gaspari_cohn_taper: half-width must be positive");
  const double z = std::abs(r) / c;
  if (z >= 2.0) return 0.0;
  const double z2 = z * z;
  const double z3 = z2 * z;
  const double z4 = z3 * z;
  const double z5 = z4 * z;
  if (z <= 1.0) {
    return -0.25 * z5 + 0.5 * z4 + 0.625 * z3 - (5.0 / 3.0) * z2 + 1.0;
  }
  return z5 / 12.0 - 0.5 * z4 + 0.625 * z3 + (5.0 / 3.0) * z2 - 5.0 * z + 4.0 - 2.0 / (3.0 * z);
}

double index_distance(Eigen::Index i, Eigen::Index j, Eigen::Index d,
                      LocalizationMetric metric) {
  const auto diff = static_cast<double>(i > j ? i - j : j - i);
  if (metric == LocalizationMetric::index_ring) {
    return std::min(diff, static_cast<double>(d) - diff);
  }
  return diff;
}

MatrixXd localize_cov(const MatrixXd& cov, double halfwidth, LocalizationMetric metric) {
  if (!(halfwidth > 0.0)) throw DomainError("localize_cov: half-width must be positive");
  const Eigen::Index d = cov.rows();
  MatrixXd out = cov;
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) {
      if (i == j) continue;
      out(i, j) *= gaspari_cohn_taper(index_distance(i, j, d, metric), halfwidth);
    }
  }
  return out;
}

double log_sum_exp(const Eigen::Ref<const VectorXd>& v) {
  if (v.size() == 0) return -std::numeric_limits<double>::infinity();
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

void softmax_inplace(Eigen::Ref<VectorXd> logw) {
  const double m = logw.maxCoeff();
  if (std::isnan(m) || m == -std::numeric_limits<double>::infinity() || logw.hasNaN()) {
    throw NumericalError("softmax: all weights underflowed or are NaN");
  }
  logw = (logw.array() - m).exp();
  logw /= logw.sum();
}

}  // namespace scoreda
