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
#include <span>

#include "scoreda/types.hpp"

namespace scoreda {

struct GaussianParams {
  VectorXd mean;
  MatrixXd cov;

  Eigen::Index dim() const { return mean.size(); }
};

struct SampleStats {
  VectorXd mean;
  MatrixXd cov;  // unbiased, divisor K-1
  VectorXd var;  // diag(cov)
};

/// Cholesky factor of a symmetric positive (semi)definite matrix.
///
/// Factorization is attempted on the matrix as given; if that fails a jitter
/// ladder adds 1e-12 * tr/d * I, escalating by 10x up to 1e-6 * tr/d. Throws
/// NumericalError when the ladder is exhausted.
class SpdFactor {
 public:
  SpdFactor() = default;
  explicit SpdFactor(const MatrixXd& a);

  Eigen::Index dim() const { return llt_.rows(); }
  double jitter() const { return jitter_; }

  /// Solves A x = b (A including any jitter that was added).
  VectorXd solve(const Eigen::Ref<const VectorXd>& b) const { return llt_.solve(b); }
  MatrixXd solve_mat(const Eigen::Ref<const MatrixXd>& b) const { return llt_.solve(b); }

  /// L^{-1} b, i.e. whitening.
  VectorXd whiten(const Eigen::Ref<const VectorXd>& b) const;
  MatrixXd whiten_mat(const Eigen::Ref<const MatrixXd>& b) const;

  /// L b, i.e. colouring of unit normals.
  VectorXd colour(const Eigen::Ref<const VectorXd>& b) const;

  double log_det() const { return log_det_; }
  MatrixXd matrix_l() const { return llt_.matrixL(); }

 private:
  Eigen::LLT<MatrixXd> llt_;
  double jitter_ = 0.0;
  double log_det_ = 0.0;
};

/// True when `a` is symmetric to `rel_tol` relative to its largest entry.
bool is_symmetric(const MatrixXd& a, double rel_tol = 1e-10);

/// Sample mean and unbiased sample covariance. Requires K >= 2 unless
/// `with_cov` is false.
SampleStats sample_mean_cov(const Ensemble& ensemble, bool with_cov = true);

double gaussian_logpdf(const Eigen::Ref<const VectorXd>& x, const GaussianParams& g);
double gaussian_logpdf(const Eigen::Ref<const VectorXd>& x,
                       const Eigen::Ref<const VectorXd>& mean, const SpdFactor& cov);

/// Score -Sigma^{-1}(x - mu) via a factorized solve.
VectorXd gaussian_score(const Eigen::Ref<const VectorXd>& x, const GaussianParams& g);

/// KL(p || q) for multivariate normals.
double gaussian_kl(const GaussianParams& p, const GaussianParams& q);

/// Gaspari-Cohn fifth-order compactly supported correlation of r / c.
double gaspari_cohn_taper(double r, double c);

enum class LocalizationMetric { index_ring, euclidean };

/// Distance between state indices i and j of a d-dimensional state.
double index_distance(Eigen::Index i, Eigen::Index j, Eigen::Index d,
                      LocalizationMetric metric);

/// Schur product of `cov` with the Gaspari-Cohn taper of pairwise index
/// distances.
MatrixXd localize_cov(const MatrixXd& cov, double halfwidth,
                      LocalizationMetric metric = LocalizationMetric::index_ring);

/// log(sum(exp(v))) without overflow. Returns -inf for an all -inf input.
double log_sum_exp(const Eigen::Ref<const VectorXd>& v);

/// In-place softmax of log-weights. Throws NumericalError when every entry is
/// -inf or any entry is NaN.
void softmax_inplace(Eigen::Ref<VectorXd> logw);

}  // namespace scoreda
