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
#include <vector>

#include "scoreda/gaussian_stats.hpp"
#include "scoreda/rng.hpp"
#include "scoreda/types.hpp"

namespace scoreda {

// ---------------------------------------------------------------------------
// Observation operators

enum class ObsKind { select_linear, arctan_selected, radial, linear, custom };

using ObsOperator = std::function<VectorXd(const VectorXd&)>;
using ObsJacobian = std::function<MatrixXd(const VectorXd&)>;

/// Observation operator M, its Jacobian and the Gaussian noise covariance.
///
/// `select_linear` and `arctan_selected` observe a subset of state indices
/// (elementwise identity or arctan); their Jacobian rows are scaled unit rows,
/// which the score kernels exploit. `radial` observes the distance to a
/// centre. `custom` falls back to central finite differences when no Jacobian
/// is supplied.
class ObservationModel {
 public:
  static ObservationModel select_linear(Eigen::Index state_dim, std::vector<Eigen::Index> indices,
                                        MatrixXd obs_cov);
  static ObservationModel arctan_selected(Eigen::Index state_dim, std::vector<Eigen::Index> indices,
                                          MatrixXd obs_cov);
  static ObservationModel radial(VectorXd center, double obs_std);
  static ObservationModel linear(MatrixXd h, MatrixXd obs_cov);
  static ObservationModel custom(ObsOperator op, Eigen::Index state_dim, MatrixXd obs_cov,
                                 ObsJacobian jacobian = {});

  /// Indices {offset, offset + spacing, ...} below `dim`.
  static std::vector<Eigen::Index> every_nth(Eigen::Index dim, Eigen::Index spacing,
                                             Eigen::Index offset = 0);

  ObsKind kind() const { return kind_; }
  Eigen::Index state_dim() const { return state_dim_; }
  Eigen::Index obs_dim() const { return obs_cov_.rows(); }

  const MatrixXd& obs_cov() const { return obs_cov_; }
  const SpdFactor& obs_factor() const { return obs_factor_; }

  VectorXd apply(const Eigen::Ref<const VectorXd>& x) const;
  MatrixXd jacobian(const Eigen::Ref<const VectorXd>& x) const;

  /// -J_M(x)^T R^{-1} (M(x) - y).
  VectorXd likelihood_score(const Eigen::Ref<const VectorXd>& y,
                            const Eigen::Ref<const VectorXd>& x) const;
  /// Normalized Gaussian log-likelihood log p(y | x).
  double log_likelihood(const Eigen::Ref<const VectorXd>& y,
                        const Eigen::Ref<const VectorXd>& x) const;

  /// Constant observation matrix when M is linear.
  bool is_linear() const { return kind_ == ObsKind::select_linear || kind_ == ObsKind::linear; }
  const MatrixXd& linear_matrix() const { return h_; }

  /// Elementwise operators on a subset of the state.
  bool is_selective() const {
    return kind_ == ObsKind::select_linear || kind_ == ObsKind::arctan_selected;
  }
  const std::vector<Eigen::Index>& selected() const { return indices_; }
  /// Elementwise map and derivative applied to already-selected values.
  double selected_map(double v) const;
  double selected_derivative(double v) const;

  /// State index an observation is attached to (for localization).
  std::optional<Eigen::Index> location(Eigen::Index obs_index) const;

  /// Same operator with a different noise covariance.
  ObservationModel with_obs_cov(MatrixXd obs_cov) const;

 private:
  ObservationModel(ObsKind kind, Eigen::Index state_dim, MatrixXd obs_cov);

  MatrixXd finite_difference_jacobian(const Eigen::Ref<const VectorXd>& x) const;

  ObsKind kind_;
  Eigen::Index state_dim_;
  MatrixXd obs_cov_;
  SpdFactor obs_factor_;
  std::vector<Eigen::Index> indices_;
  MatrixXd h_;
  VectorXd center_;
  ObsOperator op_;
  ObsJacobian jac_;
};

/// Central finite-difference Jacobian with step 1e-5 (1 + |x_i|).
MatrixXd finite_difference_jacobian(const ObsOperator& op, const Eigen::Ref<const VectorXd>& x);

// ---------------------------------------------------------------------------
// Harmonic oscillator

struct HarmonicOscillatorModel {
  double omega = 2.0;
  double dt = 0.1;
  MatrixXd process_cov = 0.25 * MatrixXd::Identity(2, 2);
  VectorXd x0 = (VectorXd(2) << 3.0, -3.0).finished();

  MatrixXd transition() const;
};

/// One transition plus N(0, Q) process noise (noise skipped when Q = 0).
VectorXd ho_step(const Eigen::Ref<const VectorXd>& x, const HarmonicOscillatorModel& model,
                 RngStream& rng);

// ---------------------------------------------------------------------------
// Lorenz-96

struct Lorenz96Model {
  Eigen::Index dim = 40;
  double forcing = 8.0;
  /// Standard -x_i term. false reproduces the undamped form.
  bool damping = true;
};

VectorXd l96_rhs(const Eigen::Ref<const VectorXd>& x, const Lorenz96Model& model);
void l96_rhs(const Eigen::Ref<const VectorXd>& x, const Lorenz96Model& model,
             Eigen::Ref<VectorXd> out);

using OdeRhs = std::function<VectorXd(const VectorXd&)>;

/// Classical four-stage Runge-Kutta step.
VectorXd rk4_step(const Eigen::Ref<const VectorXd>& x, const OdeRhs& rhs, double h);

/// `n_steps` RK4 steps of size h for Lorenz-96, allocation-free per step.
VectorXd l96_integrate(const Eigen::Ref<const VectorXd>& x, const Lorenz96Model& model,
                       double h, int n_steps);

}  // namespace scoreda
