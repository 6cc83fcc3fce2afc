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

#include "scoreda/models.hpp"

#include <cmath>
#include <numbers>

namespace scoreda {

namespace {
constexpr double kLog2Pi = 1.8378770664093454835606594728112;
}  // namespace

ObservationModel::ObservationModel(ObsKind kind, Eigen::Index state_dim, MatrixXd obs_cov)
    : kind_(kind), state_dim_(state_dim), obs_cov_(std::move(obs_cov)) {
  if (obs_cov_.rows() != obs_cov_.cols() || obs_cov_.rows() == 0) {
    throw ConfigError("observation model: noise covariance must be square and non-empty");
  }
  obs_factor_ = SpdFactor(obs_cov_);
}

ObservationModel ObservationModel::select_linear(Eigen::Index state_dim,
                                                 std::vector<Eigen::Index> indices,
                                                 MatrixXd obs_cov) {
  if (static_cast<Eigen::Index>(indices.size()) != obs_cov.rows()) {
    throw ConfigError("select_linear: one noise row per selected index required");
  }
  ObservationModel m(ObsKind::select_linear, state_dim, std::move(obs_cov));
  m.h_ = MatrixXd::Zero(static_cast<Eigen::Index>(indices.size()), state_dim);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] < 0 || indices[i] >= state_dim) throw ConfigError("select_linear: index out of range");
    m.h_(static_cast<Eigen::Index>(i), indices[i]) = 1.0;
  }
  m.indices_ = std::move(indices);
  return m;
}

ObservationModel ObservationModel::arctan_selected(Eigen::Index state_dim,
                                                   std::vector<Eigen::Index> indices,
                                                   MatrixXd obs_cov) {
  if (static_cast<Eigen::Index>(indices.size()) != obs_cov.rows()) {
    throw ConfigError("arctan_selected: one noise row per selected index required");
  }
  for (auto i : indices) {
    if (i < 0 || i >= state_dim) throw ConfigError("arctan_selected: index out of range");
  }
  ObservationModel m(ObsKind::arctan_selected, state_dim, std::move(obs_cov));
  m.indices_ = std::move(indices);
  return m;
}

ObservationModel ObservationModel::radial(VectorXd center, double obs_std) {
  if (!(obs_std > 0.0)) throw ConfigError("radial: observation std must be positive");
  const Eigen::Index d = center.size();
  ObservationModel m(ObsKind::radial, d, MatrixXd::Constant(1, 1, obs_std * obs_std));
  m.center_ = std::move(center);
  return m;
}

ObservationModel ObservationModel::linear(MatrixXd h, MatrixXd obs_cov) {
  if (h.rows() != obs_cov.rows()) throw ConfigError("linear: H rows must match noise dimension");
  ObservationModel m(ObsKind::linear, h.cols(), std::move(obs_cov));
  m.h_ = std::move(h);
  return m;
}

ObservationModel ObservationModel::custom(ObsOperator op, Eigen::Index state_dim,
                                          MatrixXd obs_cov, ObsJacobian jacobian) {
  if (!op) throw ConfigError("custom observation: operator required");
  ObservationModel m(ObsKind::custom, state_dim, std::move(obs_cov));
  m.op_ = std::move(op);
  m.jac_ = std::move(jacobian);
  return m;
}

std::vector<Eigen::Index> ObservationModel::every_nth(Eigen::Index dim, Eigen::Index spacing,
                                                      Eigen::Index offset) {
  if (spacing < 1 || offset < 0) throw ConfigError("every_nth: spacing >= 1 and offset >= 0 required");
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = offset; i < dim; i += spacing) idx.push_back(i);
  return idx;
}

double ObservationModel::selected_map(double v) const {
  return kind_ == ObsKind::arctan_selected ? std::atan(v) : v;
}

double ObservationModel::selected_derivative(double v) const {
  return kind_ == ObsKind::arctan_selected ? 1.0 / (1.0 + v * v) : 1.0;
}

VectorXd ObservationModel::apply(const Eigen::Ref<const VectorXd>& x) const {
  if (x.size() != state_dim_) throw DomainError("observation: state dimension mismatch");
  switch (kind_) {
    case ObsKind::select_linear:
    case ObsKind::arctan_selected: {
      VectorXd out(static_cast<Eigen::Index>(indices_.size()));
      for (std::size_t i = 0; i < indices_.size(); ++i) {
        out[static_cast<Eigen::Index>(i)] = selected_map(x[indices_[i]]);
      }
      return out;
    }
    case ObsKind::radial:
      return VectorXd::Constant(1, (x - center_).norm());
    case ObsKind::linear:
      return h_ * x;
    case ObsKind::custom:
      return op_(VectorXd(x));
  }
  return {};
}

MatrixXd finite_difference_jacobian(const ObsOperator& op, const Eigen::Ref<const VectorXd>& x) {
  const Eigen::Index d = x.size();
  VectorXd xp = x;
  VectorXd xm = x;
  const Eigen::Index r = op(xp).size();
  MatrixXd jac(r, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double h = 1e-5 * (1.0 + std::abs(x[i]));
    xp[i] = x[i] + h;
    xm[i] = x[i] - h;
    jac.col(i) = (op(xp) - op(xm)) / (2.0 * h);
    xp[i] = x[i];
    xm[i] = x[i];
  }
  return jac;
}

MatrixXd ObservationModel::finite_difference_jacobian(const Eigen::Ref<const VectorXd>& x) const {
  return scoreda::finite_difference_jacobian([this](const VectorXd& v) { return apply(v); }, x);
}

MatrixXd ObservationModel::jacobian(const Eigen::Ref<const VectorXd>& x) const {
  if (x.size() != state_dim_) throw DomainError("observation: state dimension mismatch");
  switch (kind_) {
    case ObsKind::select_linear:
    case ObsKind::linear:
      return h_;
    case ObsKind::arctan_selected: {
      MatrixXd jac = MatrixXd::Zero(static_cast<Eigen::Index>(indices_.size()), state_dim_);
      for (std::size_t i = 0; i < indices_.size(); ++i) {
        jac(static_cast<Eigen::Index>(i), indices_[i]) = selected_derivative(x[indices_[i]]);
      }
      return jac;
    }
    case ObsKind::radial: {
      const VectorXd diff = x - center_;
      const double r = diff.norm();
      if (!(r > 0.0)) throw DomainError("radial observation: Jacobian is singular at the centre");
      return (diff / r).transpose();
    }
    case ObsKind::custom:
      return jac_ ? jac_(VectorXd(x)) : finite_difference_jacobian(x);
  }
  return {};
}

VectorXd ObservationModel::likelihood_score(const Eigen::Ref<const VectorXd>& y,
                                            const Eigen::Ref<const VectorXd>& x) const {
  if (is_selective()) {
    // J^T R^{-1} v with J a scaled selection: scatter into the state.
    VectorXd innov(static_cast<Eigen::Index>(indices_.size()));
    for (std::size_t i = 0; i < indices_.size(); ++i) {
      innov[static_cast<Eigen::Index>(i)] = y[static_cast<Eigen::Index>(i)] - selected_map(x[indices_[i]]);
    }
    const VectorXd w = obs_factor_.solve(innov);
    VectorXd out = VectorXd::Zero(state_dim_);
    for (std::size_t i = 0; i < indices_.size(); ++i) {
      out[indices_[i]] += selected_derivative(x[indices_[i]]) * w[static_cast<Eigen::Index>(i)];
    }
    return out;
  }
  const VectorXd innov = y - apply(x);
  return jacobian(x).transpose() * obs_factor_.solve(innov);
}

double ObservationModel::log_likelihood(const Eigen::Ref<const VectorXd>& y,
                                        const Eigen::Ref<const VectorXd>& x) const {
  const VectorXd w = obs_factor_.whiten(VectorXd(y - apply(x)));
  return -0.5 * (w.squaredNorm() + obs_factor_.log_det() + static_cast<double>(y.size()) * kLog2Pi);
}

std::optional<Eigen::Index> ObservationModel::location(Eigen::Index obs_index) const {
  if (is_selective()) return indices_[static_cast<std::size_t>(obs_index)];
  return std::nullopt;
}

ObservationModel ObservationModel::with_obs_cov(MatrixXd obs_cov) const {
  if (obs_cov.rows() != obs_cov_.rows()) throw ConfigError("with_obs_cov: dimension mismatch");
  ObservationModel m = *this;
  m.obs_cov_ = std::move(obs_cov);
  m.obs_factor_ = SpdFactor(m.obs_cov_);
  return m;
}

// ---------------------------------------------------------------------------

MatrixXd HarmonicOscillatorModel::transition() const {
  const double c = std::cos(omega * dt);
  const double s = std::sin(omega * dt);
  MatrixXd a(2, 2);
  a << c, s / omega, -omega * s, c;
  return a;
}

VectorXd ho_step(const Eigen::Ref<const VectorXd>& x, const HarmonicOscillatorModel& model,
                 RngStream& rng) {
  VectorXd next = model.transition() * x;
  if (model.process_cov.cwiseAbs().maxCoeff() > 0.0) {
    const SpdFactor q(model.process_cov);
    next += q.colour(rng.normal_vector(2));
  }
  return next;
}

// ---------------------------------------------------------------------------

void l96_rhs(const Eigen::Ref<const VectorXd>& x, const Lorenz96Model& model,
             Eigen::Ref<VectorXd> out) {
  const Eigen::Index d = x.size();
  if (d < 4) throw DomainError("Lorenz-96 needs d >= 4");
  for (Eigen::Index i = 0; i < d; ++i) {
    const double xp1 = x[(i + 1) % d];
    const double xm1 = x[(i + d - 1) % d];
    const double xm2 = x[(i + d - 2) % d];
    out[i] = (xp1 - xm2) * xm1 + model.forcing - (model.damping ? x[i] : 0.0);
  }
}

VectorXd l96_rhs(const Eigen::Ref<const VectorXd>& x, const Lorenz96Model& model) {
  VectorXd out(x.size());
  l96_rhs(x, model, out);
  return out;
}

VectorXd rk4_step(const Eigen::Ref<const VectorXd>& x, const OdeRhs& rhs, double h) {
  if (!(h > 0.0)) throw DomainError("rk4_step: step must be positive");
  const VectorXd x0 = x;
  const VectorXd k1 = rhs(x0);
  const VectorXd k2 = rhs(x0 + 0.5 * h * k1);
  const VectorXd k3 = rhs(x0 + 0.5 * h * k2);
  const VectorXd k4 = rhs(x0 + h * k3);
  return x0 + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

VectorXd l96_integrate(const Eigen::Ref<const VectorXd>& x, const Lorenz96Model& model,
                       double h, int n_steps) {
  if (!(h > 0.0)) throw DomainError("l96_integrate: step must be positive");
  const Eigen::Index d = x.size();
  VectorXd state = x;
  VectorXd k1(d), k2(d), k3(d), k4(d), tmp(d);
  for (int s = 0; s < n_steps; ++s) {
    l96_rhs(state, model, k1);
    tmp = state + 0.5 * h * k1;
    l96_rhs(tmp, model, k2);
    tmp = state + 0.5 * h * k2;
    l96_rhs(tmp, model, k3);
    tmp = state + h * k3;
    l96_rhs(tmp, model, k4);
    state += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return state;
}

}  // namespace scoreda
