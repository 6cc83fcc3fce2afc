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

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace scoreda {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Argument outside the domain where an operation is defined.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Invalid or inconsistent configuration (maps to CLI exit code 2).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical breakdown: singular covariance, non-finite state, underflow
/// (maps to CLI exit code 3).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// K state vectors of dimension d, stored column-wise (d x K).
class Ensemble {
 public:
  Ensemble() = default;
  Ensemble(Eigen::Index dim, Eigen::Index size) : members_(MatrixXd::Zero(dim, size)) {}
  explicit Ensemble(MatrixXd members) : members_(std::move(members)) {}

  Eigen::Index dim() const { return members_.rows(); }
  Eigen::Index size() const { return members_.cols(); }

  auto member(Eigen::Index k) { return members_.col(k); }
  auto member(Eigen::Index k) const { return members_.col(k); }

  const MatrixXd& matrix() const { return members_; }
  MatrixXd& matrix() { return members_; }

  VectorXd mean() const { return members_.rowwise().mean(); }

  bool all_finite() const { return members_.allFinite(); }

 private:
  MatrixXd members_;
};

}  // namespace scoreda
