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
#include <memory>

#include "scoreda/parallel.hpp"
#include "scoreda/rng.hpp"
#include "scoreda/types.hpp"

namespace scoreda {

/// Values of the forward-SDE noise schedule at a pseudo-time t.
struct ScheduleValues {
  double alpha = 1.0;
  double beta_sq = 0.0;
  double drift = 0.0;     // b(t) = d log(alpha)/dt
  double sigma_sq = 0.0;  // d(beta^2)/dt - 2 b(t) beta^2
};

/// Forward-SDE noise schedule (alpha_t, beta_t^2) on [0, 1].
class NoiseSchedule {
 public:
  virtual ~NoiseSchedule() = default;

  virtual double alpha(double t) const = 0;
  virtual double beta_sq(double t) const = 0;
  virtual double dlog_alpha(double t) const = 0;
  virtual double dbeta_sq(double t) const = 0;
  /// Smallest t at which the drift becomes singular (1 for alpha_t = 1 - t).
  virtual double singular_time() const = 0;

  /// All four schedule quantities. Throws DomainError for t outside [0, 1]
  /// and when the drift is requested at its singularity.
  ScheduleValues at(double t, bool with_drift = true) const;
};

/// alpha_t = 1 - t, beta_t^2 = t.
class LinearNoiseSchedule final : public NoiseSchedule {
 public:
  double alpha(double t) const override { return 1.0 - t; }
  double beta_sq(double t) const override { return t; }
  double dlog_alpha(double t) const override { return -1.0 / (1.0 - t); }
  double dbeta_sq(double) const override { return 1.0; }
  double singular_time() const override { return 1.0; }
};

const NoiseSchedule& default_schedule();

/// Convenience wrapper over default_schedule().at(t).
ScheduleValues noise_schedule(double t, bool with_drift = true);

/// alpha_t z0 + beta_t noise.
VectorXd forward_perturb(const Eigen::Ref<const VectorXd>& z0, double t,
                         const Eigen::Ref<const VectorXd>& noise,
                         const NoiseSchedule& schedule = default_schedule());

enum class ReverseMode { sde, ode };

struct ReverseIntegratorConfig {
  int n_steps = 100;
  double t_start = 1.0 - 1e-3;
  double t_end = 1e-3;
  ReverseMode mode = ReverseMode::sde;

  /// Throws ConfigError unless 0 < t_end < t_start < 1 and n_steps >= 1.
  void validate() const;
};

/// Score evaluator frozen at one pseudo-time. Implementations hold the
/// per-step caches (factorizations shared by all ensemble members) and must
/// be safe to call concurrently.
class ScoreStep {
 public:
  virtual ~ScoreStep() = default;
  virtual void eval(const Eigen::Ref<const VectorXd>& z, Eigen::Ref<VectorXd> out) const = 0;
};

/// Time-dependent score field S(z, t).
class ScoreField {
 public:
  virtual ~ScoreField() = default;
  virtual Eigen::Index dim() const = 0;
  virtual std::unique_ptr<const ScoreStep> prepare(double t) const = 0;
};

using ScoreFn = std::function<VectorXd(const VectorXd&, double)>;

/// Adapts a plain callable to the ScoreField interface.
class FunctionScoreField final : public ScoreField {
 public:
  FunctionScoreField(ScoreFn fn, Eigen::Index dim) : fn_(std::move(fn)), dim_(dim) {}
  Eigen::Index dim() const override { return dim_; }
  std::unique_ptr<const ScoreStep> prepare(double t) const override;

 private:
  ScoreFn fn_;
  Eigen::Index dim_;
};

/// Draws K samples by integrating the reverse-time SDE (Euler-Maruyama) or
/// the probability-flow ODE from t_start down to t_end on a uniform grid,
/// starting from standard normal terminal states.
///
/// Member k consumes only the substream key.derive(k), so the output does not
/// depend on `exec` or on the number of threads.
Ensemble sample_reverse(const ScoreField& score, Eigen::Index n_samples,
                        const ReverseIntegratorConfig& cfg, RngKey key,
                        Exec exec = Exec::parallel,
                        const NoiseSchedule& schedule = default_schedule());

Ensemble sample_reverse(const ScoreFn& score, Eigen::Index n_samples, Eigen::Index dim,
                        const ReverseIntegratorConfig& cfg, RngKey key,
                        Exec exec = Exec::parallel,
                        const NoiseSchedule& schedule = default_schedule());

}  // namespace scoreda
