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

#include "scoreda/diffusion.hpp"

#include <cmath>
#include <sstream>
#include <vector>

namespace scoreda {

ScheduleValues NoiseSchedule::at(double t, bool with_drift) const {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw DomainError("noise schedule: t outside [0, 1]");
  }
  ScheduleValues v;
  v.alpha = alpha(t);
  v.beta_sq = beta_sq(t);
  if (with_drift) {
    if (t >= singular_time()) throw DomainError("noise schedule: drift is singular at t = 1");
    v.drift = dlog_alpha(t);
    v.sigma_sq = dbeta_sq(t) - 2.0 * v.drift * v.beta_sq;
  }
  return v;
}

const NoiseSchedule& default_schedule() {
  static const LinearNoiseSchedule schedule;
  return schedule;
}

ScheduleValues noise_schedule(double t, bool with_drift) {
  return default_schedule().at(t, with_drift);
}

VectorXd forward_perturb(const Eigen::Ref<const VectorXd>& z0, double t,
                         const Eigen::Ref<const VectorXd>& noise,
                         const NoiseSchedule& schedule) {
  const auto v = schedule.at(t, false);
  return v.alpha * z0 + std::sqrt(v.beta_sq) * noise;
}

void ReverseIntegratorConfig::validate() const {
  if (n_steps < 1) throw ConfigError("reverse integrator: n_steps must be >= 1");
  if (!(t_end > 0.0 && t_start < 1.0 && t_end < t_start)) {
    throw ConfigError("reverse integrator: need 0 < t_end < t_start < 1");
  }
}

namespace {

class FunctionScoreStep final : public ScoreStep {
 public:
  FunctionScoreStep(const ScoreFn& fn, double t) : fn_(fn), t_(t) {}
  void eval(const Eigen::Ref<const VectorXd>& z, Eigen::Ref<VectorXd> out) const override {
    out = fn_(VectorXd(z), t_);
  }

 private:
  const ScoreFn& fn_;
  double t_;
};

[[noreturn]] void report_nonfinite(Eigen::Index member, double t) {
  std::ostringstream os;
  os << "reverse sampler: non-finite score for member " << member << " at t = " << t;
  throw NumericalError(os.str());
}

}  // namespace

std::unique_ptr<const ScoreStep> FunctionScoreField::prepare(double t) const {
  return std::make_unique<FunctionScoreStep>(fn_, t);
}

Ensemble sample_reverse(const ScoreField& score, Eigen::Index n_samples,
                        const ReverseIntegratorConfig& cfg, RngKey key, Exec exec,
                        const NoiseSchedule& schedule) {
  cfg.validate();
  if (n_samples < 1) throw ConfigError("reverse sampler: need at least one sample");
  const Eigen::Index d = score.dim();
  const Eigen::Index n = n_samples;

  std::vector<RngStream> streams;
  streams.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) streams.emplace_back(key.derive(static_cast<std::uint64_t>(k)));

  Ensemble z(d, n);
  for (Eigen::Index k = 0; k < n; ++k) streams[static_cast<std::size_t>(k)].fill_normal(z.member(k));

  const bool sde = cfg.mode == ReverseMode::sde;
  const double h = (cfg.t_end - cfg.t_start) / static_cast<double>(cfg.n_steps);
  const bool parallel = exec == Exec::parallel;

  for (int step = 0; step < cfg.n_steps; ++step) {
    const double t = cfg.t_start + h * static_cast<double>(step);
    const double t_next = step + 1 == cfg.n_steps ? cfg.t_end : t + h;
    const double dt = t_next - t;  // negative
    const ScheduleValues sv = schedule.at(t);
    const auto step_score = score.prepare(t);
    const double noise_scale = std::sqrt(sv.sigma_sq * -dt);
    const double score_coef = sde ? sv.sigma_sq : 0.5 * sv.sigma_sq;

    Eigen::Index bad_member = -1;
#pragma omp parallel if (parallel)
    {
      VectorXd s(d);
      VectorXd xi(d);
#pragma omp for schedule(static)
      for (Eigen::Index k = 0; k < n; ++k) {
        bool ok = true;
        try {
          step_score->eval(z.member(k), s);
          ok = s.allFinite();
        } catch (const std::exception&) {
          // kernels may throw (softmax underflow, failed factorization)
          ok = false;
        }
        if (!ok) {
#pragma omp critical(scoreda_reverse_bad)
          if (bad_member < 0 || k < bad_member) bad_member = k;
          continue;
        }
        auto zk = z.member(k);
        zk += (sv.drift * zk - score_coef * s) * dt;
        if (sde) {
          streams[static_cast<std::size_t>(k)].fill_normal(xi);
          zk += noise_scale * xi;
        }
      }
    }
    if (bad_member >= 0) report_nonfinite(bad_member, t);
  }
  return z;
}

Ensemble sample_reverse(const ScoreFn& score, Eigen::Index n_samples, Eigen::Index dim,
                        const ReverseIntegratorConfig& cfg, RngKey key, Exec exec,
                        const NoiseSchedule& schedule) {
  const FunctionScoreField field(score, dim);
  return sample_reverse(field, n_samples, cfg, key, exec, schedule);
}

}  // namespace scoreda
