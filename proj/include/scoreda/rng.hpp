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

#include <cstdint>
#include <initializer_list>
#include <random>

#include <Eigen/Dense>

namespace scoreda {

/// Hierarchical key for deterministic random substreams. Streams are derived
/// from (master seed, labels...) so that results never depend on scheduling.
class RngKey {
 public:
  constexpr explicit RngKey(std::uint64_t seed = 0) : state_(seed) {}

  /// Child key for a labelled sub-task (member index, DA step, repetition...).
  RngKey derive(std::uint64_t label) const;
  RngKey derive(std::initializer_list<std::uint64_t> labels) const;

  std::uint64_t value() const { return state_; }

 private:
  std::uint64_t state_;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

class RngStream {
 public:
  explicit RngStream(RngKey key) : engine_(key.value()) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }

  /// Fills `out` with independent standard normal draws.
  void fill_normal(Eigen::Ref<Eigen::VectorXd> out);
  Eigen::VectorXd normal_vector(Eigen::Index n);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace scoreda
