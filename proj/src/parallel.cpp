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

#include "scoreda/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

namespace scoreda {

int max_threads() { return omp_get_max_threads(); }

void set_max_threads(int n) {
  if (n >= 1) omp_set_num_threads(n);
}

void apply_thread_env() {
  const char* env = std::getenv("DA_THREADS");
  if (env == nullptr) return;
  try {
    set_max_threads(std::stoi(env));
  } catch (const std::exception&) {
    // unparsable value: keep the OpenMP default
  }
}

}  // namespace scoreda
