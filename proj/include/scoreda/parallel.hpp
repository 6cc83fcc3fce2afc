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

namespace scoreda {

/// Selects the kernel implementation. `serial` is the reference path used by
/// the tests; `parallel` distributes independent work items (ensemble
/// members, grid cells, local analyses) over OpenMP threads. Both produce
/// bit-identical results.
enum class Exec { serial, parallel };

/// Number of OpenMP threads currently available to parallel kernels.
int max_threads();

/// Caps parallelism. Values < 1 are ignored.
void set_max_threads(int n);

/// Applies the DA_THREADS environment variable if it is set.
void apply_thread_env();

}  // namespace scoreda
