/*
 Copyright 2026 unpred contributors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

     http://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

// Batched closed-loop rollout kernels for scalar (n = m = 1) systems.
//
// Monte Carlo cost estimation and the experiment sweeps run thousands of
// independent rollouts of the same plan; lanes map onto SIMD elements with
// one Philox stream per lane. A scalar reference kernel and an AVX2 kernel
// are selected at runtime and are required to produce bit-identical output
// (enforced by tests); keep any arithmetic change mirrored in both.

#pragma once

#include <cstdint>

namespace unpred::kernels {

// Per-step coefficients of a scalar closed-loop plan:
//   mu    = clamp(m[k] - g[k] * x, -mu_bar[k], +mu_bar[k])
//   delta = delta_bound[k] * U[-1, 1)      (0 when delta_bound[k] == 0)
//   u     = mu + delta
//   x'    = a[k] * x + b[k] * u
// Unconstrained plans use mu_bar = +infinity.
struct ScalarRolloutPlan {
  int steps = 0;
  const double* a = nullptr;
  const double* b = nullptr;
  const double* g = nullptr;
  const double* m = nullptr;
  const double* delta_bound = nullptr;
  const double* mu_bar = nullptr;
};

// Step-major output buffers: element (k, lane) lives at [k * lanes + lane].
// x has steps+1 rows; mu/delta/u have steps rows. Lane `r` draws from Philox
// stream `stream0 + r`, index k.
struct ScalarRolloutBatch {
  int lanes = 0;
  double* x = nullptr;
  double* mu = nullptr;
  double* delta = nullptr;
  double* u = nullptr;
};

using RolloutFn = void (*)(const ScalarRolloutPlan& plan, double x0,
                           std::uint64_t seed, std::uint64_t stream0,
                           ScalarRolloutBatch& out);

// out[i] = bound * U[-1, 1) for draw indices index0 + i of one stream
// (0 when bound == 0).
using UniformFn = void (*)(std::uint64_t seed, std::uint64_t stream,
                           std::uint64_t index0, double bound, int count,
                           double* out);

enum class Backend { Scalar, Avx2 };

struct KernelTable {
  RolloutFn rollout = nullptr;
  UniformFn uniform_block = nullptr;
  const char* name = "";
};

// True when the AVX2 variant was compiled in and the CPU supports it.
bool avx2_available();

// Scalar always works; table(Avx2) falls back to scalar when unavailable.
const KernelTable& table(Backend backend);

// Best backend for this machine, honoring the UNPRED_KERNEL environment
// variable ("scalar" or "avx2"); decided once per process.
const KernelTable& active();

}  // namespace unpred::kernels
