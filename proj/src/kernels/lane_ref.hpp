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

// Per-lane reference implementation of the scalar rollout step. Used by the
// scalar kernel for all lanes and by the AVX2 kernel for remainder lanes, so
// it is the single definition of the step arithmetic. Operation order and
// min/max tie semantics deliberately mirror the vector instructions
// (vminpd/vmaxpd return the second operand on ties).

#pragma once

#include "unpred/kernels/rollout_kernels.hpp"
#include "unpred/rng.hpp"

namespace unpred::kernels::detail {

inline double tie_min(double a, double b) { return a < b ? a : b; }
inline double tie_max(double a, double b) { return a > b ? a : b; }

inline void rollout_lanes_ref(const ScalarRolloutPlan& p, double x0,
                              std::uint64_t seed, std::uint64_t stream0,
                              ScalarRolloutBatch& out, int lane_begin,
                              int lane_end) {
  const int L = out.lanes;
  for (int r = lane_begin; r < lane_end; ++r) out.x[r] = x0;
  for (int k = 0; k < p.steps; ++k) {
    const double a = p.a[k];
    const double b = p.b[k];
    const double g = p.g[k];
    const double m = p.m[k];
    const double db = p.delta_bound[k];
    const double mb = p.mu_bar[k];
    const double nmb = -mb;
    const double* xk = out.x + static_cast<std::size_t>(k) * L;
    double* xn = out.x + static_cast<std::size_t>(k + 1) * L;
    double* mu = out.mu + static_cast<std::size_t>(k) * L;
    double* de = out.delta + static_cast<std::size_t>(k) * L;
    double* uu = out.u + static_cast<std::size_t>(k) * L;
    for (int r = lane_begin; r < lane_end; ++r) {
      double d = 0.0;
      if (db > 0.0) {
        d = db * signed_unit_from_bits(random_bits64(
                     seed, stream0 + static_cast<std::uint64_t>(r),
                     static_cast<std::uint64_t>(k)));
      }
      const double mraw = m - g * xk[r];
      const double mc = tie_min(tie_max(mraw, nmb), mb);
      const double u = mc + d;
      mu[r] = mc;
      de[r] = d;
      uu[r] = u;
      xn[r] = a * xk[r] + b * u;
    }
  }
}

inline void uniform_lanes_ref(std::uint64_t seed, std::uint64_t stream,
                              std::uint64_t index0, double bound, int begin,
                              int end, double* out) {
  if (!(bound > 0.0)) {
    for (int i = begin; i < end; ++i) out[i] = 0.0;
    return;
  }
  for (int i = begin; i < end; ++i) {
    out[i] = bound * signed_unit_from_bits(random_bits64(
                 seed, stream, index0 + static_cast<std::uint64_t>(i)));
  }
}

}  // namespace unpred::kernels::detail
