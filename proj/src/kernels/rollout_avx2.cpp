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

// AVX2 variants: 4 rollout lanes (or 4 uniform draws) per vector. Compiled
// with -mavx2 only; no FMA intrinsics anywhere, so results stay bit-identical
// to the scalar reference kernel.

#include "unpred/kernels/rollout_kernels.hpp"

#if defined(__AVX2__)

#include <immintrin.h>

#include <cstdint>

#include "lane_ref.hpp"
#include "unpred/rng.hpp"

namespace unpred::kernels {

namespace {

inline __m256i bcast_u32(std::uint32_t v) {
  return _mm256_set1_epi64x(static_cast<long long>(v));
}

// Four Philox4x32-10 blocks in parallel. Each 64-bit slot carries one 32-bit
// counter/key word (high halves zero, so vpmuludq sees clean operands).
inline __m256i philox_bits64(__m256i c0, __m256i c1, __m256i c2, __m256i c3,
                             __m256i k0, __m256i k1) {
  const __m256i mul0 = bcast_u32(Philox4x32::kMul0);
  const __m256i mul1 = bcast_u32(Philox4x32::kMul1);
  const __m256i weyl0 = bcast_u32(Philox4x32::kWeyl0);
  const __m256i weyl1 = bcast_u32(Philox4x32::kWeyl1);
  const __m256i mask32 = _mm256_set1_epi64x(0xffffffffLL);
  for (int round = 0; round < 10; ++round) {
    const __m256i p0 = _mm256_mul_epu32(c0, mul0);
    const __m256i p1 = _mm256_mul_epu32(c2, mul1);
    const __m256i hi0 = _mm256_srli_epi64(p0, 32);
    const __m256i lo0 = _mm256_and_si256(p0, mask32);
    const __m256i hi1 = _mm256_srli_epi64(p1, 32);
    const __m256i lo1 = _mm256_and_si256(p1, mask32);
    c0 = _mm256_xor_si256(_mm256_xor_si256(hi1, c1), k0);
    c1 = lo1;
    c2 = _mm256_xor_si256(_mm256_xor_si256(hi0, c3), k1);
    c3 = lo0;
    // Keys live in the low 32-bit lane of each slot; epi32 add keeps the
    // bump mod 2^32 without carrying into the slot's high half.
    k0 = _mm256_add_epi32(k0, weyl0);
    k1 = _mm256_add_epi32(k1, weyl1);
  }
  return _mm256_or_si256(c0, _mm256_slli_epi64(c1, 32));
}

// (bits >> 12) * 2^-52 on each lane, exactly as the scalar path: the OR with
// the 2^52 exponent pattern followed by subtracting 2^52 is an exact u64 ->
// f64 conversion for values below 2^52.
inline __m256d signed_unit_vec(__m256i bits) {
  const __m256i z = _mm256_srli_epi64(bits, 12);
  const __m256i expo = _mm256_set1_epi64x(0x4330000000000000LL);
  const __m256d d = _mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(z, expo)),
                                  _mm256_set1_pd(0x1.0p52));
  const __m256d u01 = _mm256_mul_pd(d, _mm256_set1_pd(0x1.0p-52));
  return _mm256_sub_pd(_mm256_mul_pd(u01, _mm256_set1_pd(2.0)),
                       _mm256_set1_pd(1.0));
}

inline std::uint32_t lo32(std::uint64_t v) {
  return static_cast<std::uint32_t>(v);
}
inline std::uint32_t hi32(std::uint64_t v) {
  return static_cast<std::uint32_t>(v >> 32);
}

}  // namespace

void rollout_avx2(const ScalarRolloutPlan& plan, double x0, std::uint64_t seed,
                  std::uint64_t stream0, ScalarRolloutBatch& out) {
  const int L = out.lanes;
  const int L4 = L & ~3;
  const __m256i key0 = bcast_u32(lo32(seed));
  const __m256i key1 = bcast_u32(hi32(seed));

  for (int r = 0; r < L4; r += 4) {
    const std::uint64_t s0 = stream0 + static_cast<std::uint64_t>(r);
    const __m256i c2 = _mm256_set_epi64x(lo32(s0 + 3), lo32(s0 + 2),
                                         lo32(s0 + 1), lo32(s0));
    const __m256i c3 = _mm256_set_epi64x(hi32(s0 + 3), hi32(s0 + 2),
                                         hi32(s0 + 1), hi32(s0));
    __m256d x = _mm256_set1_pd(x0);
    _mm256_storeu_pd(out.x + r, x);

    for (int k = 0; k < plan.steps; ++k) {
      const std::size_t row = static_cast<std::size_t>(k) * L;
      const double db = plan.delta_bound[k];
      __m256d delta = _mm256_setzero_pd();
      if (db > 0.0) {
        const std::uint64_t idx = static_cast<std::uint64_t>(k);
        const __m256i bits = philox_bits64(bcast_u32(lo32(idx)),
                                           bcast_u32(hi32(idx)), c2, c3, key0,
                                           key1);
        delta = _mm256_mul_pd(_mm256_set1_pd(db), signed_unit_vec(bits));
      }
      const __m256d g = _mm256_set1_pd(plan.g[k]);
      const __m256d m = _mm256_set1_pd(plan.m[k]);
      const __m256d mb = _mm256_set1_pd(plan.mu_bar[k]);
      const __m256d nmb = _mm256_set1_pd(-plan.mu_bar[k]);
      const __m256d mraw = _mm256_sub_pd(m, _mm256_mul_pd(g, x));
      const __m256d mu = _mm256_min_pd(_mm256_max_pd(mraw, nmb), mb);
      const __m256d u = _mm256_add_pd(mu, delta);
      const __m256d xn =
          _mm256_add_pd(_mm256_mul_pd(_mm256_set1_pd(plan.a[k]), x),
                        _mm256_mul_pd(_mm256_set1_pd(plan.b[k]), u));
      _mm256_storeu_pd(out.mu + row + r, mu);
      _mm256_storeu_pd(out.delta + row + r, delta);
      _mm256_storeu_pd(out.u + row + r, u);
      _mm256_storeu_pd(out.x + row + L + r, xn);
      x = xn;
    }
  }

  if (L4 < L) {
    detail::rollout_lanes_ref(plan, x0, seed, stream0, out, L4, L);
  }
}

void uniform_avx2(std::uint64_t seed, std::uint64_t stream,
                  std::uint64_t index0, double bound, int count, double* out) {
  if (!(bound > 0.0)) {
    for (int i = 0; i < count; ++i) out[i] = 0.0;
    return;
  }
  const int C4 = count & ~3;
  const __m256i key0 = bcast_u32(lo32(seed));
  const __m256i key1 = bcast_u32(hi32(seed));
  const __m256i c2 = bcast_u32(lo32(stream));
  const __m256i c3 = bcast_u32(hi32(stream));
  const __m256d bv = _mm256_set1_pd(bound);
  for (int i = 0; i < C4; i += 4) {
    const std::uint64_t i0 = index0 + static_cast<std::uint64_t>(i);
    const __m256i c0 = _mm256_set_epi64x(lo32(i0 + 3), lo32(i0 + 2),
                                         lo32(i0 + 1), lo32(i0));
    const __m256i c1 = _mm256_set_epi64x(hi32(i0 + 3), hi32(i0 + 2),
                                         hi32(i0 + 1), hi32(i0));
    const __m256i bits = philox_bits64(c0, c1, c2, c3, key0, key1);
    _mm256_storeu_pd(out + i, _mm256_mul_pd(bv, signed_unit_vec(bits)));
  }
  detail::uniform_lanes_ref(seed, stream, index0, bound, C4, count, out);
}

}  // namespace unpred::kernels

#endif  // __AVX2__
