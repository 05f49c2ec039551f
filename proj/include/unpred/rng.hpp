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

// Counter-based random numbers (Philox4x32-10, Salmon et al. 2011).
//
// Every draw is a pure function of (seed, stream, index), which is what makes
// rollouts replayable, parallelizable across lanes, and independent of
// evaluation order. This header is deliberately Eigen-free so the SIMD kernel
// translation units can include it.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace unpred {

struct Philox4x32 {
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;  // golden ratio
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;  // sqrt(3) - 1

  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                            std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
      const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
      const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    return ctr;
  }
};

// 64 random bits for draw `index` of stream `stream` under `seed`.
inline std::uint64_t random_bits64(std::uint64_t seed, std::uint64_t stream,
                                   std::uint64_t index) {
  const std::array<std::uint32_t, 4> ctr = {
      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
      static_cast<std::uint32_t>(stream),
      static_cast<std::uint32_t>(stream >> 32)};
  const std::array<std::uint32_t, 2> key = {
      static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  const auto out = Philox4x32::block(ctr, key);
  return std::uint64_t{out[0]} | (std::uint64_t{out[1]} << 32);
}

// Map 64 random bits to a double in [0, 1) using the top 52 bits. The u64 ->
// double conversion is exact (value < 2^52), so the AVX2 kernels can
// reproduce it bit for bit with the 2^52 magic-number trick.
inline double unit_from_bits(std::uint64_t bits) {
  return static_cast<double>(bits >> 12) * 0x1.0p-52;
}

// Same bits mapped to [-1, 1).
inline double signed_unit_from_bits(std::uint64_t bits) {
  return 2.0 * unit_from_bits(bits) - 1.0;
}

// Stream-id tag for attacker measurement noise, so adversary draws can never
// collide with rollout perturbation streams for the same run index.
inline constexpr std::uint64_t kAttackerStreamTag = std::uint64_t{1} << 62;
// Tag for auxiliary draws (scenario randomization in tests, etc.).
inline constexpr std::uint64_t kAuxStreamTag = std::uint64_t{1} << 61;

// Sequential view of one stream. Cheap to create; holds no table state.
class DrawStream {
 public:
  DrawStream(std::uint64_t seed, std::uint64_t stream)
      : seed_(seed), stream_(stream) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }
  std::uint64_t next_index() const { return index_; }

  std::uint64_t take_bits() { return random_bits64(seed_, stream_, index_++); }

  double uniform01() { return unit_from_bits(take_bits()); }

  // Uniform on [-1, 1).
  double signed_unit() { return signed_unit_from_bits(take_bits()); }

  // Standard normal via Box-Muller; always consumes exactly two indices.
  double normal() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log1p(-u1));
    return r * std::cos(6.283185307179586476925286766559 * u2);
  }

  void skip(std::uint64_t count) { index_ += count; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t index_ = 0;
};

// Root of all randomness for a batch of experiments: one master seed, one
// stream per rollout, a tagged stream per attacker run.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t master_seed) : seed_(master_seed) {}

  std::uint64_t master_seed() const { return seed_; }

  DrawStream rollout_stream(std::uint64_t run) const {
    return DrawStream(seed_, run);
  }
  DrawStream attacker_stream(std::uint64_t run) const {
    return DrawStream(seed_, kAttackerStreamTag | run);
  }
  DrawStream aux_stream(std::uint64_t id) const {
    return DrawStream(seed_, kAuxStreamTag | id);
  }

 private:
  std::uint64_t seed_;
};

}  // namespace unpred
