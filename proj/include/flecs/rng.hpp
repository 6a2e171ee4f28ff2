// Copyright 2026 The flecsim Authors. All Rights Reserved.
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
// =============================================================================

#ifndef FLECS_RNG_HPP_
#define FLECS_RNG_HPP_

#include <cmath>
#include <cstdint>

namespace flecs {
namespace rng {

// splitmix64 mixer (Vigna, public domain). Used both for seeding and for
// combining seed material into stream keys.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Order-sensitive combiner: mix(mix(a, b), c) != mix(mix(a, c), b).
inline std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
  std::uint64_t s = h;
  return splitmix64(s);
}

// Self-contained xoshiro256** generator (Blackman & Vigna, public domain).
// Hand-rolled rather than <random> so that every stream is bit-reproducible
// across standard libraries and platforms.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64(sm);
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; the second value of each pair is cached.
  double gaussian() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    const double u1 = 1.0 - uniform01();  // (0, 1]: keeps log() finite
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(theta);
    has_cached_ = true;
    return r * std::cos(theta);
  }

  // Uniform integer in [0, bound) without modulo bias; bound must be > 0.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % bound;
    }
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
  double cached_ = 0.0;
  bool has_cached_ = false;
};

// Purposes keep the per-round randomness of each consumer statistically
// independent, so e.g. adding draws to the gradient compressor can never
// shift the sketch or the minibatch selection.
enum class Purpose : std::uint64_t {
  kGradBatch = 1,
  kGradCompress = 2,
  kHessBatch = 3,
  kHessCompress = 4,
  kSketch = 5,
  kPartition = 6,
  kSynthetic = 7,
  kProbe = 8,
};

// Stream for (seed, worker, round, purpose). Workers re-derive these each
// round, which makes results independent of scheduling order.
inline Stream worker_stream(std::uint64_t seed, int worker, long round,
                            Purpose purpose) {
  std::uint64_t key = mix(0xF1EC5C6DULL, seed);
  key = mix(key, static_cast<std::uint64_t>(worker) + 1);
  key = mix(key, static_cast<std::uint64_t>(round) + 1);
  key = mix(key, static_cast<std::uint64_t>(purpose));
  return Stream(key);
}

// Stream shared by all parties for a given round (sketches, partitioning).
inline Stream global_stream(std::uint64_t seed, long round, Purpose purpose) {
  return worker_stream(seed, -1, round, purpose);
}

}  // namespace rng
}  // namespace flecs

#endif  // FLECS_RNG_HPP_
