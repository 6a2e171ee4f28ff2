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

#ifndef FLECS_COMPRESS_HPP_
#define FLECS_COMPRESS_HPP_

#include <cstdint>

#include "flecs/linalg.hpp"
#include "flecs/rng.hpp"

namespace flecs {

enum class CompressorKind { kIdentity, kRandomDithering };
enum class NormOrder { kL2, kLInf };

// Unbiased vector compressor description. Random dithering quantizes each
// coordinate to one of `levels` + 1 multiples of norm/levels with a random
// round, so the expectation equals the input exactly.
struct CompressorSpec {
  CompressorKind kind = CompressorKind::kRandomDithering;
  int levels = 64;                     // quantization levels s >= 1
  NormOrder norm = NormOrder::kLInf;   // norm used to scale coordinates
  int float_bits = 32;                 // wire width of one float scalar
};

// Bits needed for one quantized coordinate magnitude: ceil(log2(levels + 1)).
int level_bits(int levels);

// Result of compressing a vector. `value` is the dequantized payload the
// receiver reconstructs; `bits` is the exact wire cost under a fixed-width
// encoding (norm scalar + sign and level per coordinate; with the L2 norm,
// coordinates whose level overflows `levels` escape to a full float).
struct CompressedVector {
  Vector value;
  std::int64_t bits = 0;
  double norm = 0.0;
};

// Column-wise compression of a matrix; bits are summed over columns.
struct CompressedMatrix {
  Matrix value;
  std::int64_t bits = 0;
};

CompressedVector compress_vector(const Vector& x, const CompressorSpec& spec,
                                 rng::Stream& stream);
CompressedMatrix compress_matrix(const Matrix& a, const CompressorSpec& spec,
                                 rng::Stream& stream);

// Empirical variance-parameter estimate: max over random unit probes of
// (mean ||Q(x)||^2 over `trials` draws) - 1. Identity gives exactly 0.
// Callers should use trials >= 1e4 for a stable estimate.
double estimate_omega_q(const CompressorSpec& spec, int dim, int trials,
                        rng::Stream& stream);

}  // namespace flecs

#endif  // FLECS_COMPRESS_HPP_
