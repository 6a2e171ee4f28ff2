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

#ifndef FLECS_PROTOCOL_HPP_
#define FLECS_PROTOCOL_HPP_

#include <cstdint>

#include "flecs/compress.hpp"
#include "flecs/linalg.hpp"

namespace flecs {

enum class SketchKind { kGaussian, kCoordinate };

// Shared-seed sketch description. Server and workers each call
// sample_sketch(spec, d, k) and obtain bit-identical d x m matrices, so the
// sketch itself never travels over the wire.
struct SketchSpec {
  SketchKind kind = SketchKind::kGaussian;
  int m = 1;
  std::uint64_t global_seed = 0;
};

// Gaussian: i.i.d. N(0, 1/m) entries. Coordinate: m distinct standard basis
// columns chosen uniformly. Deterministic in (global_seed, round).
Matrix sample_sketch(const SketchSpec& spec, int d, long round);

// Worker -> server payload for one round: compressed gradient difference c,
// compressed Hessian-sketch difference big_c, and the small uncompressed
// m x m matrix m_small = S^T Y. bits = c.bits + big_c.bits + 32 m^2.
struct UplinkMessage {
  CompressedVector c;
  CompressedMatrix big_c;
  Matrix m_small;
  std::int64_t bits = 0;
};

// Server -> worker payload: new iterate and the worker's B * S product
// (the worker never holds B itself). bits = 32 d + 32 d m.
struct DownlinkMessage {
  Vector w;
  Matrix bs;
  std::int64_t bits = 0;
};

// Closed-form wire cost of one compressed d-vector (no escape overflow).
std::int64_t vector_payload_bits(int d, const CompressorSpec& spec);

// Closed-form per-round, per-worker costs under the fixed-width bit model.
std::int64_t uplink_bits(int d, int m, const CompressorSpec& grad_spec,
                         const CompressorSpec& hess_spec);
std::int64_t downlink_bits(int d, int m);

}  // namespace flecs

#endif  // FLECS_PROTOCOL_HPP_
