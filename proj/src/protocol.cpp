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

#include "flecs/protocol.hpp"

#include <cmath>
#include <numeric>
#include <vector>

#include "flecs/rng.hpp"

namespace flecs {

Matrix sample_sketch(const SketchSpec& spec, int d, long round) {
  if (spec.m < 1) throw ConfigError("sketch width m must be >= 1");
  if (spec.m > d) throw DimensionError("sketch width m exceeds dimension d");
  rng::Stream stream =
      rng::global_stream(spec.global_seed, round, rng::Purpose::kSketch);
  Matrix s = Matrix::Zero(d, spec.m);
  if (spec.kind == SketchKind::kGaussian) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(spec.m));
    for (int j = 0; j < spec.m; ++j) {
      for (int i = 0; i < d; ++i) {
        s(i, j) = scale * stream.gaussian();
      }
    }
    return s;
  }
  // Coordinate sketch: m distinct basis vectors via partial Fisher-Yates.
  std::vector<int> pool(static_cast<std::size_t>(d));
  std::iota(pool.begin(), pool.end(), 0);
  for (int t = 0; t < spec.m; ++t) {
    const auto j =
        t + static_cast<int>(stream.below(static_cast<std::uint64_t>(d - t)));
    std::swap(pool[static_cast<std::size_t>(t)],
              pool[static_cast<std::size_t>(j)]);
    s(pool[static_cast<std::size_t>(t)], t) = 1.0;
  }
  return s;
}

std::int64_t vector_payload_bits(int d, const CompressorSpec& spec) {
  if (d < 1) throw ConfigError("vector_payload_bits: d must be >= 1");
  if (spec.kind == CompressorKind::kIdentity) {
    return static_cast<std::int64_t>(spec.float_bits) * d;
  }
  return spec.float_bits +
         static_cast<std::int64_t>(d) * (1 + level_bits(spec.levels));
}

std::int64_t uplink_bits(int d, int m, const CompressorSpec& grad_spec,
                         const CompressorSpec& hess_spec) {
  if (m < 1) throw ConfigError("uplink_bits: m must be >= 1");
  return vector_payload_bits(d, grad_spec) +
         static_cast<std::int64_t>(m) * vector_payload_bits(d, hess_spec) +
         32ll * m * m;
}

std::int64_t downlink_bits(int d, int m) {
  if (d < 1 || m < 1) throw ConfigError("downlink_bits: d, m must be >= 1");
  return 32ll * d + 32ll * d * m;
}

}  // namespace flecs
