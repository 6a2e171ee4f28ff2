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

#include "flecs/compress.hpp"

#include <bit>
#include <cmath>
#include <cstdint>

namespace flecs {

namespace {

void validate(const CompressorSpec& spec) {
  if (spec.levels < 1) throw ConfigError("compressor levels must be >= 1");
  if (spec.float_bits < 1) throw ConfigError("float_bits must be >= 1");
}

}  // namespace

int level_bits(int levels) {
  // ceil(log2(levels + 1)) == bit_width(levels) for levels >= 1.
  return std::bit_width(static_cast<std::uint64_t>(levels));
}

CompressedVector compress_vector(const Vector& x, const CompressorSpec& spec,
                                 rng::Stream& stream) {
  validate(spec);
  ensure_finite(x, "compress_vector");
  const Eigen::Index d = x.size();
  CompressedVector out;

  if (spec.kind == CompressorKind::kIdentity) {
    out.value = x;
    out.bits = static_cast<std::int64_t>(spec.float_bits) * d;
    out.norm = 0.0;
    return out;
  }

  const double s = static_cast<double>(spec.levels);
  const double ell = spec.norm == NormOrder::kL2
                         ? x.norm()
                         : x.lpNorm<Eigen::Infinity>();
  const int per_coord = 1 + level_bits(spec.levels);  // sign + level
  out.norm = ell;
  out.value = Vector::Zero(d);
  out.bits = spec.float_bits + static_cast<std::int64_t>(d) * per_coord;
  if (ell == 0.0) {
    return out;  // all-zero payload, deterministic
  }
  for (Eigen::Index i = 0; i < d; ++i) {
    const double mag = std::abs(x[i]);
    const double u = s * mag / ell;
    const double lo = std::floor(u);
    const double frac = u - lo;
    double level = lo;
    if (stream.uniform01() < frac) level += 1.0;
    // With the infinity norm u <= s, so levels stay in range. With the L2
    // norm a coordinate can exceed the top level; it is then sent verbatim
    // as one full float instead of sign + level bits.
    if (level > s) {
      out.value[i] = x[i];
      out.bits += spec.float_bits - per_coord;
      continue;
    }
    const double sign = x[i] < 0.0 ? -1.0 : 1.0;
    out.value[i] = sign * ell * level / s;
  }
  return out;
}

CompressedMatrix compress_matrix(const Matrix& a, const CompressorSpec& spec,
                                 rng::Stream& stream) {
  CompressedMatrix out;
  out.value.resize(a.rows(), a.cols());
  out.bits = 0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    const CompressedVector col = compress_vector(a.col(j), spec, stream);
    out.value.col(j) = col.value;
    out.bits += col.bits;
  }
  return out;
}

double estimate_omega_q(const CompressorSpec& spec, int dim, int trials,
                        rng::Stream& stream) {
  validate(spec);
  if (dim < 1) throw ConfigError("estimate_omega_q: dim must be >= 1");
  if (trials < 1) throw ConfigError("estimate_omega_q: trials must be >= 1");
  constexpr int kProbes = 8;
  double worst = 0.0;
  for (int probe = 0; probe < kProbes; ++probe) {
    Vector x(dim);
    for (int i = 0; i < dim; ++i) x[i] = stream.gaussian();
    const double nrm = x.norm();
    if (nrm == 0.0) continue;
    x /= nrm;
    double second_moment = 0.0;
    for (int t = 0; t < trials; ++t) {
      second_moment += compress_vector(x, spec, stream).value.squaredNorm();
    }
    second_moment /= static_cast<double>(trials);
    worst = std::max(worst, second_moment - 1.0);
  }
  return worst;
}

}  // namespace flecs
