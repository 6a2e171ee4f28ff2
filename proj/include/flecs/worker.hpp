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

#ifndef FLECS_WORKER_HPP_
#define FLECS_WORKER_HPP_

#include <cstdint>

#include "flecs/objective.hpp"
#include "flecs/protocol.hpp"

namespace flecs {

// Per-worker persistent state. h is the gradient error-feedback reference;
// it starts at zero and the server maintains a bit-identical shadow copy.
// Streams are re-derived from (global_seed, id, round, purpose) each round,
// so a WorkerState carries no generator objects.
struct WorkerState {
  int id = 0;
  Vector h;
  Shard shard;
  std::uint64_t global_seed = 0;
};

WorkerState make_worker(int id, Shard shard, std::uint64_t global_seed);

// One local round: evaluate the (mini)batch gradient g and Hessian sketch
// Y = H S at w, form the small matrix S^T Y, compress the differences
// g - h and Y - bs, then advance h by gamma times the compressed gradient
// difference. bs is the product B S received on the previous downlink.
UplinkMessage worker_round(WorkerState& state, const Vector& w,
                           const Matrix& bs, const Matrix& sketch, long round,
                           double gamma, const CompressorSpec& grad_spec,
                           const CompressorSpec& hess_spec,
                           const BatchSpec& batch);

}  // namespace flecs

#endif  // FLECS_WORKER_HPP_
