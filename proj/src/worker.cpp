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

#include "flecs/worker.hpp"

#include <utility>

namespace flecs {

WorkerState make_worker(int id, Shard shard, std::uint64_t global_seed) {
  WorkerState state;
  state.id = id;
  state.h = Vector::Zero(dim(shard));
  state.shard = std::move(shard);
  state.global_seed = global_seed;
  return state;
}

UplinkMessage worker_round(WorkerState& state, const Vector& w,
                           const Matrix& bs, const Matrix& sketch, long round,
                           double gamma, const CompressorSpec& grad_spec,
                           const CompressorSpec& hess_spec,
                           const BatchSpec& batch) {
  const int d = dim(state.shard);
  if (w.size() != d || state.h.size() != d) {
    throw DimensionError("worker_round: iterate dimension mismatch");
  }
  if (sketch.rows() != d || bs.rows() != d || bs.cols() != sketch.cols()) {
    throw DimensionError("worker_round: sketch/BS shape mismatch");
  }

  rng::Stream grad_batch_stream = rng::worker_stream(
      state.global_seed, state.id, round, rng::Purpose::kGradBatch);
  const Vector g = gradient(state.shard, w, batch, grad_batch_stream);
  ensure_finite(g, "worker gradient");

  rng::Stream hess_batch_stream = rng::worker_stream(
      state.global_seed, state.id, round, rng::Purpose::kHessBatch);
  const Matrix y =
      hessian_sketch(state.shard, w, sketch, batch, hess_batch_stream);
  ensure_finite(y, "worker hessian sketch");

  UplinkMessage msg;
  msg.m_small = sketch.transpose() * y;

  rng::Stream grad_q_stream = rng::worker_stream(
      state.global_seed, state.id, round, rng::Purpose::kGradCompress);
  msg.c = compress_vector(g - state.h, grad_spec, grad_q_stream);

  rng::Stream hess_q_stream = rng::worker_stream(
      state.global_seed, state.id, round, rng::Purpose::kHessCompress);
  msg.big_c = compress_matrix(y - bs, hess_spec, hess_q_stream);

  state.h += gamma * msg.c.value;

  msg.bits = msg.c.bits + msg.big_c.bits +
             32ll * msg.m_small.rows() * msg.m_small.cols();
  return msg;
}

}  // namespace flecs
