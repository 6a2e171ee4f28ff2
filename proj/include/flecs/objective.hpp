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

#ifndef FLECS_OBJECTIVE_HPP_
#define FLECS_OBJECTIVE_HPP_

#include <cstdint>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "flecs/linalg.hpp"
#include "flecs/rng.hpp"

namespace flecs {

// One sparse example with 0-based column indices, strictly ascending.
struct SparseRow {
  std::vector<int> index;
  std::vector<double> value;

  double dot(const Vector& w) const;
  // acc += scale * row (as a dense vector).
  void add_scaled(double scale, Vector& acc) const;
};

// L2-regularized logistic loss over one worker's examples:
//   f(w) = (1/r) sum_j log(1 + exp(-b_j a_j^T w)) + (mu/2) ||w||^2
// with labels b_j in {-1, +1}.
struct LogisticShard {
  std::vector<SparseRow> rows;
  std::vector<double> labels;
  int dim = 0;
  double reg_mu = 0.0;
};

// Quadratic objective f(w) = 0.5 w^T h w + b^T w with h symmetric PSD.
// Gradients and Hessian products are exact; useful for controlled tests.
struct QuadraticShard {
  Matrix h;
  Vector b;
};

using Shard = std::variant<LogisticShard, QuadraticShard>;

struct BatchSpec {
  enum class Mode { kFull, kMinibatch };
  Mode mode = Mode::kFull;
  int size = 0;  // minibatch size; ignored for full batches
};

int dim(const Shard& shard);
int num_rows(const Shard& shard);

double value(const Shard& shard, const Vector& w);

// Full-batch gradients are deterministic; minibatch gradients draw `size`
// examples uniformly without replacement from `stream` and rescale so the
// estimate is unbiased. The regularizer term mu * w is always exact.
Vector gradient(const Shard& shard, const Vector& w, const BatchSpec& batch,
                rng::Stream& stream);

// Hessian-vector products against each column of s (d x m), assembled
// column by column; the d x d Hessian is never materialized. Minibatch
// sampling follows the same contract as gradient().
Matrix hessian_sketch(const Shard& shard, const Vector& w, const Matrix& s,
                      const BatchSpec& batch, rng::Stream& stream);

// Exact full-data objective and gradient averaged over shards. Metrics
// only; never part of the training path.
std::pair<double, Vector> global_value_and_grad(std::span<const Shard> shards,
                                                const Vector& w);

}  // namespace flecs

#endif  // FLECS_OBJECTIVE_HPP_
