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

#include "flecs/objective.hpp"

#include <cmath>
#include <cstddef>
#include <numeric>

namespace flecs {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(-z)) without overflow for large |z|.
double softplus_neg(double z) {
  return std::max(0.0, -z) + std::log1p(std::exp(-std::abs(z)));
}

void check_dim(int want, Eigen::Index got, const char* what) {
  if (static_cast<Eigen::Index>(want) != got) {
    throw DimensionError(std::string(what) + ": dimension mismatch");
  }
}

// Row indices selected by a batch spec, plus the 1/batch scaling factor.
// Full batches select everything; minibatches sample uniformly without
// replacement via a partial Fisher-Yates shuffle.
std::pair<std::vector<int>, double> select_rows(int r, const BatchSpec& batch,
                                                rng::Stream& stream) {
  if (batch.mode == BatchSpec::Mode::kFull) {
    std::vector<int> all(static_cast<std::size_t>(r));
    std::iota(all.begin(), all.end(), 0);
    return {std::move(all), 1.0 / static_cast<double>(r)};
  }
  if (batch.size < 1 || batch.size > r) {
    throw ConfigError("minibatch size must lie in [1, shard rows]");
  }
  std::vector<int> pool(static_cast<std::size_t>(r));
  std::iota(pool.begin(), pool.end(), 0);
  for (int t = 0; t < batch.size; ++t) {
    const auto j =
        t + static_cast<int>(stream.below(static_cast<std::uint64_t>(r - t)));
    std::swap(pool[static_cast<std::size_t>(t)],
              pool[static_cast<std::size_t>(j)]);
  }
  pool.resize(static_cast<std::size_t>(batch.size));
  return {std::move(pool), 1.0 / static_cast<double>(batch.size)};
}

}  // namespace

double SparseRow::dot(const Vector& w) const {
  double acc = 0.0;
  for (std::size_t t = 0; t < index.size(); ++t) {
    acc += value[t] * w[index[t]];
  }
  return acc;
}

void SparseRow::add_scaled(double scale, Vector& acc) const {
  for (std::size_t t = 0; t < index.size(); ++t) {
    acc[index[t]] += scale * value[t];
  }
}

int dim(const Shard& shard) {
  if (const auto* log = std::get_if<LogisticShard>(&shard)) return log->dim;
  return static_cast<int>(std::get<QuadraticShard>(shard).h.rows());
}

int num_rows(const Shard& shard) {
  if (const auto* log = std::get_if<LogisticShard>(&shard)) {
    return static_cast<int>(log->rows.size());
  }
  return 1;  // a quadratic acts as a single exact "example"
}

double value(const Shard& shard, const Vector& w) {
  if (const auto* log = std::get_if<LogisticShard>(&shard)) {
    check_dim(log->dim, w.size(), "value");
    double loss = 0.0;
    for (std::size_t j = 0; j < log->rows.size(); ++j) {
      loss += softplus_neg(log->labels[j] * log->rows[j].dot(w));
    }
    loss /= static_cast<double>(log->rows.size());
    return loss + 0.5 * log->reg_mu * w.squaredNorm();
  }
  const auto& quad = std::get<QuadraticShard>(shard);
  check_dim(static_cast<int>(quad.h.rows()), w.size(), "value");
  return 0.5 * w.dot(quad.h * w) + quad.b.dot(w);
}

Vector gradient(const Shard& shard, const Vector& w, const BatchSpec& batch,
                rng::Stream& stream) {
  if (const auto* log = std::get_if<LogisticShard>(&shard)) {
    check_dim(log->dim, w.size(), "gradient");
    const auto [picked, scale] =
        select_rows(static_cast<int>(log->rows.size()), batch, stream);
    Vector g = Vector::Zero(w.size());
    for (const int j : picked) {
      const double b = log->labels[static_cast<std::size_t>(j)];
      const double z = b * log->rows[static_cast<std::size_t>(j)].dot(w);
      // d/dw log(1 + exp(-z)) = -b (1 - sigmoid(z)) a
      const double coeff = -b * (1.0 - sigmoid(z)) * scale;
      log->rows[static_cast<std::size_t>(j)].add_scaled(coeff, g);
    }
    g += log->reg_mu * w;
    return g;
  }
  const auto& quad = std::get<QuadraticShard>(shard);
  check_dim(static_cast<int>(quad.h.rows()), w.size(), "gradient");
  return quad.h * w + quad.b;
}

Matrix hessian_sketch(const Shard& shard, const Vector& w, const Matrix& s,
                      const BatchSpec& batch, rng::Stream& stream) {
  if (const auto* log = std::get_if<LogisticShard>(&shard)) {
    check_dim(log->dim, w.size(), "hessian_sketch");
    check_dim(log->dim, s.rows(), "hessian_sketch");
    const auto [picked, scale] =
        select_rows(static_cast<int>(log->rows.size()), batch, stream);
    Matrix y = Matrix::Zero(s.rows(), s.cols());
    for (const int j : picked) {
      const auto& row = log->rows[static_cast<std::size_t>(j)];
      const double b = log->labels[static_cast<std::size_t>(j)];
      const double sig = sigmoid(b * row.dot(w));
      const double curv = sig * (1.0 - sig) * scale;  // b^2 == 1
      for (Eigen::Index c = 0; c < s.cols(); ++c) {
        const double coeff = curv * row.dot(s.col(c));
        for (std::size_t t = 0; t < row.index.size(); ++t) {
          y(row.index[t], c) += coeff * row.value[t];
        }
      }
    }
    y += log->reg_mu * s;
    return y;
  }
  const auto& quad = std::get<QuadraticShard>(shard);
  check_dim(static_cast<int>(quad.h.rows()), w.size(), "hessian_sketch");
  check_dim(static_cast<int>(quad.h.rows()), s.rows(), "hessian_sketch");
  return quad.h * s;
}

std::pair<double, Vector> global_value_and_grad(std::span<const Shard> shards,
                                                const Vector& w) {
  if (shards.empty()) {
    throw ConfigError("global_value_and_grad: empty shard list");
  }
  double f = 0.0;
  Vector g = Vector::Zero(w.size());
  rng::Stream unused(0);  // full-batch path never draws from it
  const BatchSpec full;
  for (const Shard& shard : shards) {
    f += value(shard, w);
    g += gradient(shard, w, full, unused);
  }
  const double inv_n = 1.0 / static_cast<double>(shards.size());
  return {f * inv_n, g * inv_n};
}

}  // namespace flecs
