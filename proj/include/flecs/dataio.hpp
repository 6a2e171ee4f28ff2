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

#ifndef FLECS_DATAIO_HPP_
#define FLECS_DATAIO_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "flecs/objective.hpp"

namespace flecs {

// In-memory dataset: one sparse row + one label in {-1, +1} per example.
// dim is at least the largest feature index of any row.
struct Dataset {
  std::vector<SparseRow> rows;
  std::vector<double> labels;
  int dim = 0;
};

// Reads svmlight/libsvm text: per line "label idx:val idx:val ...", indices
// 1-based and strictly ascending (stored 0-based). Labels {0, 1} are mapped
// to {-1, +1}; labels already in {-1, +1} pass through; anything else is a
// DataError. Blank lines are skipped. dim = largest index seen.
Dataset parse_libsvm(std::istream& in);
Dataset load_libsvm_file(const std::string& path);

// Inverse of parse_libsvm, with enough precision to round-trip doubles.
std::string to_libsvm(const Dataset& data);

enum class PartitionMode { kContiguous, kShuffled };

struct PartitionSpec {
  int n_workers = 1;
  PartitionMode mode = PartitionMode::kContiguous;
  std::uint64_t shuffle_seed = 0;  // used only in shuffled mode
};

// Splits rows into n_workers shards of floor(rows / n) each; the remainder
// goes to the last shard. Shuffled mode permutes rows with a seeded stream
// first. Every shard inherits the dataset dim and the given regularizer.
std::vector<LogisticShard> partition(const Dataset& data,
                                     const PartitionSpec& spec, double reg_mu);

// Seeded synthetic binary classification data from a planted linear model
// plus label noise. nnz == 0 draws dense gaussian features; nnz > 0 sets
// that many random coordinates per row to 1 (one-hot blocks, a9a-like).
Dataset synthetic_logistic(int d, int rows, std::uint64_t seed, int nnz = 0);

}  // namespace flecs

#endif  // FLECS_DATAIO_HPP_
