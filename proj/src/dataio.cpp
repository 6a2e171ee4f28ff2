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

#include "flecs/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <utility>

#include "flecs/errors.hpp"
#include "flecs/rng.hpp"

namespace flecs {

namespace {

[[noreturn]] void parse_fail(int line_no, const std::string& detail) {
  throw DataError("libsvm parse error at line " + std::to_string(line_no) +
                  ": " + detail);
}

// Strict full-token numeric parsing; "1x" or "" are rejected. A leading '+'
// is accepted because libsvm files conventionally write positive labels as
// "+1", which std::from_chars alone would refuse.
bool parse_double_token(const std::string& tok, double& out) {
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (first != last && *first == '+') ++first;
  if (first == last) return false;
  const auto res = std::from_chars(first, last, out);
  return res.ec == std::errc() && res.ptr == last;
}

bool parse_int_token(const std::string& tok, int& out) {
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  const auto res = std::from_chars(first, last, out);
  return res.ec == std::errc() && res.ptr == last;
}

bool is_blank(const std::string& line) {
  return line.find_first_not_of(" \t\r\n") == std::string::npos;
}

}  // namespace

Dataset parse_libsvm(std::istream& in) {
  Dataset data;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    std::istringstream fields(line);
    std::string tok;
    fields >> tok;
    double label = 0.0;
    if (!parse_double_token(tok, label)) {
      parse_fail(line_no, "bad label '" + tok + "'");
    }
    if (label == 0.0) {
      label = -1.0;
    } else if (label != 1.0 && label != -1.0) {
      parse_fail(line_no, "label must be in {0, 1} or {-1, +1}");
    }
    SparseRow row;
    int prev_index = 0;
    while (fields >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos || colon == 0 ||
          colon + 1 == tok.size()) {
        parse_fail(line_no, "expected idx:val, got '" + tok + "'");
      }
      int idx = 0;
      double val = 0.0;
      if (!parse_int_token(tok.substr(0, colon), idx)) {
        parse_fail(line_no, "bad feature index in '" + tok + "'");
      }
      if (!parse_double_token(tok.substr(colon + 1), val)) {
        parse_fail(line_no, "bad feature value in '" + tok + "'");
      }
      if (idx < 1) parse_fail(line_no, "feature indices are 1-based");
      if (idx <= prev_index) {
        parse_fail(line_no, "feature indices must be strictly ascending");
      }
      if (!std::isfinite(val)) parse_fail(line_no, "non-finite feature value");
      row.index.push_back(idx - 1);
      row.value.push_back(val);
      prev_index = idx;
    }
    data.dim = std::max(data.dim, prev_index);
    data.rows.push_back(std::move(row));
    data.labels.push_back(label);
  }
  return data;
}

Dataset load_libsvm_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset file: " + path);
  return parse_libsvm(in);
}

std::string to_libsvm(const Dataset& data) {
  std::string out;
  char buf[64];
  for (std::size_t j = 0; j < data.rows.size(); ++j) {
    out += data.labels[j] > 0.0 ? "+1" : "-1";
    const SparseRow& row = data.rows[j];
    for (std::size_t t = 0; t < row.index.size(); ++t) {
      std::snprintf(buf, sizeof(buf), " %d:%.17g", row.index[t] + 1,
                    row.value[t]);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

std::vector<LogisticShard> partition(const Dataset& data,
                                     const PartitionSpec& spec,
                                     double reg_mu) {
  const int total = static_cast<int>(data.rows.size());
  if (spec.n_workers < 1) throw ConfigError("n_workers must be >= 1");
  if (spec.n_workers > total) {
    throw ConfigError("n_workers exceeds number of rows");
  }
  std::vector<int> order(static_cast<std::size_t>(total));
  std::iota(order.begin(), order.end(), 0);
  if (spec.mode == PartitionMode::kShuffled) {
    rng::Stream stream(spec.shuffle_seed);
    for (int t = total - 1; t > 0; --t) {
      const auto j = static_cast<int>(
          stream.below(static_cast<std::uint64_t>(t) + 1));
      std::swap(order[static_cast<std::size_t>(t)],
                order[static_cast<std::size_t>(j)]);
    }
  }
  const int per_shard = total / spec.n_workers;
  std::vector<LogisticShard> shards;
  shards.reserve(static_cast<std::size_t>(spec.n_workers));
  for (int i = 0; i < spec.n_workers; ++i) {
    const int lo = i * per_shard;
    const int hi = i + 1 == spec.n_workers ? total : lo + per_shard;
    LogisticShard shard;
    shard.dim = data.dim;
    shard.reg_mu = reg_mu;
    shard.rows.reserve(static_cast<std::size_t>(hi - lo));
    shard.labels.reserve(static_cast<std::size_t>(hi - lo));
    for (int t = lo; t < hi; ++t) {
      const int src = order[static_cast<std::size_t>(t)];
      shard.rows.push_back(data.rows[static_cast<std::size_t>(src)]);
      shard.labels.push_back(data.labels[static_cast<std::size_t>(src)]);
    }
    shards.push_back(std::move(shard));
  }
  return shards;
}

Dataset synthetic_logistic(int d, int rows, std::uint64_t seed, int nnz) {
  if (d < 1 || rows < 1) throw ConfigError("synthetic data needs d, rows >= 1");
  if (nnz < 0 || nnz > d) throw ConfigError("synthetic nnz must lie in [0, d]");
  rng::Stream stream = rng::global_stream(seed, 0, rng::Purpose::kSynthetic);
  const int eff_nnz = nnz == 0 ? d : nnz;
  Vector planted(d);
  for (int i = 0; i < d; ++i) {
    planted[i] = stream.gaussian() / std::sqrt(static_cast<double>(eff_nnz));
  }
  Dataset data;
  data.dim = d;
  data.rows.reserve(static_cast<std::size_t>(rows));
  data.labels.reserve(static_cast<std::size_t>(rows));
  std::vector<int> pool(static_cast<std::size_t>(d));
  for (int j = 0; j < rows; ++j) {
    SparseRow row;
    double z = 0.0;
    if (nnz == 0) {
      row.index.resize(static_cast<std::size_t>(d));
      row.value.resize(static_cast<std::size_t>(d));
      for (int i = 0; i < d; ++i) {
        row.index[static_cast<std::size_t>(i)] = i;
        const double x = stream.gaussian();
        row.value[static_cast<std::size_t>(i)] = x;
        z += x * planted[i];
      }
    } else {
      std::iota(pool.begin(), pool.end(), 0);
      for (int t = 0; t < nnz; ++t) {
        const auto pick =
            t + static_cast<int>(stream.below(static_cast<std::uint64_t>(d - t)));
        std::swap(pool[static_cast<std::size_t>(t)],
                  pool[static_cast<std::size_t>(pick)]);
      }
      row.index.assign(pool.begin(), pool.begin() + nnz);
      std::sort(row.index.begin(), row.index.end());
      row.value.assign(static_cast<std::size_t>(nnz), 1.0);
      for (const int idx : row.index) z += planted[idx];
    }
    data.labels.push_back(z + 0.3 * stream.gaussian() >= 0.0 ? 1.0 : -1.0);
    data.rows.push_back(std::move(row));
  }
  return data;
}

}  // namespace flecs
