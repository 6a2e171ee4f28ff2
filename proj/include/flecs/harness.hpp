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

#ifndef FLECS_HARNESS_HPP_
#define FLECS_HARNESS_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "flecs/dataio.hpp"
#include "flecs/server.hpp"
#include "flecs/worker.hpp"

namespace flecs {

// Everything a run needs, parseable from flat "key = value" text and
// serializable back without loss. See README for the key reference.
struct RunConfig {
  // Data source: exactly one of dataset_path / synthetic must be set.
  std::string dataset_path;
  std::string synthetic;  // e.g. "logistic:d=50,rows=2000,nnz=0"
  int n_workers = 4;
  PartitionMode partition_mode = PartitionMode::kContiguous;
  double reg_mu = 1e-3;

  SketchKind sketch_kind = SketchKind::kGaussian;
  int m = 1;

  CompressorSpec grad_spec;
  CompressorSpec hess_spec;

  HessianUpdate hessian_update = HessianUpdate::kLsr1;
  Lsr1Middle lsr1_middle = Lsr1Middle::kStandard;
  DirectionMethod direction = DirectionMethod::kFedsonia;

  double alpha = 1.0;
  double gamma = 1.0;
  double beta = 1.0;
  double rho = 0.0;      // effective value; 1/Omega_trunc unless rho_set
  bool rho_set = false;
  double omega_trunc = 1e-5;
  double big_omega_trunc = 1e8;

  BatchSpec batch;
  long rounds = 100;
  std::uint64_t global_seed = 0;
  int threads = 1;
  bool timing = false;  // emit measured ms instead of deterministic zeros

  double effective_rho() const {
    return rho_set ? rho : 1.0 / big_omega_trunc;
  }
};

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);
std::string to_config_text(const RunConfig& cfg);

// One trace row per round. Row k describes the state *after* k rounds; row
// 0 is a pure evaluation of w_0 with zero communication. Bits columns are
// cumulative per node (max over workers where counts could differ).
struct TraceRow {
  long k = 0;
  double objective = 0.0;
  double grad_sq_norm = 0.0;
  std::int64_t uplink_bits = 0;
  std::int64_t downlink_bits = 0;
  double ms = 0.0;
};

std::vector<TraceRow> run(const RunConfig& cfg);

// Loads (or generates) the configured dataset and partitions it exactly the
// way run() does; exposed for diagnostics that probe the same shards.
std::vector<Shard> make_shards(const RunConfig& cfg);

struct VariantTrace {
  std::string name;
  std::vector<TraceRow> rows;
};

// Runs each named variant from the same config and seed. Supported names:
// "cgd" (the config as given) and "flecs" (gradients sent uncompressed).
std::vector<VariantTrace> compare(const RunConfig& cfg,
                                  const std::vector<std::string>& variants);

// CSV writers; column order is fixed. with_timing=false writes ms as 0 so
// repeated runs are byte-identical.
void write_csv(std::ostream& out, const std::vector<TraceRow>& rows,
               bool with_timing);
void write_compare_csv(std::ostream& out,
                       const std::vector<VariantTrace>& traces,
                       bool with_timing);

}  // namespace flecs

#endif  // FLECS_HARNESS_HPP_
