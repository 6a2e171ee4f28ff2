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

#include "flecs/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>
#include <utility>

namespace flecs {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double to_double(const std::string& key, const std::string& val) {
  double out = 0.0;
  const auto res = std::from_chars(val.data(), val.data() + val.size(), out);
  if (res.ec != std::errc() || res.ptr != val.data() + val.size()) {
    throw ConfigError("config key '" + key + "': bad number '" + val + "'");
  }
  return out;
}

long to_long(const std::string& key, const std::string& val) {
  long out = 0;
  const auto res = std::from_chars(val.data(), val.data() + val.size(), out);
  if (res.ec != std::errc() || res.ptr != val.data() + val.size()) {
    throw ConfigError("config key '" + key + "': bad integer '" + val + "'");
  }
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& val) {
  std::uint64_t out = 0;
  const auto res = std::from_chars(val.data(), val.data() + val.size(), out);
  if (res.ec != std::errc() || res.ptr != val.data() + val.size()) {
    throw ConfigError("config key '" + key + "': bad seed '" + val + "'");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& val) {
  if (val == "true" || val == "1") return true;
  if (val == "false" || val == "0") return false;
  throw ConfigError("config key '" + key + "': expected true/false");
}

CompressorKind to_compressor(const std::string& key, const std::string& val) {
  if (val == "identity") return CompressorKind::kIdentity;
  if (val == "dithering") return CompressorKind::kRandomDithering;
  throw ConfigError("config key '" + key +
                    "': expected identity or dithering");
}

NormOrder to_norm(const std::string& key, const std::string& val) {
  if (val == "2") return NormOrder::kL2;
  if (val == "inf") return NormOrder::kLInf;
  throw ConfigError("config key '" + key + "': expected 2 or inf");
}

// "minibatch:32" or "full".
BatchSpec to_batch(const std::string& key, const std::string& val) {
  BatchSpec batch;
  if (val == "full") return batch;
  const std::string prefix = "minibatch:";
  if (val.rfind(prefix, 0) == 0) {
    batch.mode = BatchSpec::Mode::kMinibatch;
    batch.size = static_cast<int>(to_long(key, val.substr(prefix.size())));
    if (batch.size < 1) throw ConfigError("minibatch size must be >= 1");
    return batch;
  }
  throw ConfigError("config key '" + key + "': expected full or minibatch:N");
}

void apply_key(RunConfig& cfg, const std::string& key,
               const std::string& val) {
  if (key == "dataset") {
    cfg.dataset_path = val;
  } else if (key == "synthetic") {
    cfg.synthetic = val;
  } else if (key == "n_workers") {
    cfg.n_workers = static_cast<int>(to_long(key, val));
  } else if (key == "partition") {
    if (val == "contiguous") {
      cfg.partition_mode = PartitionMode::kContiguous;
    } else if (val == "shuffled") {
      cfg.partition_mode = PartitionMode::kShuffled;
    } else {
      throw ConfigError("partition must be contiguous or shuffled");
    }
  } else if (key == "reg_mu") {
    cfg.reg_mu = to_double(key, val);
  } else if (key == "sketch") {
    if (val == "gaussian") {
      cfg.sketch_kind = SketchKind::kGaussian;
    } else if (val == "coordinate") {
      cfg.sketch_kind = SketchKind::kCoordinate;
    } else {
      throw ConfigError("sketch must be gaussian or coordinate");
    }
  } else if (key == "m") {
    cfg.m = static_cast<int>(to_long(key, val));
  } else if (key == "grad_compressor") {
    cfg.grad_spec.kind = to_compressor(key, val);
  } else if (key == "grad_levels") {
    cfg.grad_spec.levels = static_cast<int>(to_long(key, val));
  } else if (key == "grad_norm") {
    cfg.grad_spec.norm = to_norm(key, val);
  } else if (key == "hess_compressor") {
    cfg.hess_spec.kind = to_compressor(key, val);
  } else if (key == "hess_levels") {
    cfg.hess_spec.levels = static_cast<int>(to_long(key, val));
  } else if (key == "hess_norm") {
    cfg.hess_spec.norm = to_norm(key, val);
  } else if (key == "float_bits") {
    const int bits = static_cast<int>(to_long(key, val));
    cfg.grad_spec.float_bits = bits;
    cfg.hess_spec.float_bits = bits;
  } else if (key == "hessian_update") {
    if (val == "lsr1") {
      cfg.hessian_update = HessianUpdate::kLsr1;
    } else if (val == "direct") {
      cfg.hessian_update = HessianUpdate::kDirect;
    } else {
      throw ConfigError("hessian_update must be lsr1 or direct");
    }
  } else if (key == "lsr1_middle") {
    if (val == "standard") {
      cfg.lsr1_middle = Lsr1Middle::kStandard;
    } else if (val == "printed") {
      cfg.lsr1_middle = Lsr1Middle::kPrinted;
    } else {
      throw ConfigError("lsr1_middle must be standard or printed");
    }
  } else if (key == "direction") {
    if (val == "truncated") {
      cfg.direction = DirectionMethod::kTruncated;
    } else if (val == "fedsonia") {
      cfg.direction = DirectionMethod::kFedsonia;
    } else {
      throw ConfigError("direction must be truncated or fedsonia");
    }
  } else if (key == "alpha") {
    cfg.alpha = to_double(key, val);
  } else if (key == "gamma") {
    cfg.gamma = to_double(key, val);
  } else if (key == "beta") {
    cfg.beta = to_double(key, val);
  } else if (key == "rho") {
    cfg.rho = to_double(key, val);
    cfg.rho_set = true;
  } else if (key == "omega_trunc") {
    cfg.omega_trunc = to_double(key, val);
  } else if (key == "Omega_trunc") {
    cfg.big_omega_trunc = to_double(key, val);
  } else if (key == "batch") {
    cfg.batch = to_batch(key, val);
  } else if (key == "rounds") {
    cfg.rounds = to_long(key, val);
  } else if (key == "global_seed") {
    cfg.global_seed = to_u64(key, val);
  } else if (key == "threads") {
    cfg.threads = static_cast<int>(to_long(key, val));
  } else if (key == "timing") {
    cfg.timing = to_bool(key, val);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

void validate(const RunConfig& cfg) {
  if (cfg.dataset_path.empty() == cfg.synthetic.empty()) {
    throw ConfigError("set exactly one of 'dataset' and 'synthetic'");
  }
  if (cfg.n_workers < 1) throw ConfigError("n_workers must be >= 1");
  if (cfg.m < 1) throw ConfigError("m must be >= 1");
  if (cfg.grad_spec.levels < 1 || cfg.hess_spec.levels < 1) {
    throw ConfigError("compressor levels must be >= 1");
  }
  if (cfg.grad_spec.float_bits < 1) throw ConfigError("float_bits must be >= 1");
  if (!(cfg.alpha >= 0.0)) throw ConfigError("alpha must be >= 0");
  if (!(cfg.gamma > 0.0)) throw ConfigError("gamma must be > 0");
  if (!(cfg.beta > 0.0 && cfg.beta <= 1.0)) {
    throw ConfigError("beta must lie in (0, 1]");
  }
  if (cfg.rho_set && !(cfg.rho >= 0.0)) throw ConfigError("rho must be >= 0");
  if (!(cfg.reg_mu >= 0.0)) throw ConfigError("reg_mu must be >= 0");
  if (cfg.rounds < 0) throw ConfigError("rounds must be >= 0");
  if (cfg.threads < 1) throw ConfigError("threads must be >= 1");
  // Band validity (0 < omega <= Omega) is checked by TruncationBand itself.
  TruncationBand check(cfg.omega_trunc, cfg.big_omega_trunc);
  (void)check;
}

// "logistic:d=50,rows=2000,nnz=0" -> Dataset.
Dataset parse_synthetic(const std::string& desc, std::uint64_t seed) {
  const std::string prefix = "logistic:";
  if (desc.rfind(prefix, 0) != 0) {
    throw ConfigError("synthetic spec must start with 'logistic:'");
  }
  int d = 0;
  int rows = 0;
  int nnz = 0;
  std::istringstream fields(desc.substr(prefix.size()));
  std::string item;
  while (std::getline(fields, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("synthetic spec: expected key=value, got '" + item +
                        "'");
    }
    const std::string key = trim(item.substr(0, eq));
    const long val = to_long("synthetic." + key, trim(item.substr(eq + 1)));
    if (key == "d") {
      d = static_cast<int>(val);
    } else if (key == "rows") {
      rows = static_cast<int>(val);
    } else if (key == "nnz") {
      nnz = static_cast<int>(val);
    } else {
      throw ConfigError("synthetic spec: unknown key '" + key + "'");
    }
  }
  if (d < 1 || rows < 1) {
    throw ConfigError("synthetic spec needs d >= 1 and rows >= 1");
  }
  return synthetic_logistic(d, rows, seed, nnz);
}

}  // namespace

std::vector<Shard> make_shards(const RunConfig& cfg) {
  Dataset data = cfg.dataset_path.empty()
                     ? parse_synthetic(cfg.synthetic, cfg.global_seed)
                     : load_libsvm_file(cfg.dataset_path);
  if (data.rows.empty()) throw DataError("dataset has no rows");
  if (data.dim < 1) throw DataError("dataset has no features");
  PartitionSpec part;
  part.n_workers = cfg.n_workers;
  part.mode = cfg.partition_mode;
  part.shuffle_seed =
      rng::global_stream(cfg.global_seed, 0, rng::Purpose::kPartition).next();
  std::vector<LogisticShard> logistic = partition(data, part, cfg.reg_mu);
  std::vector<Shard> shards;
  shards.reserve(logistic.size());
  for (auto& shard : logistic) shards.emplace_back(std::move(shard));
  return shards;
}

namespace {

void run_worker_rounds(std::vector<WorkerState>& workers, const Vector& w,
                       const std::vector<Matrix>& bs_list,
                       const Matrix& sketch, long round, const RunConfig& cfg,
                       std::vector<UplinkMessage>& msgs) {
  const int n = static_cast<int>(workers.size());
  auto chunk = [&](int lo, int hi) {
    for (int i = lo; i < hi; ++i) {
      msgs[static_cast<std::size_t>(i)] = worker_round(
          workers[static_cast<std::size_t>(i)], w,
          bs_list[static_cast<std::size_t>(i)], sketch, round, cfg.gamma,
          cfg.grad_spec, cfg.hess_spec, cfg.batch);
    }
  };
  const int n_threads = std::min(cfg.threads, n);
  if (n_threads <= 1) {
    chunk(0, n);
    return;
  }
  // Results land in per-worker slots, so scheduling order cannot matter.
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(n_threads));
  const int per = (n + n_threads - 1) / n_threads;
  for (int t = 0; t < n_threads; ++t) {
    const int lo = t * per;
    const int hi = std::min(n, lo + per);
    if (lo >= hi) break;
    pool.emplace_back(chunk, lo, hi);
  }
  for (auto& th : pool) th.join();
}

void append_double(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

void write_rows(std::ostream& out, const std::string& prefix,
                const std::vector<TraceRow>& rows, bool with_timing) {
  for (const TraceRow& row : rows) {
    std::string line = prefix;
    line += std::to_string(row.k);
    line += ',';
    append_double(line, row.objective);
    line += ',';
    append_double(line, row.grad_sq_norm);
    line += ',';
    line += std::to_string(row.uplink_bits);
    line += ',';
    line += std::to_string(row.downlink_bits);
    line += ',';
    if (with_timing) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.3f", row.ms);
      line += buf;
    } else {
      line += '0';
    }
    line += '\n';
    out << line;
  }
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected key = value");
    }
    apply_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  validate(cfg);
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string to_config_text(const RunConfig& cfg) {
  std::ostringstream out;
  if (!cfg.dataset_path.empty()) out << "dataset = " << cfg.dataset_path << "\n";
  if (!cfg.synthetic.empty()) out << "synthetic = " << cfg.synthetic << "\n";
  out << "n_workers = " << cfg.n_workers << "\n";
  out << "partition = "
      << (cfg.partition_mode == PartitionMode::kContiguous ? "contiguous"
                                                           : "shuffled")
      << "\n";
  std::string num;
  num.clear();
  append_double(num, cfg.reg_mu);
  out << "reg_mu = " << num << "\n";
  out << "sketch = "
      << (cfg.sketch_kind == SketchKind::kGaussian ? "gaussian" : "coordinate")
      << "\n";
  out << "m = " << cfg.m << "\n";
  const auto spec_out = [&](const char* prefix, const CompressorSpec& spec) {
    out << prefix << "_compressor = "
        << (spec.kind == CompressorKind::kIdentity ? "identity" : "dithering")
        << "\n";
    out << prefix << "_levels = " << spec.levels << "\n";
    out << prefix << "_norm = " << (spec.norm == NormOrder::kL2 ? "2" : "inf")
        << "\n";
  };
  spec_out("grad", cfg.grad_spec);
  spec_out("hess", cfg.hess_spec);
  out << "float_bits = " << cfg.grad_spec.float_bits << "\n";
  out << "hessian_update = "
      << (cfg.hessian_update == HessianUpdate::kLsr1 ? "lsr1" : "direct")
      << "\n";
  out << "lsr1_middle = "
      << (cfg.lsr1_middle == Lsr1Middle::kStandard ? "standard" : "printed")
      << "\n";
  out << "direction = "
      << (cfg.direction == DirectionMethod::kTruncated ? "truncated"
                                                       : "fedsonia")
      << "\n";
  const auto num_out = [&](const char* key, double v) {
    std::string s;
    append_double(s, v);
    out << key << " = " << s << "\n";
  };
  num_out("alpha", cfg.alpha);
  num_out("gamma", cfg.gamma);
  num_out("beta", cfg.beta);
  num_out("rho", cfg.effective_rho());
  num_out("omega_trunc", cfg.omega_trunc);
  num_out("Omega_trunc", cfg.big_omega_trunc);
  out << "batch = ";
  if (cfg.batch.mode == BatchSpec::Mode::kFull) {
    out << "full\n";
  } else {
    out << "minibatch:" << cfg.batch.size << "\n";
  }
  out << "rounds = " << cfg.rounds << "\n";
  out << "global_seed = " << cfg.global_seed << "\n";
  out << "threads = " << cfg.threads << "\n";
  out << "timing = " << (cfg.timing ? "true" : "false") << "\n";
  return out.str();
}

std::vector<TraceRow> run(const RunConfig& cfg) {
  validate(cfg);
  std::vector<Shard> shards = make_shards(cfg);
  const int d = dim(shards.front());
  if (cfg.m > d) throw ConfigError("m exceeds the data dimension");
  if (cfg.batch.mode == BatchSpec::Mode::kMinibatch) {
    for (const Shard& shard : shards) {
      if (cfg.batch.size > num_rows(shard)) {
        throw ConfigError("minibatch size exceeds a shard's row count");
      }
    }
  }

  SketchSpec sketch_spec;
  sketch_spec.kind = cfg.sketch_kind;
  sketch_spec.m = cfg.m;
  sketch_spec.global_seed = cfg.global_seed;

  StepSizes steps;
  steps.alpha = cfg.alpha;
  steps.gamma = cfg.gamma;
  steps.beta = cfg.beta;
  steps.rho = cfg.effective_rho();

  ServerState server = make_server(
      d, cfg.n_workers, steps, TruncationBand(cfg.omega_trunc, cfg.big_omega_trunc),
      cfg.hessian_update, cfg.lsr1_middle, cfg.direction, sketch_spec);

  std::vector<WorkerState> workers;
  workers.reserve(shards.size());
  for (std::size_t i = 0; i < shards.size(); ++i) {
    workers.push_back(
        make_worker(static_cast<int>(i), shards[i], cfg.global_seed));
  }

  std::vector<TraceRow> trace;
  trace.reserve(static_cast<std::size_t>(cfg.rounds) + 1);
  const auto eval_row = [&](long k, std::int64_t up, std::int64_t down,
                            double ms) {
    TraceRow row;
    row.k = k;
    const auto [f, g] = global_value_and_grad(shards, server.w);
    row.objective = f;
    row.grad_sq_norm = g.squaredNorm();
    row.uplink_bits = up;
    row.downlink_bits = down;
    row.ms = ms;
    trace.push_back(row);
  };
  eval_row(0, 0, 0, 0.0);

  Matrix sketch = sample_sketch(sketch_spec, d, 0);
  std::vector<Matrix> bs_list(static_cast<std::size_t>(cfg.n_workers),
                              Matrix::Zero(d, cfg.m));
  Vector w = server.w;
  std::vector<UplinkMessage> msgs(static_cast<std::size_t>(cfg.n_workers));
  std::int64_t up_total = 0;
  std::int64_t down_total = 0;

  for (long k = 0; k < cfg.rounds; ++k) {
    const auto started = std::chrono::steady_clock::now();
    run_worker_rounds(workers, w, bs_list, sketch, k, cfg, msgs);
    const RoundResult result = server_round(server, msgs, k);
    w = server.w;
    for (std::size_t i = 0; i < result.downlinks.size(); ++i) {
      bs_list[i] = result.downlinks[i].bs;
    }
    sketch = sample_sketch(sketch_spec, d, k + 1);
    up_total += result.uplink_bits_per_node;
    down_total += result.downlink_bits_per_node;
    const double ms =
        std::chrono::duration<double, std::milli>(
            std::chrono::steady_clock::now() - started)
            .count();
    eval_row(k + 1, up_total, down_total, ms);
  }
  return trace;
}

std::vector<VariantTrace> compare(const RunConfig& cfg,
                                  const std::vector<std::string>& variants) {
  if (variants.empty()) throw ConfigError("compare: no variants given");
  std::vector<VariantTrace> traces;
  traces.reserve(variants.size());
  for (const std::string& name : variants) {
    RunConfig variant_cfg = cfg;
    if (name == "cgd") {
      // the configuration as given
    } else if (name == "flecs") {
      variant_cfg.grad_spec.kind = CompressorKind::kIdentity;
    } else {
      throw ConfigError("unknown variant '" + name + "' (use cgd, flecs)");
    }
    traces.push_back({name, run(variant_cfg)});
  }
  return traces;
}

void write_csv(std::ostream& out, const std::vector<TraceRow>& rows,
               bool with_timing) {
  out << "k,objective,grad_sq_norm,uplink_bits,downlink_bits,ms\n";
  write_rows(out, "", rows, with_timing);
}

void write_compare_csv(std::ostream& out,
                       const std::vector<VariantTrace>& traces,
                       bool with_timing) {
  out << "variant,k,objective,grad_sq_norm,uplink_bits,downlink_bits,ms\n";
  for (const VariantTrace& trace : traces) {
    write_rows(out, trace.name + ",", trace.rows, with_timing);
  }
}

}  // namespace flecs
