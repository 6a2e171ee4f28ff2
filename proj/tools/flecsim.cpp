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
//
// flecsim: deterministic simulator for communication-efficient federated
// second-order optimization. See README.md for the config format.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "flecs/harness.hpp"
#include "flecs/oracles.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  std::optional<long> rounds;
  std::optional<int> threads;
  bool timing = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool wants_out) {
  cmd->add_option("config", flags.config_path, "run configuration file")
      ->required();
  if (wants_out) {
    cmd->add_option("--out", flags.out_path,
                    "write CSV here instead of stdout");
    cmd->add_flag("--timing", flags.timing,
                  "emit measured wall-clock ms (breaks byte determinism)");
  }
  cmd->add_option("--seed", flags.seed, "override global_seed");
  cmd->add_option("--rounds", flags.rounds, "override round count");
  cmd->add_option("--threads", flags.threads,
                  "override intra-round worker threads");
}

flecs::RunConfig load_config(const CommonFlags& flags) {
  flecs::RunConfig cfg = flecs::parse_config_file(flags.config_path);
  if (flags.seed) cfg.global_seed = *flags.seed;
  if (flags.rounds) cfg.rounds = *flags.rounds;
  if (flags.threads) cfg.threads = *flags.threads;
  if (flags.timing) cfg.timing = true;
  return cfg;
}

void emit(const std::string& out_path, const std::string& payload) {
  if (out_path.empty()) {
    std::cout << payload;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw flecs::ConfigError("cannot open output file: " + out_path);
  out << payload;
}

int cmd_run(const CommonFlags& flags) {
  const flecs::RunConfig cfg = load_config(flags);
  const std::vector<flecs::TraceRow> rows = flecs::run(cfg);
  std::ostringstream csv;
  flecs::write_csv(csv, rows, cfg.timing);
  emit(flags.out_path, csv.str());
  return 0;
}

int cmd_compare(const CommonFlags& flags, const std::string& variants_csv) {
  const flecs::RunConfig cfg = load_config(flags);
  std::vector<std::string> variants;
  std::istringstream items(variants_csv);
  std::string item;
  while (std::getline(items, item, ',')) {
    if (!item.empty()) variants.push_back(item);
  }
  const auto traces = flecs::compare(cfg, variants);
  std::ostringstream csv;
  flecs::write_compare_csv(csv, traces, cfg.timing);
  emit(flags.out_path, csv.str());
  return 0;
}

// Validates analytic gradients and Hessian-vector products against central
// finite differences on the configured data, at a few random iterates.
int cmd_gradcheck(const CommonFlags& flags) {
  const flecs::RunConfig cfg = load_config(flags);
  const std::vector<flecs::Shard> shards = flecs::make_shards(cfg);
  const int d = flecs::dim(shards.front());
  flecs::rng::Stream probe =
      flecs::rng::global_stream(cfg.global_seed, 0, flecs::rng::Purpose::kProbe);
  double worst_grad = 0.0;
  double worst_hvp = 0.0;
  const flecs::BatchSpec full;
  flecs::rng::Stream unused(0);
  for (const flecs::Shard& shard : shards) {
    flecs::Vector w(d);
    for (int i = 0; i < d; ++i) {
      w[i] = probe.gaussian() / std::sqrt(static_cast<double>(d));
    }
    const flecs::Vector g = flecs::gradient(shard, w, full, unused);
    const flecs::Vector g_fd = flecs::oracle::finite_diff_gradient(shard, w, 1e-6);
    worst_grad = std::max(worst_grad, (g - g_fd).norm() / std::max(1e-12, g_fd.norm()));

    flecs::Matrix s(d, 2);
    for (int i = 0; i < d; ++i) {
      s(i, 0) = probe.gaussian();
      s(i, 1) = probe.gaussian();
    }
    const flecs::Matrix y = flecs::hessian_sketch(shard, w, s, full, unused);
    for (int c = 0; c < 2; ++c) {
      const double step = 1e-5;
      const flecs::Vector g_plus =
          flecs::gradient(shard, flecs::Vector(w + step * s.col(c)), full, unused);
      const flecs::Vector g_minus =
          flecs::gradient(shard, flecs::Vector(w - step * s.col(c)), full, unused);
      const flecs::Vector hvp_fd = (g_plus - g_minus) / (2.0 * step);
      worst_hvp = std::max(worst_hvp, (y.col(c) - hvp_fd).norm() /
                                          std::max(1e-12, hvp_fd.norm()));
    }
  }
  std::printf("gradient_max_rel_err=%.3e\n", worst_grad);
  std::printf("hvp_max_rel_err=%.3e\n", worst_hvp);
  if (worst_grad > 1e-6 || worst_hvp > 1e-5) {
    throw flecs::NumericError("gradcheck tolerances exceeded");
  }
  std::printf("gradcheck ok\n");
  return 0;
}

// Prints the closed-form per-round wire costs for the configured problem,
// plus the uncompressed-gradient baseline for comparison.
int cmd_bits(const CommonFlags& flags) {
  const flecs::RunConfig cfg = load_config(flags);
  const std::vector<flecs::Shard> shards = flecs::make_shards(cfg);
  const int d = flecs::dim(shards.front());
  if (d < 1) throw flecs::DataError("could not determine data dimension");
  flecs::CompressorSpec identity_grad = cfg.grad_spec;
  identity_grad.kind = flecs::CompressorKind::kIdentity;
  std::printf("d=%d m=%d\n", d, cfg.m);
  std::printf("uplink_bits_per_round=%lld\n",
              static_cast<long long>(
                  flecs::uplink_bits(d, cfg.m, cfg.grad_spec, cfg.hess_spec)));
  std::printf("uplink_bits_per_round_flecs=%lld\n",
              static_cast<long long>(
                  flecs::uplink_bits(d, cfg.m, identity_grad, cfg.hess_spec)));
  std::printf("downlink_bits_per_round=%lld\n",
              static_cast<long long>(flecs::downlink_bits(d, cfg.m)));
  return 0;
}

// Built-in statistical health checks of the random pieces.
int cmd_selftest(std::uint64_t seed) {
  using flecs::Vector;
  int failures = 0;
  const auto report = [&](const char* name, bool ok, double stat) {
    std::printf("[%s] %s (stat=%.4g)\n", ok ? "ok" : "FAIL", name, stat);
    if (!ok) ++failures;
  };

  // Dithering unbiasedness on a fixed random vector.
  {
    flecs::rng::Stream setup(seed);
    const int d = 50;
    Vector x(d);
    for (int i = 0; i < d; ++i) x[i] = setup.gaussian();
    flecs::CompressorSpec spec;
    flecs::rng::Stream draws(seed + 1);
    const auto rep = flecs::oracle::statistical_unbiasedness(
        [&] { return flecs::compress_vector(x, spec, draws).value; }, x,
        100000);
    report("dithering unbiasedness", rep.pass, rep.max_abs_z);
  }

  // Second-moment ratio stability across two batches.
  {
    flecs::rng::Stream setup(seed + 2);
    const int d = 50;
    Vector x(d);
    for (int i = 0; i < d; ++i) x[i] = setup.gaussian();
    flecs::CompressorSpec spec;
    flecs::rng::Stream draws(seed + 3);
    const auto batch_ratio = [&] {
      double acc = 0.0;
      for (int t = 0; t < 50000; ++t) {
        acc += flecs::compress_vector(x, spec, draws).value.squaredNorm();
      }
      return acc / 50000.0 / x.squaredNorm();
    };
    const double r1 = batch_ratio();
    const double r2 = batch_ratio();
    const double drift = std::abs(r1 - r2) / r1;
    report("dithering second-moment stability", drift <= 0.05, drift);
  }

  // Minibatch gradient unbiasedness against the full-batch gradient.
  {
    const flecs::Dataset data = flecs::synthetic_logistic(8, 64, seed + 4);
    flecs::PartitionSpec part;
    const auto shards = flecs::partition(data, part, 1e-2);
    const flecs::Shard shard = shards.front();
    flecs::rng::Stream setup(seed + 5);
    Vector w(8);
    for (int i = 0; i < 8; ++i) w[i] = setup.gaussian();
    flecs::rng::Stream unused(0);
    const flecs::BatchSpec full;
    const Vector target = flecs::gradient(shard, w, full, unused);
    flecs::BatchSpec mini;
    mini.mode = flecs::BatchSpec::Mode::kMinibatch;
    mini.size = 8;
    flecs::rng::Stream draws(seed + 6);
    const auto rep = flecs::oracle::statistical_unbiasedness(
        [&] { return flecs::gradient(shard, w, mini, draws); }, target, 20000);
    report("minibatch gradient unbiasedness", rep.pass, rep.max_abs_z);
  }

  // Gaussian sketch isotropy: E ||S^T v||^2 == ||v||^2.
  {
    flecs::SketchSpec spec;
    spec.m = 4;
    spec.global_seed = seed + 7;
    flecs::rng::Stream setup(seed + 8);
    const int d = 30;
    Vector v(d);
    for (int i = 0; i < d; ++i) v[i] = setup.gaussian();
    double acc = 0.0;
    const int trials = 20000;
    for (int t = 0; t < trials; ++t) {
      acc += (flecs::sample_sketch(spec, d, t).transpose() * v).squaredNorm();
    }
    // m * ||S^T v||^2 has mean ||v||^2 per unit scaling; ratio near 1.
    const double ratio = acc / trials / v.squaredNorm();
    report("gaussian sketch isotropy", std::abs(ratio - 1.0) < 0.05, ratio);
  }

  // Identity compressor has zero variance overhead.
  {
    flecs::CompressorSpec spec;
    spec.kind = flecs::CompressorKind::kIdentity;
    flecs::rng::Stream draws(seed + 9);
    const double omega = flecs::estimate_omega_q(spec, 20, 10000, draws);
    report("identity omega estimate", omega == 0.0, omega);
  }

  if (failures != 0) throw flecs::NumericError("selftest failed");
  std::printf("selftest ok\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deterministic federated second-order optimization simulator"};
  app.require_subcommand(1);

  CommonFlags run_flags;
  CLI::App* run_cmd = app.add_subcommand("run", "run one configuration");
  add_common(run_cmd, run_flags, /*wants_out=*/true);

  CommonFlags compare_flags;
  std::string variants = "cgd,flecs";
  CLI::App* compare_cmd =
      app.add_subcommand("compare", "run variants from one config");
  add_common(compare_cmd, compare_flags, /*wants_out=*/true);
  compare_cmd->add_option("--variants", variants,
                          "comma-separated list: cgd,flecs");

  CommonFlags gradcheck_flags;
  CLI::App* gradcheck_cmd = app.add_subcommand(
      "gradcheck", "finite-difference audit of gradients and HVPs");
  add_common(gradcheck_cmd, gradcheck_flags, /*wants_out=*/false);

  CommonFlags bits_flags;
  CLI::App* bits_cmd =
      app.add_subcommand("bits", "closed-form per-round communication cost");
  add_common(bits_cmd, bits_flags, /*wants_out=*/false);

  std::uint64_t selftest_seed = 2026;
  CLI::App* selftest_cmd =
      app.add_subcommand("selftest", "statistical health checks");
  selftest_cmd->add_option("--seed", selftest_seed, "selftest seed");

  try {
    app.parse(argc, argv);
    if (run_cmd->parsed()) return cmd_run(run_flags);
    if (compare_cmd->parsed()) return cmd_compare(compare_flags, variants);
    if (gradcheck_cmd->parsed()) return cmd_gradcheck(gradcheck_flags);
    if (bits_cmd->parsed()) return cmd_bits(bits_flags);
    if (selftest_cmd->parsed()) return cmd_selftest(selftest_seed);
    return 0;
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  } catch (const flecs::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const flecs::DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
