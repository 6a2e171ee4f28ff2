#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "flecs/harness.hpp"
#include "flecs/protocol.hpp"

using flecs::RunConfig;
using flecs::TraceRow;

namespace {

std::string csv_of(const std::vector<TraceRow>& rows) {
  std::ostringstream out;
  flecs::write_csv(out, rows, /*with_timing=*/false);
  return out.str();
}

// Small strongly convex problem where exact curvature is recoverable:
// full-width direct update plus identity compression is a Newton method.
RunConfig newton_config() {
  RunConfig cfg = flecs::parse_config_text(
      "synthetic = logistic:d=12,rows=120\n"
      "n_workers = 3\n"
      "m = 12\n"
      "reg_mu = 1e-2\n"
      "grad_compressor = identity\n"
      "hess_compressor = identity\n"
      "hessian_update = direct\n"
      "beta = 1\n"
      "direction = truncated\n"
      "rounds = 25\n");
  return cfg;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("config defaults match the reference hyperparameters") {
  const RunConfig cfg =
      flecs::parse_config_text("synthetic = logistic:d=5,rows=20\n");
  CHECK(cfg.alpha == 1.0);
  CHECK(cfg.gamma == 1.0);
  CHECK(cfg.beta == 1.0);
  CHECK(cfg.omega_trunc == 1e-5);
  CHECK(cfg.big_omega_trunc == 1e8);
  CHECK(cfg.effective_rho() == 1e-8);  // 1 / Omega by default
  CHECK(cfg.grad_spec.levels == 64);
  CHECK(cfg.grad_spec.norm == flecs::NormOrder::kLInf);
  CHECK(cfg.grad_spec.float_bits == 32);
  CHECK(cfg.grad_spec.kind == flecs::CompressorKind::kRandomDithering);
  CHECK(cfg.hessian_update == flecs::HessianUpdate::kLsr1);
  CHECK(cfg.m == 1);
  CHECK(cfg.batch.mode == flecs::BatchSpec::Mode::kFull);
  CHECK(cfg.threads == 1);
}

TEST_CASE("config text round-trips") {
  RunConfig cfg = flecs::parse_config_text(
      "synthetic = logistic:d=9,rows=44,nnz=3\n"
      "n_workers = 2\n"
      "partition = shuffled\n"
      "m = 4\n"
      "sketch = coordinate\n"
      "grad_compressor = dithering\n"
      "grad_levels = 128\n"
      "grad_norm = 2\n"
      "hess_compressor = identity\n"
      "hessian_update = direct\n"
      "lsr1_middle = printed\n"
      "direction = truncated\n"
      "alpha = 0.5\n"
      "gamma = 0.25\n"
      "beta = 0.75\n"
      "rho = 1e-6\n"
      "omega_trunc = 1e-4\n"
      "Omega_trunc = 1e6\n"
      "reg_mu = 0.01\n"
      "batch = minibatch:8\n"
      "rounds = 7\n"
      "global_seed = 321\n"
      "threads = 2\n");
  const std::string text = flecs::to_config_text(cfg);
  const RunConfig back = flecs::parse_config_text(text);
  CHECK(flecs::to_config_text(back) == text);
  CHECK(back.m == 4);
  CHECK(back.grad_spec.levels == 128);
  CHECK(back.rho == 1e-6);
  CHECK(back.batch.size == 8);
}

TEST_CASE("config rejects nonsense") {
  using flecs::ConfigError;
  CHECK_THROWS_AS(flecs::parse_config_text("bogus_key = 1\n"), ConfigError);
  CHECK_THROWS_AS(flecs::parse_config_text(""), ConfigError);  // no data source
  CHECK_THROWS_AS(flecs::parse_config_text("synthetic = logistic:d=5,rows=9\n"
                                           "dataset = x.libsvm\n"),
                  ConfigError);
  CHECK_THROWS_AS(
      flecs::parse_config_text("synthetic = logistic:d=5,rows=9\nbeta = 0\n"),
      ConfigError);
  CHECK_THROWS_AS(flecs::parse_config_text(
                      "synthetic = logistic:d=5,rows=9\nomega_trunc = -1\n"),
                  ConfigError);
  CHECK_THROWS_AS(flecs::parse_config_text(
                      "synthetic = logistic:d=5,rows=9\nomega_trunc = 10\n"
                      "Omega_trunc = 1\n"),
                  ConfigError);
  CHECK_THROWS_AS(flecs::parse_config_text(
                      "synthetic = logistic:d=5,rows=9\nno equals sign\n"),
                  ConfigError);
}

TEST_CASE("zero rounds produces a single evaluation row with no traffic") {
  RunConfig cfg = flecs::parse_config_text(
      "synthetic = logistic:d=6,rows=30\nrounds = 0\n");
  const auto rows = flecs::run(cfg);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].k == 0);
  CHECK(rows[0].uplink_bits == 0);
  CHECK(rows[0].downlink_bits == 0);
  // w_0 = 0: the unregularized logistic loss is exactly log 2.
  CHECK(rows[0].objective == doctest::Approx(std::log(2.0)).epsilon(1e-6));
}

TEST_CASE("cumulative bit columns follow the closed forms") {
  RunConfig cfg = flecs::parse_config_text(
      "synthetic = logistic:d=14,rows=60\n"
      "n_workers = 3\n"
      "m = 2\n"
      "rounds = 6\n");
  const auto rows = flecs::run(cfg);
  REQUIRE(rows.size() == 7);
  const std::int64_t up =
      flecs::uplink_bits(14, 2, cfg.grad_spec, cfg.hess_spec);
  const std::int64_t down = flecs::downlink_bits(14, 2);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    CHECK(rows[k].uplink_bits == static_cast<std::int64_t>(k) * up);
    CHECK(rows[k].downlink_bits == static_cast<std::int64_t>(k) * down);
  }
}

TEST_CASE("runs are byte-identical across repeats and thread counts") {
  RunConfig cfg = flecs::parse_config_text(
      "synthetic = logistic:d=10,rows=80\n"
      "n_workers = 4\n"
      "m = 2\n"
      "rounds = 12\n"
      "batch = minibatch:10\n");
  const std::string once = csv_of(flecs::run(cfg));
  const std::string twice = csv_of(flecs::run(cfg));
  CHECK(once == twice);
  cfg.threads = 4;
  CHECK(csv_of(flecs::run(cfg)) == once);
}

TEST_CASE("identity gradients make the cgd and flecs variants coincide") {
  RunConfig cfg = flecs::parse_config_text(
      "synthetic = logistic:d=8,rows=40\n"
      "n_workers = 2\n"
      "grad_compressor = identity\n"
      "rounds = 8\n");
  const auto traces = flecs::compare(cfg, {"cgd", "flecs"});
  REQUIRE(traces.size() == 2);
  CHECK(csv_of(traces[0].rows) == csv_of(traces[1].rows));
}

TEST_CASE("compare writes one block per variant") {
  RunConfig cfg = flecs::parse_config_text(
      "synthetic = logistic:d=6,rows=30\nrounds = 2\n");
  const auto traces = flecs::compare(cfg, {"cgd", "flecs"});
  std::ostringstream out;
  flecs::write_compare_csv(out, traces, false);
  const std::string text = out.str();
  CHECK(text.rfind("variant,k,objective,grad_sq_norm,uplink_bits,"
                   "downlink_bits,ms\n", 0) == 0);
  CHECK(text.find("\ncgd,0,") != std::string::npos);
  CHECK(text.find("\nflecs,0,") != std::string::npos);
  CHECK_THROWS_AS(flecs::compare(cfg, {"nope"}), flecs::ConfigError);
  CHECK_THROWS_AS(flecs::compare(cfg, {}), flecs::ConfigError);
}

TEST_CASE("gradient norms fall monotonically once Newton kicks in") {
  const auto rows = flecs::run(newton_config());
  REQUIRE(rows.size() == 26);
  // After a short burn-in the exact-curvature run contracts every round
  // until it parks at the floating-point floor.
  for (std::size_t k = 5; k + 1 < rows.size(); ++k) {
    if (rows[k].grad_sq_norm <= 1e-22) break;
    CHECK(rows[k + 1].grad_sq_norm < rows[k].grad_sq_norm);
  }
  CHECK(rows.back().grad_sq_norm <= 1e-18);
}

TEST_CASE("infeasible run configurations fail before round zero") {
  RunConfig big_m = flecs::parse_config_text(
      "synthetic = logistic:d=4,rows=20\nm = 9\n");
  CHECK_THROWS_AS(flecs::run(big_m), flecs::ConfigError);
  RunConfig big_batch = flecs::parse_config_text(
      "synthetic = logistic:d=4,rows=8\nn_workers = 4\n"
      "batch = minibatch:5\n");
  CHECK_THROWS_AS(flecs::run(big_batch), flecs::ConfigError);
  RunConfig too_few_rows = flecs::parse_config_text(
      "synthetic = logistic:d=4,rows=3\nn_workers = 4\n");
  CHECK_THROWS_AS(flecs::run(too_few_rows), flecs::ConfigError);
  RunConfig no_file = flecs::parse_config_text("dataset = /no/such/file\n");
  CHECK_THROWS_AS(flecs::run(no_file), flecs::DataError);
}

TEST_CASE("csv layout is stable") {
  RunConfig cfg = flecs::parse_config_text(
      "synthetic = logistic:d=5,rows=20\nrounds = 1\n");
  const std::string text = csv_of(flecs::run(cfg));
  CHECK(text.rfind("k,objective,grad_sq_norm,uplink_bits,downlink_bits,ms\n",
                   0) == 0);
  // Two data rows, deterministic ms column.
  int lines = 0;
  for (const char ch : text) lines += ch == '\n' ? 1 : 0;
  CHECK(lines == 3);
  CHECK(text.find(",0\n") != std::string::npos);
}

}  // TEST_SUITE
