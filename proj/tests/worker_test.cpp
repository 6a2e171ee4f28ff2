#include <doctest.h>

#include <cmath>

#include "flecs/oracles.hpp"
#include "flecs/worker.hpp"
#include "test_util.hpp"

using flecs::BatchSpec;
using flecs::CompressorKind;
using flecs::CompressorSpec;
using flecs::Matrix;
using flecs::QuadraticShard;
using flecs::Shard;
using flecs::UplinkMessage;
using flecs::Vector;
using flecs::WorkerState;

namespace {

CompressorSpec identity() {
  CompressorSpec spec;
  spec.kind = CompressorKind::kIdentity;
  return spec;
}

CompressorSpec dithering(int levels) {
  CompressorSpec spec;
  spec.kind = CompressorKind::kRandomDithering;
  spec.levels = levels;
  return spec;
}

Shard quad_shard(flecs::rng::Stream& stream, int d) {
  QuadraticShard quad;
  quad.h = testutil::random_spd(stream, d, 0.5, 3.0);
  quad.b = testutil::random_vector(stream, d);
  return quad;
}

const BatchSpec kFull;

}  // namespace

TEST_SUITE("worker") {

TEST_CASE("identity compression exposes the raw differences") {
  flecs::rng::Stream stream(401);
  const int d = 8;
  const int m = 3;
  const Shard shard = quad_shard(stream, d);
  WorkerState state = flecs::make_worker(0, shard, 7);
  const Vector w = testutil::random_vector(stream, d);
  const Matrix sketch = testutil::random_matrix(stream, d, m);
  const Matrix bs = testutil::random_matrix(stream, d, m);

  const UplinkMessage msg = flecs::worker_round(
      state, w, bs, sketch, 0, 1.0, identity(), identity(), kFull);

  flecs::rng::Stream unused(0);
  const Vector g = flecs::gradient(shard, w, kFull, unused);
  const Matrix y = flecs::hessian_sketch(shard, w, sketch, kFull, unused);
  CHECK((msg.c.value - g).cwiseAbs().maxCoeff() == 0.0);  // h starts at zero
  CHECK((msg.big_c.value - (y - bs)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((msg.m_small - sketch.transpose() * y).cwiseAbs().maxCoeff() == 0.0);
  CHECK((state.h - g).cwiseAbs().maxCoeff() == 0.0);  // h += gamma * c
  CHECK(msg.bits == msg.c.bits + msg.big_c.bits + 32 * m * m);
}

TEST_CASE("a worker whose reference matches the gradient sends zeros") {
  flecs::rng::Stream stream(402);
  const int d = 6;
  const Shard shard = quad_shard(stream, d);
  WorkerState state = flecs::make_worker(1, shard, 3);
  const Vector w = testutil::random_vector(stream, d);
  const Matrix sketch = testutil::random_matrix(stream, d, 2);
  const Matrix bs = Matrix::Zero(d, 2);

  // First round stores h = g; the second round at the same iterate must
  // compress an exact zero and leave h untouched.
  flecs::worker_round(state, w, bs, sketch, 0, 1.0, identity(), identity(),
                      kFull);
  const Vector h_before = state.h;
  const UplinkMessage msg = flecs::worker_round(
      state, w, bs, sketch, 1, 1.0, dithering(64), identity(), kFull);
  CHECK(msg.c.value.cwiseAbs().maxCoeff() == 0.0);
  CHECK((state.h - h_before).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("worker rounds are reproducible and round-dependent") {
  flecs::rng::Stream stream(403);
  const int d = 10;
  const Shard shard = quad_shard(stream, d);
  const Vector w = testutil::random_vector(stream, d);
  const Matrix sketch = testutil::random_matrix(stream, d, 2);
  const Matrix bs = Matrix::Zero(d, 2);

  WorkerState a = flecs::make_worker(2, shard, 55);
  WorkerState b = flecs::make_worker(2, shard, 55);
  const UplinkMessage ma = flecs::worker_round(a, w, bs, sketch, 4, 1.0,
                                               dithering(8), dithering(8), kFull);
  const UplinkMessage mb = flecs::worker_round(b, w, bs, sketch, 4, 1.0,
                                               dithering(8), dithering(8), kFull);
  CHECK((ma.c.value - mb.c.value).cwiseAbs().maxCoeff() == 0.0);
  CHECK((ma.big_c.value - mb.big_c.value).cwiseAbs().maxCoeff() == 0.0);

  WorkerState c = flecs::make_worker(2, shard, 55);
  const UplinkMessage mc = flecs::worker_round(c, w, bs, sketch, 5, 1.0,
                                               dithering(8), dithering(8), kFull);
  CHECK((ma.c.value - mc.c.value).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("error feedback has the (1 - gamma) h + gamma g mean") {
  flecs::rng::Stream stream(404);
  const int d = 12;
  const Shard shard = quad_shard(stream, d);
  const Vector w = testutil::random_vector(stream, d);
  const Matrix sketch = testutil::random_matrix(stream, d, 1);
  const Matrix bs = Matrix::Zero(d, 1);
  flecs::rng::Stream unused(0);
  const Vector g = flecs::gradient(shard, w, kFull, unused);
  const Vector h0 = testutil::random_vector(stream, d);

  for (const double gamma : {0.25, 1.0}) {
    const Vector target = (1.0 - gamma) * h0 + gamma * g;
    long draw = 0;
    const auto report = flecs::oracle::statistical_unbiasedness(
        [&] {
          WorkerState state = flecs::make_worker(0, shard, 999);
          state.h = h0;
          flecs::worker_round(state, w, bs, sketch, draw++, gamma,
                              dithering(2), identity(), kFull);
          return state.h;
        },
        target, 10000);
    CHECK(report.pass);
  }
}

TEST_CASE("shape mismatches are rejected") {
  flecs::rng::Stream stream(405);
  const Shard shard = quad_shard(stream, 5);
  WorkerState state = flecs::make_worker(0, shard, 1);
  const Matrix sketch = testutil::random_matrix(stream, 5, 2);
  CHECK_THROWS_AS(
      flecs::worker_round(state, Vector::Zero(4), Matrix::Zero(5, 2), sketch,
                          0, 1.0, identity(), identity(), kFull),
      flecs::DimensionError);
  CHECK_THROWS_AS(
      flecs::worker_round(state, Vector::Zero(5), Matrix::Zero(5, 3), sketch,
                          0, 1.0, identity(), identity(), kFull),
      flecs::DimensionError);
  CHECK_THROWS_AS(
      flecs::worker_round(state, Vector::Zero(5), Matrix::Zero(4, 2), sketch,
                          0, 1.0, identity(), identity(), kFull),
      flecs::DimensionError);
}

}  // TEST_SUITE
