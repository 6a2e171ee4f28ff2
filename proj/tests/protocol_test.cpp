#include <doctest.h>

#include <cmath>
#include <set>
#include <thread>

#include "flecs/protocol.hpp"
#include "test_util.hpp"

using flecs::CompressorKind;
using flecs::CompressorSpec;
using flecs::Matrix;
using flecs::SketchKind;
using flecs::SketchSpec;

namespace {

CompressorSpec dithering(int levels) {
  CompressorSpec spec;
  spec.kind = CompressorKind::kRandomDithering;
  spec.levels = levels;
  return spec;
}

CompressorSpec identity() {
  CompressorSpec spec;
  spec.kind = CompressorKind::kIdentity;
  return spec;
}

}  // namespace

TEST_SUITE("protocol") {

TEST_CASE("sketches are deterministic in (seed, round), even across threads") {
  SketchSpec spec;
  spec.m = 3;
  spec.global_seed = 17;
  const Matrix expected = flecs::sample_sketch(spec, 12, 5);
  Matrix from_thread_a;
  Matrix from_thread_b;
  std::thread ta([&] { from_thread_a = flecs::sample_sketch(spec, 12, 5); });
  std::thread tb([&] { from_thread_b = flecs::sample_sketch(spec, 12, 5); });
  ta.join();
  tb.join();
  CHECK((from_thread_a - expected).cwiseAbs().maxCoeff() == 0.0);
  CHECK((from_thread_b - expected).cwiseAbs().maxCoeff() == 0.0);

  // Different rounds and different seeds give fresh sketches.
  CHECK((flecs::sample_sketch(spec, 12, 6) - expected).cwiseAbs().maxCoeff() >
        0.0);
  SketchSpec other = spec;
  other.global_seed = 18;
  CHECK((flecs::sample_sketch(other, 12, 5) - expected).cwiseAbs().maxCoeff() >
        0.0);
}

TEST_CASE("gaussian sketch columns have the 1/m variance scaling") {
  SketchSpec spec;
  spec.m = 4;
  spec.global_seed = 5;
  double acc = 0.0;
  const int rounds = 400;
  const int d = 50;
  for (int k = 0; k < rounds; ++k) {
    acc += flecs::sample_sketch(spec, d, k).squaredNorm();
  }
  // E||S||_F^2 = d * m * (1/m) = d.
  CHECK(acc / rounds == doctest::Approx(static_cast<double>(d)).epsilon(0.05));
}

TEST_CASE("coordinate sketch picks m distinct basis columns") {
  SketchSpec spec;
  spec.kind = SketchKind::kCoordinate;
  spec.m = 5;
  spec.global_seed = 9;
  for (int k = 0; k < 20; ++k) {
    const Matrix s = flecs::sample_sketch(spec, 11, k);
    std::set<int> picked;
    for (int j = 0; j < 5; ++j) {
      int ones = 0;
      int where = -1;
      for (int i = 0; i < 11; ++i) {
        if (s(i, j) == 1.0) {
          ++ones;
          where = i;
        } else {
          CHECK(s(i, j) == 0.0);
        }
      }
      CHECK(ones == 1);
      picked.insert(where);
    }
    CHECK(picked.size() == 5);
  }
}

TEST_CASE("sketch width validation") {
  SketchSpec spec;
  spec.m = 8;
  CHECK_THROWS_AS(flecs::sample_sketch(spec, 4, 0), flecs::DimensionError);
  spec.m = 0;
  CHECK_THROWS_AS(flecs::sample_sketch(spec, 4, 0), flecs::ConfigError);
}

TEST_CASE("payload bit formulas match hand counts") {
  // 64 levels cost sign + 7 level bits per coordinate plus one norm float.
  CHECK(flecs::vector_payload_bits(123, dithering(64)) == 32 + 123 * 8);
  CHECK(flecs::vector_payload_bits(123, identity()) == 32 * 123);
  CHECK(flecs::vector_payload_bits(1, dithering(1)) == 32 + 2);

  // d=123, m=1: compressed-gradient pipeline vs uncompressed-gradient one.
  CHECK(flecs::uplink_bits(123, 1, dithering(64), dithering(64)) == 2064);
  CHECK(flecs::uplink_bits(123, 1, identity(), dithering(64)) == 4984);
  CHECK(flecs::downlink_bits(123, 1) == 7872);

  // Wider sketch: the Hessian part scales with m, the M block with m^2.
  CHECK(flecs::uplink_bits(123, 4, dithering(64), dithering(64)) ==
        1016 + 4 * 1016 + 32 * 16);
  CHECK(flecs::uplink_bits(50, 2, identity(), identity()) ==
        32 * 50 + 2 * 32 * 50 + 32 * 4);
}

TEST_CASE("compressed gradients beat uncompressed ones whenever they can") {
  // Per-coordinate cost c = 1 + ceil(log2(s+1)) against 32-bit floats, with
  // a 32-bit norm scalar of overhead: the compressed uplink wins exactly
  // when 32 + c d < 32 d. Check the whole practical range.
  for (const int levels : {1, 2, 64, 128, 1 << 14}) {
    const int c = 1 + flecs::level_bits(levels);
    for (const int d : {2, 3, 17, 123, 5000}) {
      const bool wins =
          flecs::uplink_bits(d, 1, dithering(levels), dithering(levels)) <
          flecs::uplink_bits(d, 1, identity(), dithering(levels));
      CHECK(wins == (32 < d * (32 - c)));
    }
  }
  // Near the float width the norm overhead needs d >= 33 to amortize.
  const int huge_levels = (1 << 30) - 1;  // 31 bits per coordinate
  CHECK(flecs::uplink_bits(33, 1, dithering(huge_levels), identity()) <
        flecs::uplink_bits(33, 1, identity(), identity()));
  CHECK(flecs::uplink_bits(16, 1, dithering(huge_levels), identity()) >
        flecs::uplink_bits(16, 1, identity(), identity()));
}

TEST_CASE("bit formula validation") {
  CHECK_THROWS_AS(flecs::vector_payload_bits(0, identity()),
                  flecs::ConfigError);
  CHECK_THROWS_AS(flecs::uplink_bits(5, 0, identity(), identity()),
                  flecs::ConfigError);
  CHECK_THROWS_AS(flecs::downlink_bits(0, 1), flecs::ConfigError);
}

}  // TEST_SUITE
