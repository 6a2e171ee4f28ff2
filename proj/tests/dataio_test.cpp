#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "flecs/dataio.hpp"
#include "flecs/errors.hpp"

using flecs::Dataset;
using flecs::PartitionMode;
using flecs::PartitionSpec;

namespace {

Dataset parse(const std::string& text) {
  std::istringstream in(text);
  return flecs::parse_libsvm(in);
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const flecs::DataError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_SUITE("dataio") {

TEST_CASE("parses labels, indices and values") {
  const Dataset data = parse("+1 1:0.5 3:-2\n-1 2:1.25\n");
  REQUIRE(data.rows.size() == 2);
  CHECK(data.dim == 3);
  CHECK(data.labels[0] == 1.0);
  CHECK(data.labels[1] == -1.0);
  REQUIRE(data.rows[0].index.size() == 2);
  CHECK(data.rows[0].index[0] == 0);  // stored 0-based
  CHECK(data.rows[0].index[1] == 2);
  CHECK(data.rows[0].value[0] == 0.5);
  CHECK(data.rows[0].value[1] == -2.0);
  CHECK(data.rows[1].index[0] == 1);
}

TEST_CASE("maps 0/1 labels onto -1/+1") {
  const Dataset data = parse("1 1:1\n0 1:2\n-1 2:3\n");
  CHECK(data.labels[0] == 1.0);
  CHECK(data.labels[1] == -1.0);
  CHECK(data.labels[2] == -1.0);
}

TEST_CASE("skips blank lines and keeps feature-free rows") {
  const Dataset data = parse("\n+1 1:1\n   \n-1\n");
  REQUIRE(data.rows.size() == 2);
  CHECK(data.rows[1].index.empty());
  CHECK(data.dim == 1);
}

TEST_CASE("rejects malformed input with the offending line number") {
  CHECK(error_of("+2 1:1\n").find("line 1") != std::string::npos);
  CHECK(error_of("+1 1:1\nxyz 1:1\n").find("line 2") != std::string::npos);
  CHECK(error_of("+1 1:1 1:2\n").find("ascending") != std::string::npos);
  CHECK(error_of("+1 3:1 2:1\n").find("ascending") != std::string::npos);
  CHECK(error_of("+1 0:1\n").find("1-based") != std::string::npos);
  CHECK(error_of("+1 -4:1\n").find("1-based") != std::string::npos);
  CHECK(error_of("+1 2:abc\n") != "");
  CHECK(error_of("+1 2\n") != "");
  CHECK(error_of("+1 :5\n") != "");
  CHECK(error_of("+1 2:\n") != "");
}

TEST_CASE("round-trips through serialization exactly") {
  const Dataset data = flecs::synthetic_logistic(6, 25, 42);
  const Dataset back = parse(flecs::to_libsvm(data));
  REQUIRE(back.rows.size() == data.rows.size());
  CHECK(back.dim == data.dim);
  for (std::size_t j = 0; j < data.rows.size(); ++j) {
    CHECK(back.labels[j] == data.labels[j]);
    REQUIRE(back.rows[j].index == data.rows[j].index);
    for (std::size_t t = 0; t < data.rows[j].value.size(); ++t) {
      CHECK(back.rows[j].value[t] == data.rows[j].value[t]);  // bitwise
    }
  }
}

TEST_CASE("missing file raises DataError") {
  CHECK_THROWS_AS(flecs::load_libsvm_file("/nonexistent/file.libsvm"),
                  flecs::DataError);
}

TEST_CASE("contiguous partition gives the remainder to the last shard") {
  const Dataset data = flecs::synthetic_logistic(4, 10, 7);
  PartitionSpec spec;
  spec.n_workers = 3;
  const auto shards = flecs::partition(data, spec, 1e-3);
  REQUIRE(shards.size() == 3);
  CHECK(shards[0].rows.size() == 3);
  CHECK(shards[1].rows.size() == 3);
  CHECK(shards[2].rows.size() == 4);
  for (const auto& shard : shards) {
    CHECK(shard.dim == 4);
    CHECK(shard.reg_mu == 1e-3);
  }
  // Contiguous order is preserved.
  CHECK(shards[0].labels[0] == data.labels[0]);
  CHECK(shards[2].labels[3] == data.labels[9]);
}

TEST_CASE("shuffled partition is a seeded permutation of all rows") {
  const Dataset data = flecs::synthetic_logistic(3, 23, 11);
  PartitionSpec spec;
  spec.n_workers = 4;
  spec.mode = PartitionMode::kShuffled;
  spec.shuffle_seed = 99;
  const auto a = flecs::partition(data, spec, 0.0);
  const auto b = flecs::partition(data, spec, 0.0);
  spec.shuffle_seed = 100;
  const auto c = flecs::partition(data, spec, 0.0);

  const auto signature = [](const std::vector<flecs::LogisticShard>& shards) {
    std::vector<double> sig;
    for (const auto& shard : shards) {
      for (std::size_t j = 0; j < shard.rows.size(); ++j) {
        double acc = shard.labels[j];
        for (const double v : shard.rows[j].value) acc += v;
        sig.push_back(acc);
      }
    }
    return sig;
  };
  CHECK(signature(a) == signature(b));  // same seed, same layout
  CHECK(signature(a) != signature(c));  // new seed reshuffles

  // All rows are still present exactly once.
  auto sorted_a = signature(a);
  auto sorted_plain = signature(flecs::partition(data, PartitionSpec{1}, 0.0));
  std::sort(sorted_a.begin(), sorted_a.end());
  std::sort(sorted_plain.begin(), sorted_plain.end());
  CHECK(sorted_a == sorted_plain);
}

TEST_CASE("partition validation") {
  const Dataset data = flecs::synthetic_logistic(3, 5, 1);
  PartitionSpec spec;
  spec.n_workers = 6;
  CHECK_THROWS_AS(flecs::partition(data, spec, 0.0), flecs::ConfigError);
  spec.n_workers = 0;
  CHECK_THROWS_AS(flecs::partition(data, spec, 0.0), flecs::ConfigError);
  spec.n_workers = 5;  // one row per worker is allowed
  CHECK(flecs::partition(data, spec, 0.0).size() == 5);
}

TEST_CASE("synthetic data is deterministic in the seed") {
  const Dataset a = flecs::synthetic_logistic(9, 40, 123);
  const Dataset b = flecs::synthetic_logistic(9, 40, 123);
  const Dataset c = flecs::synthetic_logistic(9, 40, 124);
  CHECK(flecs::to_libsvm(a) == flecs::to_libsvm(b));
  CHECK(flecs::to_libsvm(a) != flecs::to_libsvm(c));
  CHECK(a.dim == 9);
  for (const double label : a.labels) {
    CHECK((label == 1.0 || label == -1.0));
  }
}

TEST_CASE("sparse synthetic rows have exactly nnz ascending one-hot entries") {
  const Dataset data = flecs::synthetic_logistic(20, 30, 5, 4);
  CHECK(data.dim == 20);
  for (const auto& row : data.rows) {
    REQUIRE(row.index.size() == 4);
    std::set<int> seen(row.index.begin(), row.index.end());
    CHECK(seen.size() == 4);
    CHECK(std::is_sorted(row.index.begin(), row.index.end()));
    for (const double v : row.value) CHECK(v == 1.0);
    for (const int idx : row.index) {
      CHECK(idx >= 0);
      CHECK(idx < 20);
    }
  }
}

}  // TEST_SUITE
