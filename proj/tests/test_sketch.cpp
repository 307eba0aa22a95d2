// Copyright 2026 The ldplcm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <vector>

#include "doctest.h"
#include "ldplcm/client.hpp"
#include "ldplcm/sketch.hpp"

using namespace ldplcm;

namespace {

// Independent tally of where the hash family places each update.
std::vector<std::uint64_t> brute_force_cms(const HashFamily& family,
                                           const std::vector<ItemKey>& stream) {
  std::vector<std::uint64_t> cells(std::size_t{family.rows()} * family.width(),
                                   0);
  for (ItemKey x : stream) {
    for (std::uint32_t row = 0; row < family.rows(); ++row) {
      ++cells[std::size_t{row} * family.width() + family.column(row, x)];
    }
  }
  return cells;
}

Report make_report(std::uint16_t row, std::vector<std::int8_t> bits) {
  Report r;
  r.row = row;
  r.bits = std::move(bits);
  return r;
}

}  // namespace

TEST_CASE("count-min: row sums equal the update count") {
  CountMinSketch sketch(4, 16, 7);
  sketch.update(3);
  for (std::uint32_t row = 0; row < 4; ++row) {
    std::uint64_t sum = 0;
    for (std::uint32_t col = 0; col < 16; ++col) sum += sketch.cell(row, col);
    CHECK(sum == 1);
  }
  for (int i = 0; i < 99; ++i) sketch.update(static_cast<ItemKey>(i % 5));
  for (std::uint32_t row = 0; row < 4; ++row) {
    std::uint64_t sum = 0;
    for (std::uint32_t col = 0; col < 16; ++col) sum += sketch.cell(row, col);
    CHECK(sum == 100);
  }
}

TEST_CASE("count-min: cells match the brute-force tally") {
  const std::vector<ItemKey> stream = {10, 10, 20};
  CountMinSketch sketch(2, 4, 99);
  for (ItemKey x : stream) sketch.update(x);
  const auto expected = brute_force_cms(sketch.family(), stream);
  for (std::uint32_t row = 0; row < 2; ++row) {
    for (std::uint32_t col = 0; col < 4; ++col) {
      CHECK(sketch.cell(row, col) == expected[row * 4 + col]);
    }
  }
}

TEST_CASE("count-min: estimation") {
  CountMinSketch sketch(3, 8, 5);
  CHECK(sketch.estimate(123) == 0);  // empty sketch
  sketch.update(123);
  CHECK(sketch.estimate(123) >= 1);
}

TEST_CASE("count-min: never under-estimates (exact-counter oracle)") {
  Rng rng(2);
  CountMinSketch sketch(2, 4, 17);
  std::map<ItemKey, std::uint64_t> exact;
  for (int i = 0; i < 100; ++i) {
    const ItemKey x = rng.next_below(16);
    sketch.update(x);
    ++exact[x];
  }
  for (ItemKey x = 0; x < 16; ++x) {
    const std::uint64_t truth = exact.count(x) ? exact[x] : 0;
    CHECK(sketch.estimate(x) >= truth);
  }
}

TEST_CASE("count-min: error-bound constructor derives (m, k)") {
  const auto sketch = CountMinSketch::from_error_bounds(0.01, 0.01, 1);
  CHECK(sketch.width() == 272);  // ceil(e / 0.01)
  CHECK(sketch.rows() == 5);     // ceil(ln 100)
  CHECK_THROWS_AS(CountMinSketch::from_error_bounds(-1.0, 0.5, 1),
                  ConfigError);
}

TEST_CASE("count sketch: single update touches k signed cells") {
  CountSketch sketch(3, 8, 11);
  sketch.update(42);
  int nonzero = 0;
  for (std::uint32_t row = 0; row < 3; ++row) {
    for (std::uint32_t col = 0; col < 8; ++col) {
      if (sketch.cell(row, col) != 0) {
        ++nonzero;
        CHECK(std::abs(sketch.cell(row, col)) == 1);
      }
    }
  }
  CHECK(nonzero == 3);

  sketch.update(42);  // same item: same cells, same signs
  for (std::uint32_t row = 0; row < 3; ++row) {
    const auto cell = sketch.cell(row, sketch.family().column(row, 42));
    CHECK(std::abs(cell) == 2);
  }
}

TEST_CASE("count sketch: matrix matches direct application of the update rule") {
  const std::vector<ItemKey> stream = {1, 2, 1};
  CountSketch sketch(2, 4, 3);
  for (ItemKey x : stream) sketch.update(x);

  std::vector<std::int64_t> expected(8, 0);
  for (ItemKey x : stream) {
    for (std::uint32_t row = 0; row < 2; ++row) {
      expected[row * 4 + sketch.family().column(row, x)] +=
          sketch.family().sign(row, x);
    }
  }
  for (std::uint32_t row = 0; row < 2; ++row) {
    for (std::uint32_t col = 0; col < 4; ++col) {
      CHECK(sketch.cell(row, col) == expected[row * 4 + col]);
    }
  }
}

TEST_CASE("count sketch: estimation") {
  CountSketch sketch(4, 8, 23);
  CHECK(sketch.estimate(7) == 0.0);  // empty

  // Only one item ever inserted: no collisions are possible, the estimate
  // is exact.
  for (int i = 0; i < 5; ++i) sketch.update(7);
  CHECK(sketch.estimate(7) == doctest::Approx(5.0));

  // Random stream: estimate equals the sign-corrected mean read off the
  // stored matrix.
  CountSketch noisy(3, 4, 29);
  Rng rng(5);
  for (int i = 0; i < 50; ++i) noisy.update(rng.next_below(10));
  for (ItemKey x = 0; x < 10; ++x) {
    double direct = 0.0;
    for (std::uint32_t row = 0; row < 3; ++row) {
      direct += static_cast<double>(
                    noisy.cell(row, noisy.family().column(row, x))) *
                noisy.family().sign(row, x);
    }
    direct /= 3.0;
    CHECK(noisy.estimate(x) == doctest::Approx(direct));
  }
}

TEST_CASE("aggregate: absorb applies the debiasing transform per bit") {
  // epsilon = 2 ln 3 makes c_eps exactly 2 (up to rounding).
  const auto params = PrivacyParams::from_epsilon(2.0 * std::log(3.0));
  CHECK(params.c_epsilon == doctest::Approx(2.0).epsilon(1e-12));

  AggregateSketch sketch(HashFamily(16, 4, 1), params);
  std::vector<std::int8_t> bits = {1, -1, -1, 1};
  sketch.absorb(make_report(3, bits));
  // k (c 1 + 1)/2 = 16 * 3/2 = 24 for +1; 16 * (1-2)/2 = -8 for -1.
  CHECK(sketch.cell(3, 0) == doctest::Approx(24.0).epsilon(1e-12));
  CHECK(sketch.cell(3, 1) == doctest::Approx(-8.0).epsilon(1e-12));
  CHECK(sketch.cell(3, 2) == doctest::Approx(-8.0).epsilon(1e-12));
  CHECK(sketch.cell(3, 3) == doctest::Approx(24.0).epsilon(1e-12));
  // Other rows untouched.
  for (std::uint32_t row = 0; row < 16; ++row) {
    if (row == 3) continue;
    for (std::uint32_t col = 0; col < 4; ++col) {
      CHECK(sketch.cell(row, col) == 0.0);
    }
  }
  CHECK(sketch.report_count() == 1);
}

TEST_CASE("aggregate: fresh sketch is all zero") {
  AggregateSketch sketch(HashFamily(2, 8, 9), PrivacyParams::from_epsilon(4));
  CHECK(sketch.report_count() == 0);
  for (double cell : sketch.matrix()) CHECK(cell == 0.0);
}

TEST_CASE("aggregate: absorb rejects malformed reports") {
  AggregateSketch sketch(HashFamily(2, 8, 9), PrivacyParams::from_epsilon(4));
  CHECK_THROWS_AS(sketch.absorb(make_report(0, std::vector<std::int8_t>(5, -1))),
                  ContractError);
  CHECK_THROWS_AS(sketch.absorb(make_report(2, std::vector<std::int8_t>(8, -1))),
                  ContractError);
  CHECK(sketch.report_count() == 0);
}

TEST_CASE("aggregate: m = 1 is rejected at construction") {
  CHECK_THROWS_AS(
      AggregateSketch(HashFamily(2, 1, 9), PrivacyParams::from_epsilon(4)),
      ConfigError);
}

TEST_CASE("aggregate: merge is a commutative monoid with identity") {
  const HashFamily family(4, 16, 31);
  const auto params = PrivacyParams::from_epsilon(3.0);
  Rng rng(8);

  auto random_sketch = [&](int reports) {
    AggregateSketch sketch(family, params);
    for (int i = 0; i < reports; ++i) {
      std::vector<std::int8_t> bits(16);
      for (auto& b : bits) b = rng.bernoulli(0.5) ? 1 : -1;
      sketch.absorb(make_report(static_cast<std::uint16_t>(rng.next_below(4)),
                                std::move(bits)));
    }
    return sketch;
  };

  const AggregateSketch a = random_sketch(10);
  const AggregateSketch b = random_sketch(7);
  AggregateSketch empty(family, params);

  AggregateSketch a_copy = a;
  a_copy.merge(empty);
  CHECK(a_copy.matrix() == a.matrix());
  CHECK(a_copy.report_count() == a.report_count());

  AggregateSketch ab = a;
  ab.merge(b);
  AggregateSketch ba = b;
  ba.merge(a);
  CHECK(ab.matrix() == ba.matrix());
  CHECK(ab.report_count() == ba.report_count());

  // Parameter mismatch is rejected.
  AggregateSketch other(HashFamily(4, 16, 32), params);
  CHECK_THROWS_AS(a_copy.merge(other), ContractError);
}

TEST_CASE("aggregate: sharded absorption merges to the sequential result") {
  const HashFamily family(8, 32, 77);
  const auto params = PrivacyParams::from_epsilon(4.0);
  Rng rng(13);

  std::vector<Report> reports;
  for (int i = 0; i < 1000; ++i) {
    std::vector<std::int8_t> bits(32);
    for (auto& b : bits) b = rng.bernoulli(0.5) ? 1 : -1;
    reports.push_back(make_report(
        static_cast<std::uint16_t>(rng.next_below(8)), std::move(bits)));
  }

  AggregateSketch sequential(family, params);
  for (const Report& r : reports) sequential.absorb(r);

  AggregateSketch first(family, params), second(family, params);
  for (std::size_t i = 0; i < reports.size(); ++i) {
    (i < 500 ? first : second).absorb(reports[i]);
  }
  first.merge(second);

  CHECK(first.report_count() == sequential.report_count());
  CHECK(first.matrix() == sequential.matrix());  // bit-identical
}

TEST_CASE("aggregate: reset zeroes everything") {
  AggregateSketch sketch(HashFamily(2, 4, 5), PrivacyParams::from_epsilon(2));
  sketch.absorb(make_report(1, {1, -1, 1, -1}));
  CHECK(sketch.report_count() == 1);
  sketch.reset();
  CHECK(sketch.report_count() == 0);
  for (double cell : sketch.matrix()) CHECK(cell == 0.0);
}

TEST_CASE("sketch file round trip preserves the matrix bit for bit") {
  const auto dir = std::filesystem::temp_directory_path() / "ldplcm_sketch_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "sketch.bin";

  AggregateSketch sketch(HashFamily(3, 8, 123), PrivacyParams::from_epsilon(4));
  Rng rng(4);
  for (int i = 0; i < 25; ++i) {
    std::vector<std::int8_t> bits(8);
    for (auto& b : bits) b = rng.bernoulli(0.5) ? 1 : -1;
    sketch.absorb(make_report(static_cast<std::uint16_t>(rng.next_below(3)),
                              std::move(bits)));
  }

  save_sketch(sketch, path, 0.5);
  const LoadedSketch loaded = load_sketch(path);
  CHECK(loaded.theta.has_value());
  CHECK(*loaded.theta == 0.5);
  CHECK(loaded.sketch.rows() == 3);
  CHECK(loaded.sketch.width() == 8);
  CHECK(loaded.sketch.report_count() == 25);
  CHECK(loaded.sketch.family().master_seed() == 123);
  CHECK(loaded.sketch.matrix() == sketch.matrix());

  save_sketch(sketch, path);  // no theta
  CHECK_FALSE(load_sketch(path).theta.has_value());

  // Restored sketches answer reads but refuse further aggregation.
  LoadedSketch restored = load_sketch(path);
  CHECK_THROWS_AS(
      restored.sketch.absorb(make_report(0, std::vector<std::int8_t>(8, -1))),
      ContractError);
  CHECK_THROWS_AS(restored.sketch.merge(sketch), ContractError);

  CHECK_THROWS_AS(load_sketch(dir / "missing.bin"), IoError);
  std::filesystem::remove_all(dir);
}
