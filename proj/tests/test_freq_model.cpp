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
#include <filesystem>
#include <set>
#include <vector>

#include "doctest.h"
#include "ldplcm/freq_model.hpp"
#include "ldplcm/sketch.hpp"

using namespace ldplcm;

namespace {

TrainingSet linear_training(std::size_t n) {
  TrainingSet training;
  for (std::size_t i = 0; i < n; ++i) {
    training.items.push_back(i);
    training.targets.push_back(static_cast<double>(i));
  }
  return training;
}

}  // namespace

TEST_CASE("training targets are the phase-1 estimates scaled by 1/r") {
  Rng rng(1);
  auto estimator = [](ItemKey) { return 50.0; };
  const TrainingSet training = build_training_set(estimator, 100, 10, 0.1, rng);
  REQUIRE(training.items.size() == 10);
  for (double target : training.targets) {
    CHECK(target == doctest::Approx(500.0));
  }

  Rng rng2(1);
  const TrainingSet raw = build_training_set(estimator, 100, 10, 1.0, rng2);
  for (double target : raw.targets) CHECK(target == doctest::Approx(50.0));
}

TEST_CASE("training items are distinct and cover the domain when t = |D|") {
  Rng rng(9);
  auto estimator = [](ItemKey d) { return static_cast<double>(d); };
  const TrainingSet training = build_training_set(estimator, 32, 32, 0.5, rng);
  const std::set<ItemKey> unique(training.items.begin(), training.items.end());
  CHECK(unique.size() == 32);
  CHECK(*unique.begin() == 0);
  CHECK(*unique.rbegin() == 31);
  CHECK_FALSE(training.clamped);
}

TEST_CASE("t beyond the domain clamps with a flag") {
  Rng rng(3);
  auto estimator = [](ItemKey) { return 1.0; };
  const TrainingSet training =
      build_training_set(estimator, 16, 1000, 0.5, rng);
  CHECK(training.items.size() == 16);
  CHECK(training.clamped);

  CHECK_THROWS_AS(build_training_set(estimator, 16, 0, 0.5, rng), ConfigError);
  CHECK_THROWS_AS(build_training_set(estimator, 16, 4, 0.0, rng), ConfigError);
}

TEST_CASE("boundary: descending prefix within the theta budget") {
  // total 20, budget 10: the prefix {10} qualifies, {10, 5} does not.
  CHECK(boundary_from_values({10, 5, 3, 2}, 0.5) == 10.0);

  // theta = 1: the whole prefix qualifies, P is the smallest value.
  CHECK(boundary_from_values({10, 5, 3, 2}, 1.0) == 2.0);

  // Budget below the largest value: no high-frequent items at all.
  const double p = boundary_from_values({10, 5, 3, 2}, 0.1);
  CHECK(std::isinf(p));

  CHECK_THROWS_AS(boundary_from_values({}, 0.5), ContractError);
  CHECK_THROWS_AS(boundary_from_values({1.0}, 0.0), ConfigError);
  CHECK_THROWS_AS(boundary_from_values({1.0}, 1.5), ConfigError);
}

TEST_CASE("boundary consistency: mass above P stays within budget plus ties") {
  Rng rng(17);
  for (int instance = 0; instance < 20; ++instance) {
    std::vector<double> values;
    const std::size_t n = 3 + rng.next_below(40);
    for (std::size_t i = 0; i < n; ++i) {
      values.push_back(static_cast<double>(rng.next_below(30)));
    }
    const double theta = 0.1 + 0.8 * rng.next_double();
    const double boundary = boundary_from_values(values, theta);

    double total = 0.0, above = 0.0, ties = 0.0;
    for (double v : values) {
      total += v;
      if (v > boundary) above += v;
      if (v == boundary) ties += v;
    }
    if (std::isinf(boundary)) continue;
    CHECK(above + ties <= theta * total + ties + 1e-9);
  }
}

TEST_CASE("fitted model classifies exactly like its published view") {
  const TrainingSet training = linear_training(200);
  FrequencyModel model = FrequencyModel::fit(training, {0.1, 50, 3}, 0.4);
  model.compute_boundary(training.items);
  const PublishedModel published = model.publish();

  for (ItemKey d = 0; d < 200; ++d) {
    CHECK(model.predict(d) == published.predict(d));
    CHECK(model.is_high(d) == published.is_high(d));
  }
}

TEST_CASE("model json round trip preserves predictions bit for bit") {
  const auto dir =
      std::filesystem::temp_directory_path() / "ldplcm_model_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "model.json";

  TrainingSet training;
  Rng rng(8);
  for (ItemKey d = 0; d < 500; ++d) {
    training.items.push_back(d);
    training.targets.push_back(1000.0 / (1.0 + d) + rng.next_double());
  }
  FrequencyModel model = FrequencyModel::fit(training, {0.1, 100, 3}, 0.5);
  model.compute_boundary(training.items);
  model.set_protocol_stamp({8, 64, 4.0, 0x1234, 500});
  model.save(path);

  const FrequencyModel loaded = FrequencyModel::load(path);
  CHECK(loaded.theta() == model.theta());
  CHECK(loaded.boundary() == model.boundary());
  REQUIRE(loaded.protocol_stamp().has_value());
  CHECK(*loaded.protocol_stamp() == *model.protocol_stamp());
  for (int probe = 0; probe < 1000; ++probe) {
    const ItemKey d = rng.next_below(2000);
    CHECK(loaded.predict(d) == model.predict(d));
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("empty ensemble round trip keeps the base prediction exact") {
  TrainingSet constant;
  for (ItemKey d = 0; d < 10; ++d) {
    constant.items.push_back(d);
    constant.targets.push_back(0.1 + 0.2);  // deliberately non-representable
  }
  FrequencyModel model = FrequencyModel::fit(constant, {0.1, 50, 3}, 0.5);
  model.compute_boundary(constant.items);
  CHECK(model.tree_count() == 0);

  const auto j = model.to_json();
  const FrequencyModel loaded = FrequencyModel::from_json(j);
  CHECK(loaded.predict(3) == model.predict(3));
  CHECK(loaded.ensemble().base_prediction == model.ensemble().base_prediction);
}

TEST_CASE("infinite boundary survives serialization") {
  TrainingSet training;
  training.items = {0, 1, 2};
  training.targets = {100.0, 1.0, 1.0};
  FrequencyModel model = FrequencyModel::fit(training, {0.1, 10, 2}, 0.05);
  model.compute_boundary(training.items);
  CHECK(std::isinf(model.boundary()));

  const FrequencyModel loaded = FrequencyModel::from_json(model.to_json());
  CHECK(std::isinf(loaded.boundary()));
  CHECK_FALSE(loaded.is_high(0));  // nothing is high under an infinite P
}

TEST_CASE("the default small-domain model file is lighter than a 32x512 sketch") {
  const auto dir =
      std::filesystem::temp_directory_path() / "ldplcm_size_test";
  std::filesystem::create_directories(dir);

  TrainingSet training;
  Rng rng(21);
  for (ItemKey d = 0; d < 10000; ++d) {
    training.items.push_back(d);
    training.targets.push_back(5000.0 / (1.0 + d) + rng.next_double() * 3.0);
  }
  FrequencyModel model = FrequencyModel::fit(training, {0.1, 100, 3}, 0.4);
  model.compute_boundary(training.items);
  model.save(dir / "model.json");

  AggregateSketch sketch(HashFamily(32, 512, 1),
                         PrivacyParams::from_epsilon(4.0));
  save_sketch(sketch, dir / "sketch.bin");

  const auto model_bytes = std::filesystem::file_size(dir / "model.json");
  const auto sketch_bytes = std::filesystem::file_size(dir / "sketch.bin");
  CHECK(model_bytes < sketch_bytes);
  std::filesystem::remove_all(dir);
}
