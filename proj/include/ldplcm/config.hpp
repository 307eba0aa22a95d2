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

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "json.hpp"
#include "ldplcm/gbrt.hpp"

namespace ldplcm {

struct DatasetSpec {
  enum class Kind { zipf, csv, dir };

  Kind kind = Kind::zipf;
  std::size_t n = 100000;        // zipf: record count
  double s = 1.1;                // zipf: skew
  std::uint64_t max_rank = 0;    // zipf: 0 = auto (10 n, capped)
  std::filesystem::path path;    // csv / dir input
};

// Full parameterization of one protocol run. Everything that can change an
// estimate lives here; execution details (worker count, output paths) do
// not, so reruns of the same config are bit-reproducible.
struct ExperimentConfig {
  double epsilon = 4.0;
  std::uint32_t m = 1024;
  std::uint32_t k = 64;
  double r = 0.1;                // phase-1 sampling rate
  double theta = 0.5;            // high-frequent mass ratio
  std::size_t t = 10000;         // training sample size (clamped to domain)
  GbrtConfig model;
  DatasetSpec dataset;
  std::uint64_t seed = 1;
  int trials = 10;               // sweep / bench repetitions

  // Throws ConfigError when any invariant is broken.
  void validate() const;

  nlohmann::ordered_json to_json() const;
  static ExperimentConfig from_json(const nlohmann::ordered_json& j);
  static ExperimentConfig load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
};

}  // namespace ldplcm
