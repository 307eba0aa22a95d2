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

#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "ldplcm/client.hpp"
#include "ldplcm/gbrt.hpp"
#include "ldplcm/hash.hpp"
#include "ldplcm/rng.hpp"

namespace ldplcm {

// Sampled domain items with their phase-1 frequency estimates scaled back to
// population scale (estimate / r).
struct TrainingSet {
  std::vector<ItemKey> items;
  std::vector<double> targets;
  bool clamped = false;  // t exceeded the domain and was clamped
};

// Draws t items uniformly without replacement from [0, domain_size) and
// labels each with phase1_estimate(item) / r. t larger than the domain is
// clamped (flagged in the result).
TrainingSet build_training_set(
    const std::function<double(ItemKey)>& phase1_estimate,
    std::uint64_t domain_size, std::size_t t, double r, Rng& rng);

// Sorts the values descending and returns the value at the end of the
// longest prefix whose sum stays within theta * total. Returns +inf when
// even the single largest value exceeds the budget (no high-frequent items).
//
// By default total is the sum of the values themselves. When the caller
// knows the probe set's true mass (the server always knows the population
// count exactly, since every client sends one report), passing it as
// `total_mass` keeps the budget stable: a sum of signed, noisy per-item
// estimates has variance comparable to the whole population at desk scale
// and intermittently collapses the boundary to +inf.
double boundary_from_values(std::vector<double> values, double theta,
                            std::optional<double> total_mass = std::nullopt);

// Header fields another artifact must match before this model may be paired
// with a sketch.
struct ProtocolStamp {
  std::uint32_t k = 0;
  std::uint32_t m = 0;
  double epsilon = 0.0;
  std::uint64_t master_seed = 0;
  std::uint64_t domain_size = 0;

  bool operator==(const ProtocolStamp&) const = default;
};

// The learned frequency model g: a boosted-tree ensemble over the item key
// (cast to double — the one feature), plus the high/low boundary P and the
// mass ratio theta it was computed with. Immutable once fitted; prediction
// is safe from any number of threads.
class FrequencyModel {
 public:
  static FrequencyModel fit(const TrainingSet& training,
                            const GbrtConfig& config, double theta);

  double predict(ItemKey d) const {
    return gbrt_.predict(static_cast<double>(d));
  }

  // Sorts predictions over the probe items descending and applies the
  // theta-prefix rule. The training items are the usual probe set.
  // `probe_mass`, when known, pins the budget to the probe set's exact share
  // of the population mass instead of the noisy prediction sum.
  void compute_boundary(std::span<const ItemKey> probe_items,
                        std::optional<double> probe_mass = std::nullopt);

  double boundary() const { return boundary_; }
  double theta() const { return theta_; }
  const Gbrt& ensemble() const { return gbrt_; }
  std::size_t tree_count() const { return gbrt_.trees.size(); }

  bool is_high(ItemKey d) const { return predict(d) >= boundary_; }

  // View that phase-2 clients and the estimator share.
  PublishedModel publish() const {
    return PublishedModel{[this](ItemKey d) { return predict(d); }, boundary_};
  }

  void set_protocol_stamp(ProtocolStamp stamp) { stamp_ = stamp; }
  const std::optional<ProtocolStamp>& protocol_stamp() const { return stamp_; }

  nlohmann::ordered_json to_json() const;
  static FrequencyModel from_json(const nlohmann::ordered_json& j);
  void save(const std::filesystem::path& path) const;
  static FrequencyModel load(const std::filesystem::path& path);

 private:
  FrequencyModel() = default;

  Gbrt gbrt_;
  GbrtConfig config_;
  double theta_ = 0.0;
  double boundary_ = std::numeric_limits<double>::infinity();
  std::optional<ProtocolStamp> stamp_;
};

}  // namespace ldplcm
