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

#include "ldplcm/freq_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "ldplcm/errors.hpp"

namespace ldplcm {

using nlohmann::ordered_json;

TrainingSet build_training_set(
    const std::function<double(ItemKey)>& phase1_estimate,
    std::uint64_t domain_size, std::size_t t, double r, Rng& rng) {
  if (!(r > 0.0 && r <= 1.0)) {
    throw ConfigError("build_training_set: sampling rate r must be in (0, 1]");
  }
  if (t == 0) throw ConfigError("build_training_set: t must be >= 1");
  if (domain_size == 0) {
    throw ConfigError("build_training_set: empty domain");
  }

  TrainingSet training;
  if (t > domain_size) {
    t = static_cast<std::size_t>(domain_size);
    training.clamped = true;
  }

  // Partial Fisher-Yates over the dense domain.
  std::vector<ItemKey> pool(domain_size);
  for (std::uint64_t i = 0; i < domain_size; ++i) pool[i] = i;
  for (std::size_t i = 0; i < t; ++i) {
    const std::size_t j =
        i + rng.next_below(static_cast<std::uint32_t>(domain_size - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(t);

  training.items = std::move(pool);
  training.targets.reserve(t);
  for (ItemKey item : training.items) {
    training.targets.push_back(phase1_estimate(item) / r);
  }
  return training;
}

double boundary_from_values(std::vector<double> values, double theta,
                            std::optional<double> total_mass) {
  if (values.empty()) {
    throw ContractError("boundary_from_values: empty probe set");
  }
  if (!(theta > 0.0 && theta <= 1.0)) {
    throw ConfigError("boundary_from_values: theta must be in (0, 1]");
  }
  std::sort(values.begin(), values.end(), std::greater<double>());
  // total accumulates in the same order as the prefix below, so the full
  // prefix compares equal to the budget when theta is exactly 1.
  double total = 0.0;
  for (double v : values) total += v;
  if (total_mass.has_value()) total = *total_mass;
  const double budget = theta * total;

  double prefix = 0.0;
  std::size_t id = 0;  // length of the qualifying prefix
  for (std::size_t i = 0; i < values.size(); ++i) {
    prefix += values[i];
    if (prefix <= budget) {
      id = i + 1;
    } else {
      break;
    }
  }
  if (id == 0) return std::numeric_limits<double>::infinity();
  return values[id - 1];
}

FrequencyModel FrequencyModel::fit(const TrainingSet& training,
                                   const GbrtConfig& config, double theta) {
  if (training.items.empty() ||
      training.items.size() != training.targets.size()) {
    throw ContractError("FrequencyModel::fit: empty or mismatched training set");
  }
  if (!(theta > 0.0 && theta <= 1.0)) {
    throw ConfigError("FrequencyModel::fit: theta must be in (0, 1]");
  }
  std::vector<double> features;
  features.reserve(training.items.size());
  for (ItemKey item : training.items) {
    features.push_back(static_cast<double>(item));
  }

  FrequencyModel model;
  model.gbrt_ = Gbrt::fit(features, training.targets, config);
  model.config_ = config;
  model.theta_ = theta;
  return model;
}

void FrequencyModel::compute_boundary(std::span<const ItemKey> probe_items,
                                      std::optional<double> probe_mass) {
  if (probe_items.empty()) {
    throw ContractError("FrequencyModel: empty boundary probe set");
  }
  std::vector<double> predictions;
  predictions.reserve(probe_items.size());
  for (ItemKey item : probe_items) predictions.push_back(predict(item));
  boundary_ = boundary_from_values(std::move(predictions), theta_, probe_mass);
}

namespace {

constexpr int kModelVersion = 1;

ordered_json node_to_json(const std::vector<TreeNode>& nodes,
                          std::int32_t at) {
  const TreeNode& node = nodes[at];
  if (node.is_leaf()) {
    return ordered_json{{"value", node.value}};
  }
  return ordered_json{{"threshold", node.threshold},
                      {"left", node_to_json(nodes, node.left)},
                      {"right", node_to_json(nodes, node.right)}};
}

std::int32_t node_from_json(const ordered_json& j,
                            std::vector<TreeNode>& nodes) {
  const auto index = static_cast<std::int32_t>(nodes.size());
  nodes.emplace_back();
  if (j.contains("value")) {
    nodes[index].value = j.at("value").get<double>();
    return index;
  }
  const double threshold = j.at("threshold").get<double>();
  const std::int32_t left = node_from_json(j.at("left"), nodes);
  const std::int32_t right = node_from_json(j.at("right"), nodes);
  nodes[index].threshold = threshold;
  nodes[index].left = left;
  nodes[index].right = right;
  return index;
}

ordered_json boundary_to_json(double boundary) {
  if (std::isinf(boundary)) return "inf";
  return boundary;
}

double boundary_from_json(const ordered_json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") {
      return std::numeric_limits<double>::infinity();
    }
    throw IoError("model file: unrecognized boundary value");
  }
  return j.get<double>();
}

}  // namespace

ordered_json FrequencyModel::to_json() const {
  ordered_json j;
  j["format_version"] = kModelVersion;
  j["feature_codec"] = "item_key_as_double";
  j["hyperparameters"] = {{"learning_rate", config_.learning_rate},
                          {"n_estimators", config_.n_estimators},
                          {"max_depth", config_.max_depth}};
  j["theta"] = theta_;
  j["boundary"] = boundary_to_json(boundary_);
  j["base_prediction"] = gbrt_.base_prediction;
  j["learning_rate"] = gbrt_.learning_rate;
  if (stamp_.has_value()) {
    j["protocol"] = {{"k", stamp_->k},
                     {"m", stamp_->m},
                     {"epsilon", stamp_->epsilon},
                     {"master_seed", stamp_->master_seed},
                     {"domain_size", stamp_->domain_size}};
  }
  ordered_json trees = ordered_json::array();
  for (const RegressionTree& tree : gbrt_.trees) {
    trees.push_back(node_to_json(tree.nodes(), 0));
  }
  j["trees"] = std::move(trees);
  return j;
}

FrequencyModel FrequencyModel::from_json(const ordered_json& j) {
  if (j.at("format_version").get<int>() != kModelVersion) {
    throw IoError("model file: unsupported format version");
  }
  if (j.at("feature_codec").get<std::string>() != "item_key_as_double") {
    throw IoError("model file: unknown feature codec");
  }
  FrequencyModel model;
  const auto& hyper = j.at("hyperparameters");
  model.config_.learning_rate = hyper.at("learning_rate").get<double>();
  model.config_.n_estimators = hyper.at("n_estimators").get<int>();
  model.config_.max_depth = hyper.at("max_depth").get<int>();
  model.theta_ = j.at("theta").get<double>();
  model.boundary_ = boundary_from_json(j.at("boundary"));
  model.gbrt_.base_prediction = j.at("base_prediction").get<double>();
  model.gbrt_.learning_rate = j.at("learning_rate").get<double>();
  if (j.contains("protocol")) {
    const auto& p = j.at("protocol");
    model.stamp_ = ProtocolStamp{p.at("k").get<std::uint32_t>(),
                                 p.at("m").get<std::uint32_t>(),
                                 p.at("epsilon").get<double>(),
                                 p.at("master_seed").get<std::uint64_t>(),
                                 p.at("domain_size").get<std::uint64_t>()};
  }
  for (const auto& tree_json : j.at("trees")) {
    std::vector<TreeNode> nodes;
    node_from_json(tree_json, nodes);
    model.gbrt_.trees.emplace_back(std::move(nodes));
  }
  return model;
}

void FrequencyModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("FrequencyModel::save: cannot open " + path.string());
  out << to_json().dump(2) << '\n';
  if (!out) throw IoError("FrequencyModel::save: write failed");
}

FrequencyModel FrequencyModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("FrequencyModel::load: cannot open " + path.string());
  ordered_json j;
  try {
    in >> j;
    return from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("FrequencyModel::load: " + std::string(e.what()));
  }
}

}  // namespace ldplcm
