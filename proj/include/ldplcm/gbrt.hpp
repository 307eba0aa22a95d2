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
#include <span>
#include <vector>

namespace ldplcm {

// One node of a binary regression tree over a single scalar feature.
// Internal nodes route x < threshold to `left`, x >= threshold to `right`;
// leaves carry the prediction and have left == right == -1.
struct TreeNode {
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;

  bool is_leaf() const { return left < 0; }
};

class RegressionTree {
 public:
  RegressionTree() = default;
  explicit RegressionTree(std::vector<TreeNode> nodes)
      : nodes_(std::move(nodes)) {}

  double predict(double x) const {
    std::int32_t at = 0;
    while (!nodes_[at].is_leaf()) {
      at = x < nodes_[at].threshold ? nodes_[at].left : nodes_[at].right;
    }
    return nodes_[at].value;
  }

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  bool trivial() const { return nodes_.size() == 1 && nodes_[0].value == 0.0; }

  // Exact greedy least-squares fit: every split between consecutive distinct
  // feature values is scored by variance reduction; leaves predict the mean.
  // `order` must index x ascending.
  static RegressionTree fit(std::span<const double> x,
                            std::span<const double> y,
                            std::span<const std::uint32_t> order,
                            int max_depth);

 private:
  std::vector<TreeNode> nodes_;
};

struct GbrtConfig {
  double learning_rate = 0.1;
  int n_estimators = 100;
  int max_depth = 3;
};

// Squared-loss gradient boosting on one scalar feature. Stage zero is the
// target mean; each later stage fits a tree to the running residuals and is
// shrunk by the learning rate. Training stops early once the residuals hit
// exactly zero, so constant targets yield an empty ensemble.
struct Gbrt {
  double base_prediction = 0.0;
  double learning_rate = 0.1;
  std::vector<RegressionTree> trees;

  double predict(double x) const {
    double sum = 0.0;
    for (const RegressionTree& tree : trees) sum += tree.predict(x);
    return base_prediction + learning_rate * sum;
  }

  static Gbrt fit(std::span<const double> x, std::span<const double> y,
                  const GbrtConfig& config);
};

}  // namespace ldplcm
