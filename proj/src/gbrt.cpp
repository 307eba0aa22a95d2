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

#include "ldplcm/gbrt.hpp"

#include <algorithm>
#include <numeric>

#include "ldplcm/errors.hpp"

namespace ldplcm {

namespace {

struct Builder {
  std::span<const double> x;
  std::span<const double> y;
  std::vector<std::uint32_t> order;  // partitioned in place during the build
  std::vector<TreeNode> nodes;
  int max_depth;

  // Builds the subtree over order[lo, hi) and returns its node index.
  std::int32_t build(std::size_t lo, std::size_t hi, int depth) {
    const auto node_index = static_cast<std::int32_t>(nodes.size());
    nodes.emplace_back();

    double sum = 0.0;
    for (std::size_t i = lo; i < hi; ++i) sum += y[order[i]];
    const std::size_t count = hi - lo;

    if (depth >= max_depth || count < 2 ||
        x[order[lo]] == x[order[hi - 1]]) {
      nodes[node_index].value = sum / static_cast<double>(count);
      return node_index;
    }

    // Score every boundary between consecutive distinct feature values.
    // gain = sumL^2/nL + sumR^2/nR - sum^2/n, the drop in squared error.
    double best_gain = 0.0;
    std::size_t best_cut = 0;
    double left_sum = 0.0;
    const double parent_score = sum * sum / static_cast<double>(count);
    for (std::size_t i = lo + 1; i < hi; ++i) {
      left_sum += y[order[i - 1]];
      if (x[order[i - 1]] == x[order[i]]) continue;
      const double nl = static_cast<double>(i - lo);
      const double nr = static_cast<double>(hi - i);
      const double right_sum = sum - left_sum;
      const double gain =
          left_sum * left_sum / nl + right_sum * right_sum / nr - parent_score;
      if (gain > best_gain) {
        best_gain = gain;
        best_cut = i;
      }
    }

    if (best_cut == 0) {  // no split improves on the leaf
      nodes[node_index].value = sum / static_cast<double>(count);
      return node_index;
    }

    nodes[node_index].threshold =
        (x[order[best_cut - 1]] + x[order[best_cut]]) / 2.0;
    const std::int32_t left = build(lo, best_cut, depth + 1);
    const std::int32_t right = build(best_cut, hi, depth + 1);
    nodes[node_index].left = left;
    nodes[node_index].right = right;
    return node_index;
  }
};

}  // namespace

RegressionTree RegressionTree::fit(std::span<const double> x,
                                   std::span<const double> y,
                                   std::span<const std::uint32_t> order,
                                   int max_depth) {
  if (x.empty() || x.size() != y.size() || order.size() != x.size()) {
    throw ContractError("RegressionTree::fit: inconsistent inputs");
  }
  Builder builder{x, y, {order.begin(), order.end()}, {}, max_depth};
  builder.build(0, order.size(), 0);
  return RegressionTree(std::move(builder.nodes));
}

Gbrt Gbrt::fit(std::span<const double> x, std::span<const double> y,
               const GbrtConfig& config) {
  if (x.empty() || x.size() != y.size()) {
    throw ContractError("Gbrt::fit: empty or mismatched training set");
  }
  if (config.n_estimators < 0 || config.max_depth < 1 ||
      !(config.learning_rate > 0.0)) {
    throw ConfigError("Gbrt::fit: bad hyperparameters");
  }

  std::vector<std::uint32_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::uint32_t a, std::uint32_t b) { return x[a] < x[b]; });

  Gbrt model;
  model.learning_rate = config.learning_rate;

  // All-equal targets: the mean is the value itself and every residual is
  // exactly zero, so the ensemble stays empty.
  const auto [min_y, max_y] = std::minmax_element(y.begin(), y.end());
  if (*min_y == *max_y) {
    model.base_prediction = *min_y;
    return model;
  }
  model.base_prediction =
      std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());

  std::vector<double> residuals(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    residuals[i] = y[i] - model.base_prediction;
  }

  model.trees.reserve(static_cast<std::size_t>(config.n_estimators));
  for (int stage = 0; stage < config.n_estimators; ++stage) {
    double ssr = 0.0;
    for (double r : residuals) ssr += r * r;
    if (ssr == 0.0) break;

    RegressionTree tree =
        RegressionTree::fit(x, residuals, order, config.max_depth);
    for (std::size_t i = 0; i < residuals.size(); ++i) {
      residuals[i] -= config.learning_rate * tree.predict(x[i]);
    }
    model.trees.push_back(std::move(tree));
  }
  return model;
}

}  // namespace ldplcm
