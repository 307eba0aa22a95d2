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

#include <functional>
#include <limits>
#include <span>

#include "ldplcm/hash.hpp"
#include "ldplcm/privacy.hpp"
#include "ldplcm/report.hpp"
#include "ldplcm/rng.hpp"

namespace ldplcm {

// What the server publishes after phase 1: a frequency predictor g and the
// boundary P. An item is high-frequent iff g(d) >= P — the same rule on the
// client and in the estimator, so every item is classified identically on
// both sides. boundary defaults to +inf, which classifies nothing as high.
struct PublishedModel {
  std::function<double(ItemKey)> predict;
  double boundary = std::numeric_limits<double>::infinity();

  bool is_high(ItemKey d) const { return predict(d) >= boundary; }
};

enum class Phase : int { one = 1, two = 2 };

// One-hot encoding of a low-frequent item: +1 at h_row(d), -1 elsewhere.
std::vector<std::int8_t> encode_low(ItemKey d, const HashFamily& family,
                                    std::uint32_t row);

// Dummy encoding of a high-frequent item: -1 everywhere. It hits no hash
// cell, so it cannot collide with any low-frequent item.
std::vector<std::int8_t> encode_high(std::uint32_t m);

// Randomized response: each entry is negated independently with probability
// p_flip = 1 / (e^{eps/2} + 1). Exactly one Bernoulli draw per entry.
void perturb(std::span<std::int8_t> bits, const PrivacyParams& params,
             Rng& rng);

// Full client: draws the hash row uniformly, encodes by phase (phase 2
// consults the model; g(d) >= P takes the dummy path), perturbs, reports.
// Phase 2 requires a model. `took_high_branch`, when non-null, reports which
// encoding was used (test instrumentation).
Report client_report(ItemKey d, Phase phase, const PublishedModel* model,
                     const PrivacyParams& params, const HashFamily& family,
                     Rng& rng, bool* took_high_branch = nullptr);

// Allocation-free variant for tight simulation loops.
void client_report_into(ItemKey d, Phase phase, const PublishedModel* model,
                        const PrivacyParams& params, const HashFamily& family,
                        Rng& rng, Report& out,
                        bool* took_high_branch = nullptr);

}  // namespace ldplcm
