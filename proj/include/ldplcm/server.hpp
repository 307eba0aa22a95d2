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

#include <optional>

#include "ldplcm/client.hpp"
#include "ldplcm/privacy.hpp"
#include "ldplcm/sketch.hpp"

namespace ldplcm {

// Mean over rows of the sketch cell the item hashes to: (1/k) sum_l M[l, h_l(d)].
// The raw readout every estimator debiases.
double row_average_at(const AggregateSketch& sketch, ItemKey d);

// Sketch-side estimate of a low-frequent item's frequency:
//   (m / (m - 1)) * (row_average - (1 - theta) * n / m)
// where n is the number of reports absorbed into this sketch. The
// (1 - theta) factor removes the expected mass of the all-(-1) dummy
// reports, which spread uniformly and contribute zero in expectation.
double estimate_low(const AggregateSketch& sketch, double theta, ItemKey d);

// The baseline estimator: same formula with theta = 0 (no dummy traffic).
double estimate_apple_cms(const AggregateSketch& sketch, ItemKey d);

// Full two-branch estimator: items the model classifies high (g(d) >= P)
// get the model prediction, everything else the debiased sketch readout.
// `via_model`, when non-null, receives the branch taken.
double estimate_ldplcm(const AggregateSketch& sketch,
                       const PublishedModel& model, double theta, ItemKey d,
                       bool* via_model = nullptr);

// Upper bound on the variance of the un-debiased readout (1/k) sum M[l,h_l(d)]
// for a low-frequent item d:
//   n (c_eps^2 - 1) / 4 + (n (1 - theta) - f_d) / m + sum_sq_low / (k m).
double variance_bound(double n, double m, double k, double theta, double f_d,
                      double sum_sq_low, const PrivacyParams& params);

// Server-side bookkeeping for one protocol run: the live sketch, the phase,
// and the model published between phases. Reports that do not match the
// sketch shape are rejected and counted, never absorbed.
class ServerState {
 public:
  ServerState(HashFamily family, PrivacyParams params, double theta)
      : sketch_(std::move(family), params), theta_(theta) {}

  // Phase transition; entering phase 2 reinitializes the matrix so nothing
  // from phase 1 leaks into the final sketch.
  void begin_phase(Phase phase) {
    phase_ = phase;
    sketch_.reset();
  }

  bool absorb_report(const Report& report) {
    if (report.bits.size() != sketch_.width() ||
        report.row >= sketch_.rows()) {
      ++rejected_;
      return false;
    }
    sketch_.absorb(report);
    return true;
  }

  void merge_shard(const AggregateSketch& shard) { sketch_.merge(shard); }

  void publish_model(PublishedModel model) { model_ = std::move(model); }

  // Phase-2 estimate for d. Requires a published model.
  double estimate(ItemKey d, bool* via_model = nullptr) const {
    if (!model_.has_value()) {
      throw ContractError("ServerState: estimate requires a published model");
    }
    return estimate_ldplcm(sketch_, *model_, theta_, d, via_model);
  }

  const AggregateSketch& sketch() const { return sketch_; }
  AggregateSketch& sketch() { return sketch_; }
  Phase phase() const { return phase_; }
  double theta() const { return theta_; }
  std::uint64_t rejected_count() const { return rejected_; }
  const std::optional<PublishedModel>& model() const { return model_; }

 private:
  AggregateSketch sketch_;
  double theta_;
  Phase phase_ = Phase::one;
  std::optional<PublishedModel> model_;
  std::uint64_t rejected_ = 0;
};

}  // namespace ldplcm
