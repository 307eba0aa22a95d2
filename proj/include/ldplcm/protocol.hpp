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
#include <optional>
#include <span>
#include <vector>

#include "ldplcm/config.hpp"
#include "ldplcm/dataset.hpp"
#include "ldplcm/freq_model.hpp"
#include "ldplcm/server.hpp"

namespace ldplcm {

enum class Method { ldplcm, apple_cms };

// What stands in for the phase-1 model: the learned regressor, or a
// ground-truth lookup table (isolates the estimator in tests).
enum class ModelSource { learned, truth_oracle };

struct RunOptions {
  Method method = Method::ldplcm;
  ModelSource model_source = ModelSource::learned;
  int jobs = 1;
};

// Everything one protocol run produces. wall_seconds is the only
// non-reproducible field and is deliberately excluded from summary JSON.
struct RunResult {
  std::vector<double> estimates;        // indexed by item key
  std::vector<std::uint8_t> via_model;  // 1 = model branch served this item
  std::vector<std::uint8_t> true_high;  // theta-prefix rule on true counts
  double sse_total = 0.0;
  double sse_high = 0.0;
  double sse_low = 0.0;
  double mse = 0.0;
  std::uint64_t n_phase1 = 0;
  std::uint64_t n_phase2 = 0;
  std::uint64_t rejected = 0;
  std::uint64_t domain_size = 0;
  std::uint64_t model_branch_items = 0;
  std::size_t model_trees = 0;
  double boundary = 0.0;
  double wall_seconds = 0.0;

  nlohmann::ordered_json summary(const ExperimentConfig& cfg,
                                 Method method) const;
};

struct RunArtifacts {
  RunResult result;
  AggregateSketch sketch;                 // the final (phase-2) sketch
  std::optional<FrequencyModel> model;    // absent for the baseline / oracle
};

// Sum and mean of squared differences between aligned truth/estimate
// vectors; mse divides by domain_size (pass the domain as the denominator).
double sse(std::span<const double> truth, std::span<const double> estimates);
double mse(std::span<const double> truth, std::span<const double> estimates,
           std::uint64_t domain_size);

// High/low split of the true counts by the theta-prefix rule; used for the
// metric breakdown so accuracy splits do not depend on model mistakes.
std::vector<std::uint8_t> true_theta_partition(
    std::span<const std::uint64_t> truth, double theta);

// Builds the dataset a config names. Zipf data is generated from a seed
// derived from run_seed, so every trial sees a fresh population.
Dataset make_dataset(const DatasetSpec& spec, std::uint64_t run_seed);

// One end-to-end run over the given population: sample phase-1 clients,
// build their sketch, train/publish the model, rebuild the sketch from the
// phase-2 clients, estimate every domain item, compute metrics. The worker
// count never changes any output byte.
RunArtifacts run_protocol(const ExperimentConfig& cfg, const Dataset& data,
                          const RunOptions& options = {});

// Seed for trial `trial` of a sweep or bench: trial 0 is the configured
// seed itself, so a one-trial sweep reproduces a plain run exactly.
std::uint64_t trial_seed(std::uint64_t master_seed, int trial);

enum class SweepAxis { epsilon, m, k, r, theta, s, space };
SweepAxis sweep_axis_from_string(const std::string& name);
std::string sweep_axis_to_string(SweepAxis axis);

// Config for one sweep point: the axis value substituted into the base
// config. `space` interprets the value as total sketch kilobytes and derives
// m from it with k fixed.
ExperimentConfig apply_axis(const ExperimentConfig& base, SweepAxis axis,
                            double value);

struct TrialMetrics {
  int trial = 0;
  std::uint64_t seed = 0;
  double sse_total = 0.0;
  double sse_low = 0.0;
  double sse_high = 0.0;
  double mse = 0.0;
  double wall_seconds = 0.0;
};

struct SweepPoint {
  double axis_value = 0.0;
  ExperimentConfig config;
  std::vector<TrialMetrics> trials;
  double sse_total_mean = 0.0, sse_total_std = 0.0;
  double sse_low_mean = 0.0, sse_low_std = 0.0;
  double sse_high_mean = 0.0, sse_high_std = 0.0;
  double wall_seconds = 0.0;
};

using TrialCallback = std::function<void(
    std::size_t value_index, const TrialMetrics&, const RunResult&)>;

// Runs `trials` seeded repetitions of the base config per axis value. Trial
// seeds are shared across values, so adjacent points are paired comparisons.
std::vector<SweepPoint> sweep(const ExperimentConfig& base, SweepAxis axis,
                              const std::vector<double>& values, int trials,
                              int jobs, const TrialCallback& on_trial = {});

// Paired LDPLCM vs baseline comparison at one config.
struct BenchResult {
  std::vector<TrialMetrics> ldplcm;
  std::vector<TrialMetrics> apple_cms;
  int low_sse_wins = 0;  // trials where LDPLCM beat the baseline on true-low SSE
};
BenchResult bench(const ExperimentConfig& cfg, int trials, int jobs,
                  const TrialCallback& on_trial = {});

}  // namespace ldplcm
