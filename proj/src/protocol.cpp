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

#include "ldplcm/protocol.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <numeric>
#include <thread>

#include "ldplcm/kernels.hpp"

namespace ldplcm {

namespace {

// Sub-stream tags hung off the run seed. Client streams start high enough
// that they can never collide with the bookkeeping streams.
constexpr std::uint64_t kStreamHash = 1;
constexpr std::uint64_t kStreamSample = 2;
constexpr std::uint64_t kStreamTraining = 3;
constexpr std::uint64_t kStreamDataset = 4;
constexpr std::uint64_t kStreamClientBase = 16;
constexpr std::uint64_t kStreamTrialBase = std::uint64_t{1} << 20;

constexpr std::size_t kClientChunk = 4096;
constexpr std::size_t kMaxChunks = 64;

// Simulates the given clients and aggregates their reports. Clients are cut
// into fixed chunks (a function of the population size only), each chunk is
// absorbed into its own shard, and shards merge in chunk order — so the
// result is bit-identical for every worker count.
AggregateSketch simulate_clients(std::span<const std::size_t> client_indices,
                                 Phase phase, const PublishedModel* model,
                                 const HashFamily& family,
                                 const PrivacyParams& params,
                                 const Dataset& data, std::uint64_t run_seed,
                                 int jobs) {
  const std::size_t size = client_indices.size();
  const std::size_t chunk =
      std::max(kClientChunk, (size + kMaxChunks - 1) / kMaxChunks);
  const std::size_t n_chunks = size == 0 ? 0 : (size + chunk - 1) / chunk;

  std::vector<AggregateSketch> shards;
  shards.reserve(n_chunks);
  for (std::size_t c = 0; c < n_chunks; ++c) shards.emplace_back(family, params);

  std::atomic<std::size_t> next_chunk{0};
  std::mutex error_mutex;
  std::exception_ptr error;

  auto worker = [&] {
    Report scratch;
    try {
      for (;;) {
        const std::size_t c = next_chunk.fetch_add(1);
        if (c >= n_chunks) return;
        const std::size_t begin = c * chunk;
        const std::size_t end = std::min(begin + chunk, size);
        AggregateSketch& shard = shards[c];
        for (std::size_t i = begin; i < end; ++i) {
          const std::size_t g = client_indices[i];
          Rng rng(derive_seed(run_seed, kStreamClientBase + g));
          client_report_into(data.records[g], phase, model, params, family,
                             rng, scratch);
          shard.absorb(scratch);
        }
      }
    } catch (...) {
      const std::lock_guard<std::mutex> lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  };

  const int workers = static_cast<int>(std::clamp<std::size_t>(
      jobs < 1 ? 1 : static_cast<std::size_t>(jobs), 1,
      std::max<std::size_t>(n_chunks, 1)));
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(workers - 1));
  for (int w = 1; w < workers; ++w) threads.emplace_back(worker);
  worker();
  for (std::thread& thread : threads) thread.join();
  if (error) std::rethrow_exception(error);

  AggregateSketch merged(family, params);
  for (const AggregateSketch& shard : shards) merged.merge(shard);
  return merged;
}

nlohmann::ordered_json json_boundary(double boundary) {
  if (std::isinf(boundary)) return "inf";
  return boundary;
}

}  // namespace

double sse(std::span<const double> truth, std::span<const double> estimates) {
  if (truth.size() != estimates.size()) {
    throw ContractError("sse: misaligned vectors");
  }
  return kernels::active_backend().sum_sq_diff(truth.data(), estimates.data(),
                                               truth.size());
}

double mse(std::span<const double> truth, std::span<const double> estimates,
           std::uint64_t domain_size) {
  if (domain_size == 0) throw ContractError("mse: empty domain");
  return sse(truth, estimates) / static_cast<double>(domain_size);
}

std::vector<std::uint8_t> true_theta_partition(
    std::span<const std::uint64_t> truth, double theta) {
  std::vector<double> values(truth.begin(), truth.end());
  const double boundary = boundary_from_values(std::move(values), theta);
  std::vector<std::uint8_t> high(truth.size(), 0);
  for (std::size_t d = 0; d < truth.size(); ++d) {
    high[d] = static_cast<double>(truth[d]) >= boundary ? 1 : 0;
  }
  return high;
}

Dataset make_dataset(const DatasetSpec& spec, std::uint64_t run_seed) {
  switch (spec.kind) {
    case DatasetSpec::Kind::zipf:
      return gen_zipf(spec.n, spec.s, spec.max_rank,
                      derive_seed(run_seed, kStreamDataset));
    case DatasetSpec::Kind::csv:
      return ingest_csv(spec.path);
    case DatasetSpec::Kind::dir:
      return load_dataset(spec.path);
  }
  throw ContractError("unreachable dataset kind");
}

RunArtifacts run_protocol(const ExperimentConfig& cfg, const Dataset& data,
                          const RunOptions& options) {
  cfg.validate();
  if (data.records.empty() || data.domain_size == 0) {
    throw ConfigError("run_protocol: empty dataset");
  }
  const auto start = std::chrono::steady_clock::now();

  const PrivacyParams params = PrivacyParams::from_epsilon(cfg.epsilon);
  const HashFamily family(cfg.k, cfg.m, derive_seed(cfg.seed, kStreamHash));
  const std::size_t n = data.records.size();

  RunResult result;
  result.domain_size = data.domain_size;
  result.true_high = true_theta_partition(data.truth, cfg.theta);

  std::optional<FrequencyModel> model;
  PublishedModel published;
  ServerState server(family, params,
                     options.method == Method::apple_cms ? 0.0 : cfg.theta);

  if (options.method == Method::apple_cms) {
    // Single phase: every client reports the one-hot encoding.
    std::vector<std::size_t> everyone(n);
    std::iota(everyone.begin(), everyone.end(), 0);
    server.begin_phase(Phase::one);
    server.merge_shard(simulate_clients(everyone, Phase::one, nullptr, family,
                                        params, data, cfg.seed, options.jobs));
    published = PublishedModel{};  // boundary +inf: nothing is high
    published.predict = [](ItemKey) { return 0.0; };
    result.n_phase2 = server.sketch().report_count();
  } else {
    const auto sample_size =
        static_cast<std::size_t>(cfg.r * static_cast<double>(n));
    if (sample_size < 1) {
      throw ConfigError("run_protocol: phase-1 sample is empty; raise r or n");
    }
    if (sample_size >= n) {
      throw ConfigError("run_protocol: phase-2 population is empty; lower r");
    }

    // Sample floor(r n) phase-1 clients uniformly without replacement.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng sample_rng(derive_seed(cfg.seed, kStreamSample));
    for (std::size_t i = 0; i < sample_size; ++i) {
      const std::size_t j =
          i + sample_rng.next_below(static_cast<std::uint32_t>(n - i));
      std::swap(order[i], order[j]);
    }
    std::vector<std::uint8_t> in_phase1(n, 0);
    std::vector<std::size_t> phase1(order.begin(), order.begin() + sample_size);
    std::sort(phase1.begin(), phase1.end());
    for (std::size_t g : phase1) in_phase1[g] = 1;
    std::vector<std::size_t> phase2;
    phase2.reserve(n - sample_size);
    for (std::size_t g = 0; g < n; ++g) {
      if (!in_phase1[g]) phase2.push_back(g);
    }

    server.begin_phase(Phase::one);
    server.merge_shard(simulate_clients(phase1, Phase::one, nullptr, family,
                                        params, data, cfg.seed, options.jobs));
    result.n_phase1 = server.sketch().report_count();

    if (options.model_source == ModelSource::learned) {
      const AggregateSketch& phase1_sketch = server.sketch();
      Rng training_rng(derive_seed(cfg.seed, kStreamTraining));
      const TrainingSet training = build_training_set(
          [&](ItemKey d) { return estimate_apple_cms(phase1_sketch, d); },
          data.domain_size, cfg.t, cfg.r, training_rng);
      model = FrequencyModel::fit(training, cfg.model, cfg.theta);
      // The boundary budget uses the probe set's exact mass share: the
      // population count is n_phase1 / r, and the probe covers
      // t / domain_size of it. A budget summed from the signed, noisy
      // per-item estimates instead would fluctuate on the order of the
      // whole population at this scale.
      const double population =
          static_cast<double>(result.n_phase1) / cfg.r;
      const double probe_mass =
          population * static_cast<double>(training.items.size()) /
          static_cast<double>(data.domain_size);
      model->compute_boundary(training.items, probe_mass);
      model->set_protocol_stamp({cfg.k, cfg.m, cfg.epsilon,
                                 family.master_seed(), data.domain_size});
      published = model->publish();
    } else {
      // Ground-truth oracle: classification by the theta-prefix rule on the
      // exact counts.
      std::vector<double> truth_values(data.truth.begin(), data.truth.end());
      const double true_boundary =
          boundary_from_values(std::move(truth_values), cfg.theta);
      published.predict = [&data](ItemKey d) {
        return static_cast<double>(data.truth[d]);
      };
      published.boundary = true_boundary;
    }

    // Phase handover: the matrix is reinitialized, so phase-1 reports can
    // never contribute to the final sketch.
    server.begin_phase(Phase::two);
    server.merge_shard(simulate_clients(phase2, Phase::two, &published,
                                        family, params, data, cfg.seed,
                                        options.jobs));
    result.n_phase2 = server.sketch().report_count();
  }

  server.publish_model(published);
  result.rejected = server.rejected_count();
  result.boundary = published.boundary;
  result.model_trees = model.has_value() ? model->tree_count() : 0;

  result.estimates.resize(data.domain_size);
  result.via_model.resize(data.domain_size);
  for (std::uint64_t d = 0; d < data.domain_size; ++d) {
    bool via_model = false;
    result.estimates[d] = server.estimate(d, &via_model);
    result.via_model[d] = via_model ? 1 : 0;
    if (via_model) ++result.model_branch_items;
  }

  // sse_total is the sum of the two partition buckets by construction.
  double sse_high = 0.0, sse_low = 0.0;
  for (std::uint64_t d = 0; d < data.domain_size; ++d) {
    const double diff =
        static_cast<double>(data.truth[d]) - result.estimates[d];
    (result.true_high[d] ? sse_high : sse_low) += diff * diff;
  }
  result.sse_high = sse_high;
  result.sse_low = sse_low;
  result.sse_total = sse_high + sse_low;
  result.mse = result.sse_total / static_cast<double>(data.domain_size);

  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();

  return RunArtifacts{std::move(result),
                      std::move(server.sketch()),
                      std::move(model)};
}

nlohmann::ordered_json RunResult::summary(const ExperimentConfig& cfg,
                                          Method method) const {
  nlohmann::ordered_json j;
  j["method"] = method == Method::ldplcm ? "ldplcm" : "apple-cms";
  j["config"] = cfg.to_json();
  j["dataset"] = {{"domain_size", domain_size},
                  {"n_records", n_phase1 + n_phase2}};
  j["reports"] = {{"phase1", n_phase1},
                  {"phase2", n_phase2},
                  {"rejected", rejected}};
  j["model"] = {{"boundary", json_boundary(boundary)},
                {"trees", model_trees},
                {"branch_model_items", model_branch_items}};
  j["metrics"] = {{"sse_total", sse_total},
                  {"sse_high", sse_high},
                  {"sse_low", sse_low},
                  {"mse", mse}};
  return j;
}

std::uint64_t trial_seed(std::uint64_t master_seed, int trial) {
  if (trial == 0) return master_seed;
  return derive_seed(master_seed,
                     kStreamTrialBase + static_cast<std::uint64_t>(trial));
}

SweepAxis sweep_axis_from_string(const std::string& name) {
  if (name == "epsilon") return SweepAxis::epsilon;
  if (name == "m") return SweepAxis::m;
  if (name == "k") return SweepAxis::k;
  if (name == "r") return SweepAxis::r;
  if (name == "theta") return SweepAxis::theta;
  if (name == "s") return SweepAxis::s;
  if (name == "space") return SweepAxis::space;
  throw ConfigError("unknown sweep axis: " + name);
}

std::string sweep_axis_to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::epsilon: return "epsilon";
    case SweepAxis::m: return "m";
    case SweepAxis::k: return "k";
    case SweepAxis::r: return "r";
    case SweepAxis::theta: return "theta";
    case SweepAxis::s: return "s";
    case SweepAxis::space: return "space";
  }
  throw ContractError("unreachable sweep axis");
}

ExperimentConfig apply_axis(const ExperimentConfig& base, SweepAxis axis,
                            double value) {
  const auto to_count = [&](double v, const char* what) {
    if (!(v >= 1.0) || v > 1e9) {
      throw ConfigError(std::string("sweep: bad ") + what + " value");
    }
    return static_cast<std::uint32_t>(std::llround(v));
  };
  ExperimentConfig cfg = base;
  switch (axis) {
    case SweepAxis::epsilon:
      cfg.epsilon = value;
      break;
    case SweepAxis::m:
      cfg.m = to_count(value, "m");
      break;
    case SweepAxis::k:
      cfg.k = to_count(value, "k");
      break;
    case SweepAxis::r:
      cfg.r = value;
      break;
    case SweepAxis::theta:
      cfg.theta = value;
      break;
    case SweepAxis::s:
      if (cfg.dataset.kind != DatasetSpec::Kind::zipf) {
        throw ConfigError("sweep axis s requires a zipf dataset");
      }
      cfg.dataset.s = value;
      break;
    case SweepAxis::space: {
      // value is the total sketch budget in KiB; k stays fixed.
      if (!(value > 0.0) || value > 1e7) {
        throw ConfigError("sweep: bad space value");
      }
      const double cells = value * 1024.0 / 8.0;
      cfg.m = std::max<std::uint32_t>(
          2, static_cast<std::uint32_t>(std::llround(cells / cfg.k)));
      break;
    }
  }
  cfg.validate();
  return cfg;
}

namespace {

TrialMetrics metrics_from(const RunResult& result, int trial,
                          std::uint64_t seed) {
  return TrialMetrics{trial,          seed,           result.sse_total,
                      result.sse_low, result.sse_high, result.mse,
                      result.wall_seconds};
}

void mean_std(const std::vector<TrialMetrics>& trials,
              double (*get)(const TrialMetrics&), double& mean_out,
              double& std_out) {
  const auto n = static_cast<double>(trials.size());
  double mean = 0.0;
  for (const TrialMetrics& t : trials) mean += get(t);
  mean /= n;
  double var = 0.0;
  for (const TrialMetrics& t : trials) {
    const double d = get(t) - mean;
    var += d * d;
  }
  mean_out = mean;
  std_out = n > 1.0 ? std::sqrt(var / (n - 1.0)) : 0.0;
}

void fill_stats(SweepPoint& point) {
  mean_std(point.trials, [](const TrialMetrics& t) { return t.sse_total; },
           point.sse_total_mean, point.sse_total_std);
  mean_std(point.trials, [](const TrialMetrics& t) { return t.sse_low; },
           point.sse_low_mean, point.sse_low_std);
  mean_std(point.trials, [](const TrialMetrics& t) { return t.sse_high; },
           point.sse_high_mean, point.sse_high_std);
  for (const TrialMetrics& t : point.trials) {
    point.wall_seconds += t.wall_seconds;
  }
}

}  // namespace

std::vector<SweepPoint> sweep(const ExperimentConfig& base, SweepAxis axis,
                              const std::vector<double>& values, int trials,
                              int jobs, const TrialCallback& on_trial) {
  if (values.empty()) throw ConfigError("sweep: no axis values given");
  if (trials < 1) throw ConfigError("sweep: trials must be >= 1");

  const bool regenerate = base.dataset.kind == DatasetSpec::Kind::zipf;
  std::optional<Dataset> fixed;
  if (!regenerate) fixed = make_dataset(base.dataset, base.seed);

  std::vector<SweepPoint> points;
  points.reserve(values.size());
  for (std::size_t vi = 0; vi < values.size(); ++vi) {
    SweepPoint point;
    point.axis_value = values[vi];
    point.config = apply_axis(base, axis, values[vi]);
    for (int trial = 0; trial < trials; ++trial) {
      ExperimentConfig cfg = point.config;
      cfg.seed = trial_seed(base.seed, trial);
      std::optional<Dataset> generated;
      if (regenerate) generated = make_dataset(cfg.dataset, cfg.seed);
      const Dataset& data = regenerate ? *generated : *fixed;

      RunOptions options;
      options.jobs = jobs;
      const RunArtifacts artifacts = run_protocol(cfg, data, options);
      point.trials.push_back(metrics_from(artifacts.result, trial, cfg.seed));
      if (on_trial) on_trial(vi, point.trials.back(), artifacts.result);
    }
    fill_stats(point);
    points.push_back(std::move(point));
  }
  return points;
}

BenchResult bench(const ExperimentConfig& cfg, int trials, int jobs,
                  const TrialCallback& on_trial) {
  if (trials < 1) throw ConfigError("bench: trials must be >= 1");
  const bool regenerate = cfg.dataset.kind == DatasetSpec::Kind::zipf;
  std::optional<Dataset> fixed;
  if (!regenerate) fixed = make_dataset(cfg.dataset, cfg.seed);

  BenchResult result;
  for (int trial = 0; trial < trials; ++trial) {
    ExperimentConfig trial_cfg = cfg;
    trial_cfg.seed = trial_seed(cfg.seed, trial);
    std::optional<Dataset> generated;
    if (regenerate) generated = make_dataset(trial_cfg.dataset, trial_cfg.seed);
    const Dataset& data = regenerate ? *generated : *fixed;

    RunOptions options;
    options.jobs = jobs;
    options.method = Method::ldplcm;
    const RunArtifacts ours = run_protocol(trial_cfg, data, options);
    options.method = Method::apple_cms;
    const RunArtifacts baseline = run_protocol(trial_cfg, data, options);

    result.ldplcm.push_back(
        metrics_from(ours.result, trial, trial_cfg.seed));
    result.apple_cms.push_back(
        metrics_from(baseline.result, trial, trial_cfg.seed));
    if (ours.result.sse_low < baseline.result.sse_low) {
      ++result.low_sse_wins;
    }
    if (on_trial) {
      on_trial(0, result.ldplcm.back(), ours.result);
      on_trial(1, result.apple_cms.back(), baseline.result);
    }
  }
  return result;
}

}  // namespace ldplcm
