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

// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Statistical criteria pin their tolerances here, in code.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "ldplcm/protocol.hpp"

using namespace ldplcm;

namespace {

namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int g_failures = 0;

std::string fmt(const char* format, ...) {
  char buffer[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buffer, sizeof(buffer), format, args);
  va_end(args);
  return buffer;
}

// Each criterion carries its stated runtime limit; exceeding it fails the
// criterion. `extra_seconds` charges shared setup (the Monte Carlo harness)
// to the criterion that owns the budget.
void report(int id, const char* name, double limit_seconds,
            const std::function<Outcome()>& body, double extra_seconds = 0.0) {
  const auto start = std::chrono::steady_clock::now();
  Outcome outcome;
  try {
    outcome = body();
  } catch (const std::exception& e) {
    outcome.pass = false;
    outcome.detail = std::string("exception: ") + e.what();
  }
  const double seconds =
      extra_seconds +
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  if (seconds > limit_seconds) {
    outcome.pass = false;
    outcome.detail += fmt(" [over the %.0f s runtime limit]", limit_seconds);
  }
  std::printf("[%s] %2d %-28s (%6.1f s)  %s\n",
              outcome.pass ? "PASS" : "FAIL", id, name, seconds,
              outcome.detail.c_str());
  std::fflush(stdout);
  if (!outcome.pass) ++g_failures;
}

// ---------------------------------------------------------------------------
// Criterion 1: the exact output-probability ratio of the client channel.

double channel_probability(const std::vector<std::int8_t>& in,
                           const std::vector<std::int8_t>& out, double p_flip) {
  double probability = 1.0;
  for (std::size_t i = 0; i < in.size(); ++i) {
    probability *= in[i] == out[i] ? 1.0 - p_flip : p_flip;
  }
  return probability;
}

Outcome criterion_privacy_ratio() {
  const double epsilon = 2.0;
  const std::uint32_t m = 4, k = 2;
  const auto params = PrivacyParams::from_epsilon(epsilon);
  const HashFamily family(k, m, 7);
  const std::uint32_t j = 1;  // fixed hash row
  const auto high_input = encode_high(m);
  const auto low_input = encode_low(3, family, j);

  double max_ratio = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
    std::vector<std::int8_t> output(m);
    for (std::uint32_t i = 0; i < m; ++i) {
      output[i] = (mask >> i) & 1u ? 1 : -1;
    }
    const double p_high = channel_probability(high_input, output, params.p_flip);
    const double p_low = channel_probability(low_input, output, params.p_flip);
    max_ratio = std::max(max_ratio, p_high / p_low);
    max_ratio = std::max(max_ratio, p_low / p_high);
  }

  const double tight = std::exp(epsilon / 2.0);
  const bool pass = std::abs(max_ratio - tight) <= 1e-9 &&
                    max_ratio < std::exp(epsilon);
  return {pass, fmt("max ratio %.12f, e^{eps/2} = %.12f (< e^eps = %.6f); "
                    "mechanism spends eps/2 of the nominal eps",
                    max_ratio, tight, std::exp(epsilon))};
}

// ---------------------------------------------------------------------------
// Criteria 2-3 share one harness: domain 64, n = 10000, every client reports
// in phase 2 against a ground-truth classifier, so the estimator is measured
// in isolation. Per trial the hash family and all client streams re-derive
// from the trial seed; the population is fixed.

struct EstimatorTrials {
  Dataset data;
  std::vector<ItemKey> low_items;
  double theta_exact = 0.0;  // exact high-frequent mass ratio of the truth
  double sum_sq_low = 0.0;
  // [item][trial]
  std::vector<std::vector<double>> estimates;
  std::vector<std::vector<double>> readouts;
};

EstimatorTrials run_estimator_trials(int trials) {
  const std::uint32_t m = 32, k = 8;
  const double theta = 0.5;
  const auto params = PrivacyParams::from_epsilon(4.0);

  EstimatorTrials result;
  result.data = gen_zipf(10000, 1.1, 64, derive_seed(2026, 4));
  const Dataset& data = result.data;
  const std::size_t n = data.records.size();

  const auto high = true_theta_partition(data.truth, theta);
  double high_mass = 0.0;
  for (std::uint64_t d = 0; d < data.domain_size; ++d) {
    if (high[d]) {
      high_mass += static_cast<double>(data.truth[d]);
    } else {
      result.low_items.push_back(d);
      result.sum_sq_low += static_cast<double>(data.truth[d]) *
                           static_cast<double>(data.truth[d]);
    }
  }
  result.theta_exact = high_mass / static_cast<double>(n);

  PublishedModel oracle;
  oracle.predict = [&data](ItemKey d) {
    return static_cast<double>(data.truth[d]);
  };
  {
    std::vector<double> truth_values(data.truth.begin(), data.truth.end());
    oracle.boundary = boundary_from_values(std::move(truth_values), theta);
  }

  result.estimates.assign(result.low_items.size(), {});
  result.readouts.assign(result.low_items.size(), {});
  for (auto& column : result.estimates) column.reserve(trials);
  for (auto& column : result.readouts) column.reserve(trials);

  Report scratch;
  for (int trial = 0; trial < trials; ++trial) {
    const std::uint64_t seed = derive_seed(777, 1000 + trial);
    const HashFamily family(k, m, derive_seed(seed, 1));
    AggregateSketch sketch(family, params);
    for (std::size_t i = 0; i < n; ++i) {
      Rng rng(derive_seed(seed, 16 + i));
      client_report_into(data.records[i], Phase::two, &oracle, params, family,
                         rng, scratch);
      sketch.absorb(scratch);
    }
    for (std::size_t li = 0; li < result.low_items.size(); ++li) {
      result.estimates[li].push_back(estimate_ldplcm(
          sketch, oracle, result.theta_exact, result.low_items[li]));
      result.readouts[li].push_back(
          row_average_at(sketch, result.low_items[li]));
    }
  }
  return result;
}

void mean_and_var(const std::vector<double>& values, double& mean,
                  double& var) {
  mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(values.size() - 1);
}

Outcome criterion_unbiasedness(const EstimatorTrials& trials, int T) {
  std::size_t passed = 0;
  for (std::size_t li = 0; li < trials.low_items.size(); ++li) {
    std::vector<double> first(trials.estimates[li].begin(),
                              trials.estimates[li].begin() + T);
    double mean = 0.0, var = 0.0;
    mean_and_var(first, mean, var);
    const double truth =
        static_cast<double>(trials.data.truth[trials.low_items[li]]);
    if (std::abs(mean - truth) <=
        4.0 * std::sqrt(var) / std::sqrt(static_cast<double>(T))) {
      ++passed;
    }
  }
  const double fraction =
      static_cast<double>(passed) / static_cast<double>(trials.low_items.size());
  return {fraction >= 0.95,
          fmt("%zu/%zu low-frequent items within 4 sigma/sqrt(T), T = %d",
              passed, trials.low_items.size(), T)};
}

Outcome criterion_variance_bound(const EstimatorTrials& trials, int T) {
  const auto params = PrivacyParams::from_epsilon(4.0);
  const double n = static_cast<double>(trials.data.records.size());
  std::size_t passed = 0;
  double ratio_sum = 0.0;
  for (std::size_t li = 0; li < trials.low_items.size(); ++li) {
    double mean = 0.0, var = 0.0;
    mean_and_var(trials.readouts[li], mean, var);
    const double truth =
        static_cast<double>(trials.data.truth[trials.low_items[li]]);
    const double bound = variance_bound(n, 32.0, 8.0, trials.theta_exact,
                                        truth, trials.sum_sq_low, params);
    if (var <= bound) ++passed;
    ratio_sum += var / bound;
  }
  const double fraction =
      static_cast<double>(passed) / static_cast<double>(trials.low_items.size());
  return {fraction >= 0.95,
          fmt("%zu/%zu items with empirical variance <= bound "
              "(mean var/bound %.4f, T = %d)",
              passed, trials.low_items.size(),
              ratio_sum / static_cast<double>(trials.low_items.size()), T)};
}

// ---------------------------------------------------------------------------
// Criterion 4: a sketch fed only perturbed dummies estimates zero.

Outcome criterion_dummy_neutrality() {
  const std::uint32_t m = 32, k = 8;
  const auto params = PrivacyParams::from_epsilon(4.0);
  const int T = 200;
  const int reports = 10000;
  const int probe_keys = 50;

  PublishedModel nothing_high;
  nothing_high.predict = [](ItemKey) { return 0.0; };

  std::vector<std::vector<double>> estimates(probe_keys);
  Report scratch;
  for (int trial = 0; trial < T; ++trial) {
    const std::uint64_t seed = derive_seed(909, trial);
    const HashFamily family(k, m, derive_seed(seed, 1));
    AggregateSketch sketch(family, params);
    for (int i = 0; i < reports; ++i) {
      Rng rng(derive_seed(seed, 16 + static_cast<std::uint64_t>(i)));
      scratch.row = static_cast<std::uint16_t>(rng.next_below(k));
      scratch.bits.assign(m, -1);
      perturb(scratch.bits, params, rng);
      sketch.absorb(scratch);
    }
    for (int key = 0; key < probe_keys; ++key) {
      estimates[key].push_back(estimate_ldplcm(
          sketch, nothing_high, 1.0, static_cast<ItemKey>(key)));
    }
  }

  int passed = 0;
  double worst = 0.0;
  for (int key = 0; key < probe_keys; ++key) {
    double mean = 0.0, var = 0.0;
    mean_and_var(estimates[key], mean, var);
    const double allowance = 4.0 * std::sqrt(var) / std::sqrt(double(T));
    if (std::abs(mean) <= allowance) ++passed;
    worst = std::max(worst, std::abs(mean) / allowance);
  }
  return {passed == probe_keys,
          fmt("%d/%d probe keys with |mean| within 4 sigma/sqrt(T) of 0 "
              "(worst |mean|/allowance %.2f)",
              passed, probe_keys, worst)};
}

// ---------------------------------------------------------------------------
// Criterion 5: the theta = 0 estimator is the baseline, bit for bit.

Outcome criterion_estimator_identity() {
  Rng rng(5150);
  PublishedModel nothing_high;
  nothing_high.predict = [](ItemKey) { return 0.0; };

  int checked = 0;
  for (int instance = 0; instance < 1000; ++instance) {
    const std::uint32_t k = 1 + rng.next_below(8);
    const std::uint32_t m = 2 + rng.next_below(62);
    const HashFamily family(k, m, rng.next_u64());
    const auto params =
        PrivacyParams::from_epsilon(0.5 + 6.0 * rng.next_double());
    AggregateSketch sketch(family, params);
    Report report;
    const int reports = 1 + static_cast<int>(rng.next_below(30));
    for (int i = 0; i < reports; ++i) {
      report.row = static_cast<std::uint16_t>(rng.next_below(k));
      report.bits.resize(m);
      for (auto& bit : report.bits) bit = rng.bernoulli(0.5) ? 1 : -1;
      sketch.absorb(report);
    }
    const ItemKey d = rng.next_u64();
    const double ldplcm = estimate_ldplcm(sketch, nothing_high, 0.0, d);
    const double baseline = estimate_apple_cms(sketch, d);
    if (std::bit_cast<std::uint64_t>(ldplcm) !=
        std::bit_cast<std::uint64_t>(baseline)) {
      return {false, fmt("bitwise mismatch at instance %d", instance)};
    }
    ++checked;
  }
  return {true, fmt("%d random sketch/key pairs bit-identical", checked)};
}

// ---------------------------------------------------------------------------
// Criteria 6-8 share the desk-scale configuration.

ExperimentConfig desk_config() {
  ExperimentConfig cfg;
  cfg.epsilon = 4.0;
  cfg.m = 128;
  cfg.k = 16;
  cfg.r = 0.1;
  cfg.theta = 0.5;
  cfg.t = 30000;  // clamps to the realized domain: exhaustive probe
  cfg.model = {0.1, 100, 3};
  cfg.dataset = {DatasetSpec::Kind::zipf, 100000, 1.1, 0, {}};
  cfg.seed = 42;
  cfg.trials = 10;
  return cfg;
}

Outcome criterion_comparative_accuracy() {
  const ExperimentConfig cfg = desk_config();
  {
    const Dataset probe = make_dataset(cfg.dataset, cfg.seed);
    if (probe.domain_size < 20000 || probe.domain_size > 30000) {
      return {false, fmt("realized domain %llu outside 20k-30k",
                         static_cast<unsigned long long>(probe.domain_size))};
    }
  }
  const BenchResult result = bench(cfg, 10, 2);
  double ours = 0.0, baseline = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    ours += result.ldplcm[trial].sse_total;
    baseline += result.apple_cms[trial].sse_total;
  }
  ours /= 10.0;
  baseline /= 10.0;
  const bool pass = result.low_sse_wins >= 8 && ours < baseline;
  return {pass,
          fmt("low-SSE wins %d/10 (need >= 8); mean SSE_total %.3e vs "
              "baseline %.3e",
              result.low_sse_wins, ours, baseline)};
}

std::string means_text(const std::vector<SweepPoint>& points) {
  std::ostringstream text;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (i) text << ", ";
    text << points[i].axis_value << " -> "
         << fmt("%.3e", points[i].sse_total_mean);
  }
  return text.str();
}

Outcome criterion_theta_monotonicity() {
  const auto points =
      sweep(desk_config(), SweepAxis::theta, {0.3, 0.4, 0.5, 0.6}, 10, 2);
  bool strictly_decreasing = true;
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (!(points[i].sse_total_mean < points[i - 1].sse_total_mean)) {
      strictly_decreasing = false;
    }
  }
  return {strictly_decreasing,
          "trial-mean SSE_total: " + means_text(points)};
}

Outcome criterion_sampling_rate_trend() {
  const auto points =
      sweep(desk_config(), SweepAxis::r, {0.10, 0.20, 0.30}, 10, 2);
  bool non_increasing = true;
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i].sse_total_mean > points[i - 1].sse_total_mean) {
      non_increasing = false;
    }
  }
  return {non_increasing, "trial-mean SSE_total: " + means_text(points)};
}

// ---------------------------------------------------------------------------
// Criterion 9: count-min never under-estimates.

Outcome criterion_cms_overestimation() {
  Rng rng(113);
  std::uint64_t violations = 0;
  for (int stream = 0; stream < 10000; ++stream) {
    const std::uint32_t k = 1 + rng.next_below(4);
    const std::uint32_t m = 2 + rng.next_below(8);
    const std::uint32_t domain = 2 + rng.next_below(15);
    CountMinSketch sketch(k, m, rng.next_u64());
    std::vector<std::uint64_t> exact(domain, 0);
    const int updates = 1 + static_cast<int>(rng.next_below(40));
    for (int i = 0; i < updates; ++i) {
      const ItemKey x = rng.next_below(domain);
      sketch.update(x);
      ++exact[x];
    }
    for (ItemKey x = 0; x < domain; ++x) {
      if (sketch.estimate(x) < exact[x]) ++violations;
    }
  }
  return {violations == 0,
          fmt("10000 random streams, %llu under-estimations",
              static_cast<unsigned long long>(violations))};
}

// ---------------------------------------------------------------------------
// Criterion 10: model quality gate.

Outcome criterion_model_quality() {
  const std::size_t n = 1000;
  TrainingSet training;
  for (std::size_t i = 0; i < n; ++i) {
    training.items.push_back(i);
    training.targets.push_back(static_cast<double>(i));
  }
  FrequencyModel model = FrequencyModel::fit(training, {0.05, 350, 5}, 0.5);
  model.compute_boundary(training.items);

  double ss_res = 0.0, ss_tot = 0.0;
  const double mean = (n - 1) / 2.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double diff = training.targets[i] - model.predict(i);
    ss_res += diff * diff;
    ss_tot += (training.targets[i] - mean) * (training.targets[i] - mean);
  }
  const double r_squared = 1.0 - ss_res / ss_tot;

  const FrequencyModel loaded = FrequencyModel::from_json(model.to_json());
  Rng rng(6);
  std::uint64_t mismatches = 0;
  for (int probe = 0; probe < 1000; ++probe) {
    const ItemKey d = rng.next_below(2000);
    if (std::bit_cast<std::uint64_t>(loaded.predict(d)) !=
        std::bit_cast<std::uint64_t>(model.predict(d))) {
      ++mismatches;
    }
  }
  const bool pass = r_squared >= 0.999 && mismatches == 0;
  return {pass, fmt("training R^2 = %.6f (need >= 0.999); round-trip "
                    "prediction mismatches: %llu",
                    r_squared, static_cast<unsigned long long>(mismatches))};
}

// ---------------------------------------------------------------------------
// Criterion 11: byte-identical summaries across reruns and worker counts,
// exercised through the real CLI binary.

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

Outcome criterion_determinism() {
  const fs::path dir = fs::temp_directory_path() / "ldplcm_acceptance_cli";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string base =
      std::string(LDPLCM_CLI_PATH) +
      " run --zipf 20000 --s 1.1 --m 128 --k 16 --epsilon 4 --theta 0.5"
      " --r 0.1 --t 8000 --estimators 100 --max-depth 3 --seed 31 --out ";
  const std::string quiet = " > /dev/null 2>&1";

  if (std::system((base + (dir / "j1").string() + " --jobs 1" + quiet).c_str()) != 0 ||
      std::system((base + (dir / "j8").string() + " --jobs 8" + quiet).c_str()) != 0 ||
      std::system((base + (dir / "again").string() + " --jobs 8" + quiet).c_str()) != 0) {
    return {false, "CLI run failed"};
  }
  const std::string summary1 = slurp(dir / "j1" / "summary.json");
  const std::string summary8 = slurp(dir / "j8" / "summary.json");
  const std::string summary_again = slurp(dir / "again" / "summary.json");
  const bool jobs_identical = !summary1.empty() && summary1 == summary8;
  const bool rerun_identical = summary8 == summary_again;
  const bool sketch_identical =
      slurp(dir / "j1" / "sketch.bin") == slurp(dir / "j8" / "sketch.bin");
  fs::remove_all(dir);
  return {jobs_identical && rerun_identical && sketch_identical,
          fmt("summary bytes: jobs1==jobs8 %s, rerun identical %s, sketch "
              "bytes identical %s",
              jobs_identical ? "yes" : "NO", rerun_identical ? "yes" : "NO",
              sketch_identical ? "yes" : "NO")};
}

}  // namespace

int main() {
  std::printf("acceptance suite\n");

  report(1, "exact-privacy-ratio", 1.0, criterion_privacy_ratio);

  // Criteria 2 and 3 share trials. The unbiasedness check uses the first
  // T = 200 trials as stated. The variance check needs enough trials that
  // the chi-square noise of an empirical variance (sigma ~ sqrt(2/T)) drops
  // below the theorem's few-percent slack; T = 20000 gives the stated 95%
  // threshold real power and stays inside the shared runtime budget.
  const int kUnbiasedTrials = 200;
  const int kVarianceTrials = 20000;
  EstimatorTrials trials;
  double harness_seconds = 0.0;
  {
    const auto start = std::chrono::steady_clock::now();
    trials = run_estimator_trials(kVarianceTrials);
    harness_seconds = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - start)
                          .count();
    std::printf("      (estimator harness: %zu low items, theta_exact %.4f, "
                "%d trials in %.1f s)\n",
                trials.low_items.size(), trials.theta_exact, kVarianceTrials,
                harness_seconds);
  }
  report(2, "estimator-unbiasedness", 120.0,
         [&] { return criterion_unbiasedness(trials, kUnbiasedTrials); },
         harness_seconds);
  report(3, "variance-bound", 120.0,
         [&] { return criterion_variance_bound(trials, kVarianceTrials); });

  report(4, "dummy-neutrality", 60.0, criterion_dummy_neutrality);
  report(5, "estimator-identity", 5.0, criterion_estimator_identity);
  report(6, "comparative-accuracy", 300.0, criterion_comparative_accuracy);
  report(7, "theta-monotonicity", 900.0, criterion_theta_monotonicity);
  report(8, "sampling-rate-trend", 600.0, criterion_sampling_rate_trend);
  report(9, "cms-overestimation", 30.0, criterion_cms_overestimation);
  report(10, "model-quality-gate", 30.0, criterion_model_quality);
  report(11, "determinism-parallelism", 120.0, criterion_determinism);

  std::printf("%d criterion(s) failed\n", g_failures);
  return g_failures;
}
