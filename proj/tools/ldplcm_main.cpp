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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ldplcm/config.hpp"
#include "ldplcm/dataset.hpp"
#include "ldplcm/errors.hpp"
#include "ldplcm/freq_model.hpp"
#include "ldplcm/protocol.hpp"
#include "ldplcm/server.hpp"
#include "ldplcm/sketch.hpp"

namespace {

namespace fs = std::filesystem;
using namespace ldplcm;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitContract = 4;

std::string format_double(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

// Short %g form for directory names and log lines.
std::string format_axis(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%g", value);
  return buffer;
}

// Flags shared by run / bench / sweep. Optionals overlay a loaded config so
// "--config file --epsilon 2" means "the file, with epsilon replaced".
struct ConfigFlags {
  std::optional<std::string> config_path;
  std::optional<double> epsilon, r, theta, s;
  std::optional<std::uint32_t> m, k;
  std::optional<std::size_t> t, zipf_n;
  std::optional<std::uint64_t> seed, max_rank;
  std::optional<int> trials;
  std::optional<double> learning_rate;
  std::optional<int> n_estimators, max_depth;
  std::optional<std::string> csv_path, data_dir;

  void attach(CLI::App& cmd) {
    cmd.add_option("--config", config_path, "Experiment config JSON file");
    cmd.add_option("--epsilon", epsilon, "Privacy budget");
    cmd.add_option("--m", m, "Sketch width");
    cmd.add_option("--k", k, "Sketch depth (hash rows)");
    cmd.add_option("--r", r, "Phase-1 sampling rate");
    cmd.add_option("--theta", theta, "High-frequent mass ratio");
    cmd.add_option("--t", t, "Training sample size");
    cmd.add_option("--seed", seed, "Master seed");
    cmd.add_option("--trials", trials, "Trial count for bench/sweep");
    cmd.add_option("--learning-rate", learning_rate, "Model learning rate");
    cmd.add_option("--estimators", n_estimators, "Model tree count");
    cmd.add_option("--max-depth", max_depth, "Model tree depth");
    cmd.add_option("--zipf", zipf_n, "Generate a Zipf dataset of N records");
    cmd.add_option("--s", s, "Zipf skewness");
    cmd.add_option("--max-rank", max_rank, "Zipf rank cap (0 = auto)");
    cmd.add_option("--csv", csv_path, "Ingest records from a CSV file");
    cmd.add_option("--data", data_dir, "Load a saved dataset directory");
  }

  ExperimentConfig resolve() const {
    ExperimentConfig cfg;
    if (config_path) cfg = ExperimentConfig::load(*config_path);
    if (epsilon) cfg.epsilon = *epsilon;
    if (m) cfg.m = *m;
    if (k) cfg.k = *k;
    if (r) cfg.r = *r;
    if (theta) cfg.theta = *theta;
    if (t) cfg.t = *t;
    if (seed) cfg.seed = *seed;
    if (trials) cfg.trials = *trials;
    if (learning_rate) cfg.model.learning_rate = *learning_rate;
    if (n_estimators) cfg.model.n_estimators = *n_estimators;
    if (max_depth) cfg.model.max_depth = *max_depth;
    const int dataset_flags = (zipf_n ? 1 : 0) + (csv_path ? 1 : 0) +
                              (data_dir ? 1 : 0);
    if (dataset_flags > 1) {
      throw ConfigError("choose one of --zipf, --csv, --data");
    }
    if (zipf_n) {
      cfg.dataset.kind = DatasetSpec::Kind::zipf;
      cfg.dataset.n = *zipf_n;
    }
    if (csv_path) {
      cfg.dataset.kind = DatasetSpec::Kind::csv;
      cfg.dataset.path = *csv_path;
    }
    if (data_dir) {
      cfg.dataset.kind = DatasetSpec::Kind::dir;
      cfg.dataset.path = *data_dir;
    }
    if (s) cfg.dataset.s = *s;
    if (max_rank) cfg.dataset.max_rank = *max_rank;
    cfg.validate();
    return cfg;
  }
};

int env_jobs_default() {
  if (const char* env = std::getenv("LDPLCM_JOBS")) {
    return std::max(1, std::atoi(env));
  }
  return 1;
}

std::string env_out_default() {
  if (const char* env = std::getenv("LDPLCM_OUT")) return env;
  return "";
}

void require_out(const std::string& out) {
  if (out.empty()) {
    throw ConfigError("--out is required (or set LDPLCM_OUT)");
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream file(path);
  if (!file) throw IoError("cannot write " + path.string());
  file << text;
  if (!file) throw IoError("write failed for " + path.string());
}

void write_estimates_csv(const fs::path& path, const ExperimentConfig& cfg,
                         const Dataset& data, const RunResult& result,
                         bool clamp) {
  std::ofstream file(path);
  if (!file) throw IoError("cannot write " + path.string());
  file << "# config " << cfg.to_json().dump() << '\n';
  file << "item,true_count,estimate,branch\n";
  for (std::uint64_t d = 0; d < result.domain_size; ++d) {
    double estimate = result.estimates[d];
    if (clamp && estimate < 0.0) estimate = 0.0;
    file << d << ',' << data.truth[d] << ',' << format_double(estimate) << ','
         << (result.via_model[d] ? "model" : "sketch") << '\n';
  }
  if (!file) throw IoError("write failed for " + path.string());
}

// ---- gen-data -------------------------------------------------------------

int cmd_gen_data(const ConfigFlags& flags, const std::string& out) {
  require_out(out);
  ExperimentConfig cfg = flags.resolve();
  if (cfg.dataset.kind == DatasetSpec::Kind::dir) {
    throw ConfigError("gen-data needs --zipf or --csv input");
  }
  const Dataset dataset = make_dataset(cfg.dataset, cfg.seed);
  save_dataset(dataset, out);
  std::cout << "records: " << dataset.records.size() << '\n'
            << "realized domain size: " << dataset.domain_size << '\n'
            << "wrote " << out << '\n';
  return kExitOk;
}

// ---- run ------------------------------------------------------------------

int cmd_run(const ConfigFlags& flags, const std::string& out,
            const std::string& method_name, int jobs, bool clamp) {
  require_out(out);
  ExperimentConfig cfg = flags.resolve();
  RunOptions options;
  options.jobs = jobs;
  if (method_name == "ldplcm") {
    options.method = Method::ldplcm;
  } else if (method_name == "apple-cms") {
    options.method = Method::apple_cms;
  } else {
    throw ConfigError("unknown --method: " + method_name);
  }

  const Dataset dataset = make_dataset(cfg.dataset, cfg.seed);
  const RunArtifacts artifacts = run_protocol(cfg, dataset, options);

  fs::create_directories(out);
  cfg.save(fs::path(out) / "config.json");
  write_text(fs::path(out) / "summary.json",
             artifacts.result.summary(cfg, options.method).dump(2) + "\n");
  write_estimates_csv(fs::path(out) / "estimates.csv", cfg, dataset,
                      artifacts.result, clamp);
  save_sketch(artifacts.sketch, fs::path(out) / "sketch.bin", cfg.theta);
  if (artifacts.model.has_value()) {
    artifacts.model->save(fs::path(out) / "model.json");
  }

  std::cout << artifacts.result.summary(cfg, options.method).dump(2) << '\n'
            << "wall_seconds: " << artifacts.result.wall_seconds << '\n'
            << "wrote " << out << '\n';
  return kExitOk;
}

// ---- estimate ---------------------------------------------------------------

int cmd_estimate(const std::string& sketch_path, const std::string& model_path,
                 const std::string& items_text, bool all,
                 const std::string& out, bool clamp) {
  const LoadedSketch loaded = load_sketch(sketch_path);
  const FrequencyModel model = FrequencyModel::load(model_path);

  const auto& stamp = model.protocol_stamp();
  if (!stamp.has_value()) {
    throw ContractError("model file carries no protocol header");
  }
  const AggregateSketch& sketch = loaded.sketch;
  if (stamp->k != sketch.rows() || stamp->m != sketch.width() ||
      stamp->epsilon != sketch.params().epsilon ||
      stamp->master_seed != sketch.family().master_seed()) {
    throw ContractError(
        "sketch/model header mismatch: the artifacts come from different "
        "runs (k, m, epsilon and master_seed must all match)");
  }
  const double theta = loaded.theta.value_or(model.theta());

  std::vector<ItemKey> items;
  if (all) {
    if (stamp->domain_size == 0) {
      throw ContractError("--all needs a model with a recorded domain size");
    }
    items.resize(stamp->domain_size);
    for (std::uint64_t d = 0; d < stamp->domain_size; ++d) items[d] = d;
  } else {
    std::string token;
    std::stringstream stream(items_text);
    while (std::getline(stream, token, ',')) {
      if (token.empty()) continue;
      if (token.find_first_not_of("0123456789") != std::string::npos) {
        throw ConfigError("estimate: items must be non-negative integers");
      }
      items.push_back(std::stoull(token));
    }
    if (items.empty()) throw ConfigError("estimate: no items given");
  }

  const PublishedModel published = model.publish();
  std::ostringstream csv;
  csv << "item,estimate,branch\n";
  for (ItemKey d : items) {
    bool via_model = false;
    double estimate = estimate_ldplcm(sketch, published, theta, d, &via_model);
    if (clamp && estimate < 0.0) estimate = 0.0;
    csv << d << ',' << format_double(estimate) << ','
        << (via_model ? "model" : "sketch") << '\n';
  }
  if (out.empty()) {
    std::cout << csv.str();
  } else {
    write_text(out, csv.str());
  }
  return kExitOk;
}

// ---- bench ------------------------------------------------------------------

void write_trials_csv(std::ofstream& file, const std::string& method,
                      const std::vector<TrialMetrics>& trials) {
  for (const TrialMetrics& t : trials) {
    file << method << ',' << t.trial << ',' << t.seed << ','
         << format_double(t.sse_total) << ',' << format_double(t.sse_low)
         << ',' << format_double(t.sse_high) << ',' << format_double(t.mse)
         << ',' << format_double(t.wall_seconds) << '\n';
  }
}

int cmd_bench(const ConfigFlags& flags, const std::string& out, int jobs) {
  require_out(out);
  const ExperimentConfig cfg = flags.resolve();
  const BenchResult result = bench(cfg, cfg.trials, jobs);

  fs::create_directories(out);
  cfg.save(fs::path(out) / "config.json");
  std::ofstream file(fs::path(out) / "bench.csv");
  if (!file) throw IoError("cannot write bench.csv");
  file << "# config " << cfg.to_json().dump() << '\n';
  file << "method,trial,seed,sse_total,sse_low,sse_high,mse,wall_seconds\n";
  write_trials_csv(file, "ldplcm", result.ldplcm);
  write_trials_csv(file, "apple-cms", result.apple_cms);

  auto mean_of = [](const std::vector<TrialMetrics>& trials,
                    double (*get)(const TrialMetrics&)) {
    double sum = 0.0;
    for (const TrialMetrics& t : trials) sum += get(t);
    return sum / static_cast<double>(trials.size());
  };
  nlohmann::ordered_json summary;
  summary["config"] = cfg.to_json();
  summary["trials"] = cfg.trials;
  summary["low_sse_wins"] = result.low_sse_wins;
  summary["ldplcm"] = {
      {"sse_total_mean",
       mean_of(result.ldplcm, [](const TrialMetrics& t) { return t.sse_total; })},
      {"sse_low_mean",
       mean_of(result.ldplcm, [](const TrialMetrics& t) { return t.sse_low; })},
      {"sse_high_mean",
       mean_of(result.ldplcm, [](const TrialMetrics& t) { return t.sse_high; })}};
  summary["apple_cms"] = {
      {"sse_total_mean",
       mean_of(result.apple_cms,
               [](const TrialMetrics& t) { return t.sse_total; })},
      {"sse_low_mean",
       mean_of(result.apple_cms,
               [](const TrialMetrics& t) { return t.sse_low; })},
      {"sse_high_mean",
       mean_of(result.apple_cms,
               [](const TrialMetrics& t) { return t.sse_high; })}};
  write_text(fs::path(out) / "summary.json", summary.dump(2) + "\n");
  std::cout << summary.dump(2) << '\n' << "wrote " << out << '\n';
  return kExitOk;
}

// ---- sweep ------------------------------------------------------------------

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> values;
  try {
    // "a..b" expands to the inclusive integer range.
    const std::size_t dots = text.find("..");
    if (dots != std::string::npos) {
      const long long lo = std::stoll(text.substr(0, dots));
      const long long hi = std::stoll(text.substr(dots + 2));
      for (long long v = lo; v <= hi; ++v) {
        values.push_back(static_cast<double>(v));
      }
      return values;
    }
    std::stringstream stream(text);
    std::string token;
    while (std::getline(stream, token, ',')) {
      if (token.empty()) continue;
      std::size_t used = 0;
      const double value = std::stod(token, &used);
      if (used != token.size()) throw std::invalid_argument(token);
      values.push_back(value);
    }
  } catch (const std::logic_error&) {
    throw ConfigError("sweep: cannot parse --values \"" + text + "\"");
  }
  return values;
}

int cmd_sweep(const ConfigFlags& flags, const std::string& axis_name,
              const std::string& values_text, const std::string& out,
              int jobs) {
  require_out(out);
  const ExperimentConfig cfg = flags.resolve();
  const SweepAxis axis = sweep_axis_from_string(axis_name);
  const std::vector<double> values = parse_values(values_text);
  if (values.empty()) throw ConfigError("sweep: --values is empty");

  fs::create_directories(out);
  cfg.save(fs::path(out) / "config.json");

  const auto on_trial = [&](std::size_t value_index, const TrialMetrics& t,
                            const RunResult& run) {
    const fs::path dir = fs::path(out) /
                         (axis_name + "=" + format_axis(values[value_index])) /
                         ("trial_" + std::to_string(t.trial));
    fs::create_directories(dir);
    ExperimentConfig echoed = apply_axis(cfg, axis, values[value_index]);
    echoed.seed = t.seed;
    write_text(dir / "summary.json",
               run.summary(echoed, Method::ldplcm).dump(2) + "\n");
  };

  const std::vector<SweepPoint> points =
      sweep(cfg, axis, values, cfg.trials, jobs, on_trial);

  std::ofstream index(fs::path(out) / "index.csv");
  if (!index) throw IoError("cannot write index.csv");
  index << "# config " << cfg.to_json().dump() << '\n';
  index << "axis_value,sse_total_mean,sse_total_std,sse_low_mean,sse_low_std,"
           "sse_high_mean,sse_high_std,wall_seconds\n";
  for (const SweepPoint& point : points) {
    index << format_axis(point.axis_value) << ','
          << format_double(point.sse_total_mean) << ','
          << format_double(point.sse_total_std) << ','
          << format_double(point.sse_low_mean) << ','
          << format_double(point.sse_low_std) << ','
          << format_double(point.sse_high_mean) << ','
          << format_double(point.sse_high_std) << ','
          << format_double(point.wall_seconds) << '\n';
  }
  std::cout << "swept " << axis_name << " over " << values.size()
            << " values, " << cfg.trials << " trials each\n"
            << "wrote " << out << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-phase locally private frequency estimation with a "
               "learned sketch, plus the Apple-CMS baseline"};
  app.require_subcommand(1);

  std::string out = env_out_default();
  int jobs = env_jobs_default();
  bool clamp = false;

  ConfigFlags gen_flags;
  CLI::App* gen = app.add_subcommand("gen-data", "Generate or ingest a dataset");
  gen_flags.attach(*gen);
  gen->add_option("--out", out, "Output directory");

  ConfigFlags run_flags;
  std::string method = "ldplcm";
  CLI::App* run = app.add_subcommand("run", "One end-to-end protocol run");
  run_flags.attach(*run);
  run->add_option("--out", out, "Output directory");
  run->add_option("--jobs", jobs, "Worker threads (outputs identical for any value)");
  run->add_option("--method", method, "ldplcm | apple-cms");
  run->add_flag("--clamp-nonnegative", clamp,
                "Clamp negative estimates to zero in estimates.csv only");

  std::string sketch_path, model_path, items_text, estimate_out;
  bool all_items = false;
  CLI::App* estimate = app.add_subcommand("estimate", "Query saved artifacts");
  estimate->add_option("--sketch", sketch_path, "Sketch file")->required();
  estimate->add_option("--model", model_path, "Model file")->required();
  estimate->add_option("--items", items_text, "Comma-separated item keys");
  estimate->add_flag("--all", all_items, "Query the whole recorded domain");
  estimate->add_option("--out", estimate_out, "Write CSV here instead of stdout");
  estimate->add_flag("--clamp-nonnegative", clamp,
                     "Clamp negative estimates to zero");

  ConfigFlags bench_flags;
  CLI::App* bench_cmd = app.add_subcommand(
      "bench", "Paired LDPLCM vs Apple-CMS comparison over seeded trials");
  bench_flags.attach(*bench_cmd);
  bench_cmd->add_option("--out", out, "Output directory");
  bench_cmd->add_option("--jobs", jobs, "Worker threads");

  ConfigFlags sweep_flags;
  std::string axis_name, values_text;
  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "Parameter sweep with seeded trials");
  sweep_flags.attach(*sweep_cmd);
  sweep_cmd->add_option("--axis", axis_name,
                        "epsilon | m | k | r | theta | s | space")
      ->required();
  sweep_cmd->add_option("--values", values_text,
                        "Comma list (0.3,0.4) or integer range (1..7)")
      ->required();
  sweep_cmd->add_option("--out", out, "Output directory");
  sweep_cmd->add_option("--jobs", jobs, "Worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (gen->parsed()) return cmd_gen_data(gen_flags, out);
    if (run->parsed()) return cmd_run(run_flags, out, method, jobs, clamp);
    if (estimate->parsed()) {
      return cmd_estimate(sketch_path, model_path, items_text, all_items,
                          estimate_out, clamp);
    }
    if (bench_cmd->parsed()) return cmd_bench(bench_flags, out, jobs);
    if (sweep_cmd->parsed()) {
      return cmd_sweep(sweep_flags, axis_name, values_text, out, jobs);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ContractError& e) {
    std::cerr << "contract error: " << e.what() << '\n';
    return kExitContract;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitContract;
  }
  return kExitConfig;
}
