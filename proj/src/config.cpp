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

#include "ldplcm/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "ldplcm/errors.hpp"

namespace ldplcm {

using nlohmann::ordered_json;

void ExperimentConfig::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw ConfigError("config: epsilon must be positive");
  }
  if (m < 2) throw ConfigError("config: m must be >= 2");
  if (k < 1 || k > 65535) throw ConfigError("config: k must be in [1, 65535]");
  if (!(r > 0.0 && r < 1.0)) {
    throw ConfigError("config: sampling rate r must be in (0, 1)");
  }
  if (!(theta > 0.0 && theta <= 1.0)) {
    throw ConfigError("config: theta must be in (0, 1]");
  }
  if (t < 1) throw ConfigError("config: t must be >= 1");
  if (model.n_estimators < 0 || model.max_depth < 1 ||
      !(model.learning_rate > 0.0)) {
    throw ConfigError("config: bad model hyperparameters");
  }
  if (trials < 1) throw ConfigError("config: trials must be >= 1");
  if (dataset.kind == DatasetSpec::Kind::zipf) {
    if (dataset.n < 1) throw ConfigError("config: zipf n must be >= 1");
    if (!(dataset.s >= 0.0)) throw ConfigError("config: zipf s must be >= 0");
  } else if (dataset.path.empty()) {
    throw ConfigError("config: dataset path required for csv/dir datasets");
  }
}

namespace {

std::string kind_to_string(DatasetSpec::Kind kind) {
  switch (kind) {
    case DatasetSpec::Kind::zipf: return "zipf";
    case DatasetSpec::Kind::csv: return "csv";
    case DatasetSpec::Kind::dir: return "dir";
  }
  throw ContractError("unreachable dataset kind");
}

DatasetSpec::Kind kind_from_string(const std::string& text) {
  if (text == "zipf") return DatasetSpec::Kind::zipf;
  if (text == "csv") return DatasetSpec::Kind::csv;
  if (text == "dir") return DatasetSpec::Kind::dir;
  throw ConfigError("config: unknown dataset kind: " + text);
}

void reject_unknown_keys(const ordered_json& j,
                         const std::set<std::string>& known,
                         const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.contains(it.key())) {
      throw ConfigError("config: unknown key \"" + it.key() + "\" in " + where);
    }
  }
}

}  // namespace

ordered_json ExperimentConfig::to_json() const {
  ordered_json j;
  j["format_version"] = 1;
  j["epsilon"] = epsilon;
  j["m"] = m;
  j["k"] = k;
  j["r"] = r;
  j["theta"] = theta;
  j["t"] = t;
  j["model"] = {{"learning_rate", model.learning_rate},
                {"n_estimators", model.n_estimators},
                {"max_depth", model.max_depth}};
  ordered_json d;
  d["kind"] = kind_to_string(dataset.kind);
  if (dataset.kind == DatasetSpec::Kind::zipf) {
    d["n"] = dataset.n;
    d["s"] = dataset.s;
    d["max_rank"] = dataset.max_rank;
  } else {
    d["path"] = dataset.path.string();
  }
  j["dataset"] = std::move(d);
  j["seed"] = seed;
  j["trials"] = trials;
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const ordered_json& j) {
  reject_unknown_keys(j,
                      {"format_version", "epsilon", "m", "k", "r", "theta",
                       "t", "model", "dataset", "seed", "trials"},
                      "config");
  ExperimentConfig cfg;
  if (j.contains("format_version") &&
      j.at("format_version").get<int>() != 1) {
    throw ConfigError("config: unsupported format version");
  }
  if (j.contains("epsilon")) cfg.epsilon = j.at("epsilon").get<double>();
  if (j.contains("m")) cfg.m = j.at("m").get<std::uint32_t>();
  if (j.contains("k")) cfg.k = j.at("k").get<std::uint32_t>();
  if (j.contains("r")) cfg.r = j.at("r").get<double>();
  if (j.contains("theta")) cfg.theta = j.at("theta").get<double>();
  if (j.contains("t")) cfg.t = j.at("t").get<std::size_t>();
  if (j.contains("model")) {
    const auto& mj = j.at("model");
    reject_unknown_keys(mj, {"learning_rate", "n_estimators", "max_depth"},
                        "config.model");
    if (mj.contains("learning_rate")) {
      cfg.model.learning_rate = mj.at("learning_rate").get<double>();
    }
    if (mj.contains("n_estimators")) {
      cfg.model.n_estimators = mj.at("n_estimators").get<int>();
    }
    if (mj.contains("max_depth")) {
      cfg.model.max_depth = mj.at("max_depth").get<int>();
    }
  }
  if (j.contains("dataset")) {
    const auto& dj = j.at("dataset");
    reject_unknown_keys(dj, {"kind", "n", "s", "max_rank", "path"},
                        "config.dataset");
    cfg.dataset.kind = kind_from_string(dj.at("kind").get<std::string>());
    if (dj.contains("n")) cfg.dataset.n = dj.at("n").get<std::size_t>();
    if (dj.contains("s")) cfg.dataset.s = dj.at("s").get<double>();
    if (dj.contains("max_rank")) {
      cfg.dataset.max_rank = dj.at("max_rank").get<std::uint64_t>();
    }
    if (dj.contains("path")) {
      cfg.dataset.path = dj.at("path").get<std::string>();
    }
  }
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("trials")) cfg.trials = j.at("trials").get<int>();
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("config: cannot open " + path.string());
  ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config: invalid JSON in " + path.string() + ": " +
                      e.what());
  }
  return from_json(j);
}

void ExperimentConfig::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("config: cannot write " + path.string());
  out << to_json().dump(2) << '\n';
}

}  // namespace ldplcm
