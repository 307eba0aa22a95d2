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

#include "ldplcm/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>

#include "json.hpp"
#include "ldplcm/errors.hpp"
#include "ldplcm/rng.hpp"

namespace ldplcm {

Dataset gen_zipf(std::size_t n, double s, std::uint64_t max_rank,
                 std::uint64_t seed) {
  if (n == 0) throw ConfigError("gen_zipf: n must be >= 1");
  if (!(s >= 0.0)) throw ConfigError("gen_zipf: skew s must be >= 0");
  if (max_rank == 0) {
    max_rank = std::min<std::uint64_t>(10 * static_cast<std::uint64_t>(n),
                                       std::uint64_t{1} << 22);
  }

  // Inverse-CDF sampling over the truncated rank distribution.
  std::vector<double> cdf(max_rank);
  double total = 0.0;
  for (std::uint64_t rank = 1; rank <= max_rank; ++rank) {
    total += std::pow(static_cast<double>(rank), -s);
    cdf[rank - 1] = total;
  }

  Rng rng(seed);
  std::vector<std::uint64_t> ranks(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.next_double() * total;
    ranks[i] = static_cast<std::uint64_t>(
        std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
  }

  // Dense remap in ascending rank order.
  std::vector<std::uint64_t> distinct = ranks;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()),
                 distinct.end());
  std::unordered_map<std::uint64_t, ItemKey> remap;
  remap.reserve(distinct.size());
  for (std::size_t i = 0; i < distinct.size(); ++i) {
    remap.emplace(distinct[i], static_cast<ItemKey>(i));
  }

  Dataset dataset;
  dataset.domain_size = distinct.size();
  dataset.truth.assign(distinct.size(), 0);
  dataset.records.reserve(n);
  for (std::uint64_t rank : ranks) {
    const ItemKey key = remap.at(rank);
    dataset.records.push_back(key);
    ++dataset.truth[key];
  }
  return dataset;
}

namespace {

void add_record(Dataset& dataset,
                std::unordered_map<std::string, ItemKey>& seen,
                const std::string& token, std::uint64_t count) {
  auto [it, inserted] = seen.emplace(
      token, static_cast<ItemKey>(dataset.token_map.size()));
  if (inserted) {
    dataset.token_map.push_back(token);
    dataset.truth.push_back(0);
  }
  const ItemKey key = it->second;
  dataset.truth[key] += count;
  for (std::uint64_t i = 0; i < count; ++i) dataset.records.push_back(key);
}

}  // namespace

Dataset ingest_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("ingest_csv: cannot open " + path.string());

  Dataset dataset;
  std::unordered_map<std::string, ItemKey> seen;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    const std::size_t comma = line.find(',');
    if (comma == std::string::npos) {
      add_record(dataset, seen, line, 1);
      continue;
    }
    const std::string token = line.substr(0, comma);
    const std::string count_text = line.substr(comma + 1);
    if (token.empty() || count_text.empty() ||
        count_text.find(',') != std::string::npos ||
        count_text.find_first_not_of("0123456789") != std::string::npos) {
      throw IoError("ingest_csv: malformed line " +
                    std::to_string(line_number) + " in " + path.string());
    }
    std::uint64_t count = 0;
    try {
      count = std::stoull(count_text);
    } catch (const std::out_of_range&) {
      throw IoError("ingest_csv: count overflows at line " +
                    std::to_string(line_number) + " in " + path.string());
    }
    if (count == 0) {
      throw IoError("ingest_csv: zero count at line " +
                    std::to_string(line_number) + " in " + path.string());
    }
    add_record(dataset, seen, token, count);
  }
  dataset.domain_size = dataset.token_map.size();
  if (dataset.records.empty()) {
    throw IoError("ingest_csv: no records in " + path.string());
  }
  return dataset;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);

  {
    std::ofstream out(dir / "records.csv");
    if (!out) throw IoError("save_dataset: cannot write records.csv");
    for (ItemKey key : dataset.records) out << key << '\n';
  }
  {
    std::ofstream out(dir / "truth.csv");
    if (!out) throw IoError("save_dataset: cannot write truth.csv");
    out << "item,count\n";
    for (std::uint64_t d = 0; d < dataset.domain_size; ++d) {
      out << d << ',' << dataset.truth[d] << '\n';
    }
  }
  if (!dataset.token_map.empty()) {
    std::ofstream out(dir / "tokens.csv");
    if (!out) throw IoError("save_dataset: cannot write tokens.csv");
    for (std::size_t key = 0; key < dataset.token_map.size(); ++key) {
      out << key << ',' << dataset.token_map[key] << '\n';
    }
  }
  nlohmann::ordered_json meta;
  meta["format_version"] = 1;
  meta["n_records"] = dataset.records.size();
  meta["domain_size"] = dataset.domain_size;
  meta["has_tokens"] = !dataset.token_map.empty();
  std::ofstream out(dir / "meta.json");
  if (!out) throw IoError("save_dataset: cannot write meta.json");
  out << meta.dump(2) << '\n';
}

Dataset load_dataset(const std::filesystem::path& dir) {
  std::ifstream meta_in(dir / "meta.json");
  if (!meta_in) throw IoError("load_dataset: cannot open meta.json in " +
                              dir.string());
  nlohmann::ordered_json meta;
  try {
    meta_in >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("load_dataset: bad meta.json: " + std::string(e.what()));
  }

  Dataset dataset;
  dataset.domain_size = meta.at("domain_size").get<std::uint64_t>();
  dataset.truth.assign(dataset.domain_size, 0);

  try {
    std::ifstream in(dir / "records.csv");
    if (!in) throw IoError("load_dataset: cannot open records.csv");
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const ItemKey key = std::stoull(line);
      if (key >= dataset.domain_size) {
        throw IoError("load_dataset: record outside declared domain");
      }
      dataset.records.push_back(key);
      ++dataset.truth[key];
    }
    if (meta.at("has_tokens").get<bool>()) {
      std::ifstream in_tokens(dir / "tokens.csv");
      if (!in_tokens) throw IoError("load_dataset: cannot open tokens.csv");
      dataset.token_map.resize(dataset.domain_size);
      while (std::getline(in_tokens, line)) {
        if (line.empty()) continue;
        const std::size_t comma = line.find(',');
        const ItemKey key = std::stoull(line.substr(0, comma));
        if (key >= dataset.domain_size) {
          throw IoError("load_dataset: token key outside declared domain");
        }
        dataset.token_map[key] = line.substr(comma + 1);
      }
    }
  } catch (const std::logic_error&) {
    throw IoError("load_dataset: corrupt file in " + dir.string());
  }
  if (dataset.records.size() != meta.at("n_records").get<std::size_t>()) {
    throw IoError("load_dataset: record count does not match meta.json");
  }
  return dataset;
}

}  // namespace ldplcm
