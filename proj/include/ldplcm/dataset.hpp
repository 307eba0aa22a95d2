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
#include <filesystem>
#include <string>
#include <vector>

#include "ldplcm/hash.hpp"

namespace ldplcm {

// One client population: the record stream (one item per client), the dense
// key domain, and the exact ground-truth tallies.
struct Dataset {
  std::vector<ItemKey> records;
  std::uint64_t domain_size = 0;
  std::vector<std::uint64_t> truth;      // truth[d] = f(d), size domain_size
  std::vector<std::string> token_map;    // key -> original token (CSV input)

  std::size_t size() const { return records.size(); }
};

// n i.i.d. draws from a Zipf distribution with skew s over ranks
// [1, max_rank]. Realized ranks are remapped, in ascending rank order, onto
// the dense keys 0..distinct-1, so domain_size is the realized distinct
// count and frequency stays (noisily) monotone in the key. max_rank = 0
// picks 10 * n, capped at 2^22.
Dataset gen_zipf(std::size_t n, double s, std::uint64_t max_rank,
                 std::uint64_t seed);

// Reads a text file with one record per line: either a bare token or
// "token,count" (count >= 1 repeats the token). Tokens are assigned dense
// keys in first-seen order; the mapping is kept in token_map. Malformed
// lines raise IoError with the line number.
Dataset ingest_csv(const std::filesystem::path& path);

// Directory layout: records.csv (one key per line), truth.csv (key,count),
// meta.json, and tokens.csv when a token mapping exists.
void save_dataset(const Dataset& dataset, const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace ldplcm
