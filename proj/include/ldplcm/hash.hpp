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
#include <vector>

#include "ldplcm/errors.hpp"
#include "ldplcm/rng.hpp"

namespace ldplcm {

// A domain element. String items are canonicalized to dense integers by the
// ingestion layer before they reach any sketch.
using ItemKey = std::uint64_t;

// Seeded family of k column hashes [0, m) plus k sign hashes {-1, +1}.
// The per-function seeds are the first 2k outputs of a SplitMix64 stream
// seeded with master_seed, so the same (k, m, master_seed) triple reproduces
// the exact same placements on any machine. Immutable after construction.
class HashFamily {
 public:
  HashFamily(std::uint32_t k, std::uint32_t m, std::uint64_t master_seed)
      : k_(k), m_(m), master_seed_(master_seed) {
    if (k == 0) throw ConfigError("HashFamily: k must be >= 1");
    if (m == 0) throw ConfigError("HashFamily: m must be >= 1");
    Rng rng(master_seed);
    column_seeds_.reserve(k);
    sign_seeds_.reserve(k);
    for (std::uint32_t j = 0; j < k; ++j) column_seeds_.push_back(rng.next_u64());
    for (std::uint32_t j = 0; j < k; ++j) sign_seeds_.push_back(rng.next_u64());
  }

  // Column of item d under hash row j, in [0, m). Modulo reduction: the bias
  // is negligible for m far below 2^64.
  std::uint32_t column(std::uint32_t row, ItemKey d) const {
    check_row(row);
    return static_cast<std::uint32_t>(mix64(column_seeds_[row] ^ d) % m_);
  }

  // Sign of item d under row j, in {-1, +1}.
  int sign(std::uint32_t row, ItemKey d) const {
    check_row(row);
    return (mix64(sign_seeds_[row] ^ d) & 1u) ? 1 : -1;
  }

  std::uint32_t rows() const { return k_; }
  std::uint32_t width() const { return m_; }
  std::uint64_t master_seed() const { return master_seed_; }

  bool operator==(const HashFamily& other) const {
    return k_ == other.k_ && m_ == other.m_ && master_seed_ == other.master_seed_;
  }

 private:
  void check_row(std::uint32_t row) const {
    if (row >= k_) throw ContractError("HashFamily: row index out of range");
  }

  std::uint32_t k_;
  std::uint32_t m_;
  std::uint64_t master_seed_;
  std::vector<std::uint64_t> column_seeds_;
  std::vector<std::uint64_t> sign_seeds_;
};

}  // namespace ldplcm
