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
#include <optional>
#include <vector>

#include "ldplcm/hash.hpp"
#include "ldplcm/privacy.hpp"
#include "ldplcm/report.hpp"

namespace ldplcm {

// Plain Count-Min sketch: k rows of m non-negative counters, estimate by the
// row-wise minimum. Always over-estimates.
class CountMinSketch {
 public:
  CountMinSketch(std::uint32_t k, std::uint32_t m, std::uint64_t master_seed)
      : family_(k, m, master_seed), counts_(std::size_t{k} * m, 0) {}

  // Width/depth from the usual error bounds: m = ceil(e / eps_cm),
  // k = ceil(ln(1 / delta_cm)). These are sketch accuracy knobs, unrelated to
  // the privacy budget.
  static CountMinSketch from_error_bounds(double eps_cm, double delta_cm,
                                          std::uint64_t master_seed);

  void update(ItemKey x);
  std::uint64_t estimate(ItemKey x) const;

  std::uint64_t cell(std::uint32_t row, std::uint32_t col) const {
    return counts_[std::size_t{row} * family_.width() + col];
  }
  const HashFamily& family() const { return family_; }
  std::uint32_t rows() const { return family_.rows(); }
  std::uint32_t width() const { return family_.width(); }

 private:
  HashFamily family_;
  std::vector<std::uint64_t> counts_;
};

// Count sketch: same grid, but each update is signed by a per-row +/-1 hash
// and the estimate is the sign-corrected mean over rows.
class CountSketch {
 public:
  CountSketch(std::uint32_t k, std::uint32_t m, std::uint64_t master_seed)
      : family_(k, m, master_seed), counts_(std::size_t{k} * m, 0) {}

  void update(ItemKey x);
  double estimate(ItemKey x) const;

  std::int64_t cell(std::uint32_t row, std::uint32_t col) const {
    return counts_[std::size_t{row} * family_.width() + col];
  }
  const HashFamily& family() const { return family_; }
  std::uint32_t rows() const { return family_.rows(); }
  std::uint32_t width() const { return family_.width(); }

 private:
  HashFamily family_;
  std::vector<std::int64_t> counts_;
};

// Real-valued k x m matrix the server accumulates perturbed reports into.
// Absorbing a report contributes k * (c_eps * bit + 1) / 2 to every cell of
// the report's row, which debiases the randomized response in expectation.
//
// Internally each cell stores the integer count of +1 bits it received; the
// real matrix M = plus * hi + (row_reports - plus) * lo materializes on
// first read. Integer counters make absorb and merge exact, so shard merges
// commute with sequential absorption bit for bit, in any order.
class AggregateSketch {
 public:
  // m >= 2 because every estimator divides by (m - 1).
  AggregateSketch(HashFamily family, PrivacyParams params);

  // Rejects (throws ContractError) when the vector length or row index does
  // not match this sketch.
  void absorb(const Report& report);

  // Elementwise sum; both sketches must share (k, m, seed, epsilon).
  void merge(const AggregateSketch& other);

  // Zeroes the matrix and the report count (the phase handover).
  void reset();

  // Reading the matrix finalizes it; the first read must not race with
  // writes. Reads after that are safe from any number of threads.
  double cell(std::uint32_t row, std::uint32_t col) const {
    if (dirty_) materialize();
    return matrix_[std::size_t{row} * family_.width() + col];
  }
  const std::vector<double>& matrix() const {
    if (dirty_) materialize();
    return matrix_;
  }

  std::uint64_t report_count() const { return n_; }
  const HashFamily& family() const { return family_; }
  const PrivacyParams& params() const { return params_; }
  std::uint32_t rows() const { return family_.rows(); }
  std::uint32_t width() const { return family_.width(); }

  bool same_shape(const AggregateSketch& other) const {
    return family_ == other.family_ && params_ == other.params_;
  }

  // Adopts a matrix read back from a sketch file. The integer counters are
  // gone at that point, so a restored sketch only answers estimates; absorb
  // and merge on it are contract errors.
  void restore(std::vector<double> cells, std::uint64_t n);

 private:
  void materialize() const;

  HashFamily family_;
  PrivacyParams params_;
  std::vector<std::uint64_t> plus_counts_;   // per cell: received +1 bits
  std::vector<std::uint64_t> row_reports_;   // per row: absorbed reports
  std::uint64_t n_ = 0;
  double plus_delta_ = 0.0;   // cell delta for a +1 bit: k (c_eps + 1) / 2
  double minus_delta_ = 0.0;  // cell delta for a -1 bit: k (1 - c_eps) / 2
  bool restored_ = false;
  mutable std::vector<double> matrix_;
  mutable bool dirty_ = true;
};

// Binary sketch file: "LCMS" magic, u16 version, header (k, m, epsilon,
// master_seed, n, optional theta), then the matrix as row-major 64-bit
// little-endian floats.
struct LoadedSketch {
  AggregateSketch sketch;
  std::optional<double> theta;
};

void save_sketch(const AggregateSketch& sketch,
                 const std::filesystem::path& path,
                 std::optional<double> theta = std::nullopt);
LoadedSketch load_sketch(const std::filesystem::path& path);

}  // namespace ldplcm
