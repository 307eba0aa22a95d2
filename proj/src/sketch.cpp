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

#include "ldplcm/sketch.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "ldplcm/kernels.hpp"

namespace ldplcm {

CountMinSketch CountMinSketch::from_error_bounds(double eps_cm,
                                                 double delta_cm,
                                                 std::uint64_t master_seed) {
  if (!(eps_cm > 0.0) || !(delta_cm > 0.0 && delta_cm < 1.0)) {
    throw ConfigError("CountMinSketch: need eps_cm > 0 and 0 < delta_cm < 1");
  }
  const auto m = static_cast<std::uint32_t>(
      std::ceil(std::exp(1.0) / eps_cm));
  const auto k = static_cast<std::uint32_t>(
      std::ceil(std::log(1.0 / delta_cm)));
  return CountMinSketch(std::max(k, 1u), std::max(m, 1u), master_seed);
}

void CountMinSketch::update(ItemKey x) {
  const std::uint32_t m = family_.width();
  for (std::uint32_t row = 0; row < family_.rows(); ++row) {
    ++counts_[std::size_t{row} * m + family_.column(row, x)];
  }
}

std::uint64_t CountMinSketch::estimate(ItemKey x) const {
  const std::uint32_t m = family_.width();
  std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
  for (std::uint32_t row = 0; row < family_.rows(); ++row) {
    best = std::min(best, counts_[std::size_t{row} * m + family_.column(row, x)]);
  }
  return best;
}

void CountSketch::update(ItemKey x) {
  const std::uint32_t m = family_.width();
  for (std::uint32_t row = 0; row < family_.rows(); ++row) {
    counts_[std::size_t{row} * m + family_.column(row, x)] +=
        family_.sign(row, x);
  }
}

double CountSketch::estimate(ItemKey x) const {
  const std::uint32_t m = family_.width();
  double sum = 0.0;
  for (std::uint32_t row = 0; row < family_.rows(); ++row) {
    sum += static_cast<double>(
               counts_[std::size_t{row} * m + family_.column(row, x)]) *
           family_.sign(row, x);
  }
  return sum / family_.rows();
}

AggregateSketch::AggregateSketch(HashFamily family, PrivacyParams params)
    : family_(std::move(family)),
      params_(params),
      plus_counts_(std::size_t{family_.rows()} * family_.width(), 0),
      row_reports_(family_.rows(), 0) {
  if (family_.width() < 2) {
    throw ConfigError("AggregateSketch: m must be >= 2");
  }
  const double k = static_cast<double>(family_.rows());
  plus_delta_ = k * (params_.c_epsilon + 1.0) / 2.0;
  minus_delta_ = k * (1.0 - params_.c_epsilon) / 2.0;
}

void AggregateSketch::absorb(const Report& report) {
  if (restored_) {
    throw ContractError("AggregateSketch: restored sketches are read-only");
  }
  if (report.bits.size() != family_.width()) {
    throw ContractError("AggregateSketch: report vector length != m");
  }
  if (report.row >= family_.rows()) {
    throw ContractError("AggregateSketch: report row index >= k");
  }
  std::uint64_t* row =
      plus_counts_.data() + std::size_t{report.row} * family_.width();
  kernels::active_backend().absorb_row(row, report.bits.data(),
                                       report.bits.size());
  ++row_reports_[report.row];
  ++n_;
  dirty_ = true;
}

void AggregateSketch::merge(const AggregateSketch& other) {
  if (!same_shape(other)) {
    throw ContractError("AggregateSketch: merge shape/parameter mismatch");
  }
  if (restored_ || other.restored_) {
    throw ContractError("AggregateSketch: restored sketches are read-only");
  }
  for (std::size_t i = 0; i < plus_counts_.size(); ++i) {
    plus_counts_[i] += other.plus_counts_[i];
  }
  for (std::size_t j = 0; j < row_reports_.size(); ++j) {
    row_reports_[j] += other.row_reports_[j];
  }
  n_ += other.n_;
  dirty_ = true;
}

void AggregateSketch::reset() {
  std::fill(plus_counts_.begin(), plus_counts_.end(), 0);
  std::fill(row_reports_.begin(), row_reports_.end(), 0);
  n_ = 0;
  restored_ = false;
  dirty_ = true;
}

void AggregateSketch::materialize() const {
  const std::uint32_t m = family_.width();
  matrix_.resize(plus_counts_.size());
  for (std::uint32_t row = 0; row < family_.rows(); ++row) {
    const auto row_n = static_cast<double>(row_reports_[row]);
    const std::size_t base = std::size_t{row} * m;
    for (std::uint32_t col = 0; col < m; ++col) {
      const auto plus = static_cast<double>(plus_counts_[base + col]);
      matrix_[base + col] = plus * plus_delta_ + (row_n - plus) * minus_delta_;
    }
  }
  dirty_ = false;
}

void AggregateSketch::restore(std::vector<double> cells, std::uint64_t n) {
  if (cells.size() != plus_counts_.size()) {
    throw ContractError("AggregateSketch: restore size mismatch");
  }
  matrix_ = std::move(cells);
  n_ = n;
  restored_ = true;
  dirty_ = false;
}

namespace {

constexpr char kSketchMagic[4] = {'L', 'C', 'M', 'S'};
constexpr std::uint16_t kSketchVersion = 1;

void put_u16(std::ostream& out, std::uint16_t v) {
  const std::uint8_t b[2] = {static_cast<std::uint8_t>(v & 0xff),
                             static_cast<std::uint8_t>(v >> 8)};
  out.write(reinterpret_cast<const char*>(b), 2);
}

void put_u32(std::ostream& out, std::uint32_t v) {
  std::uint8_t b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  std::uint8_t b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

void put_f64(std::ostream& out, double v) {
  put_u64(out, std::bit_cast<std::uint64_t>(v));
}

std::uint16_t get_u16(std::istream& in) {
  std::uint8_t b[2];
  in.read(reinterpret_cast<char*>(b), 2);
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

std::uint32_t get_u32(std::istream& in) {
  std::uint8_t b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::istream& in) {
  std::uint8_t b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& in) {
  return std::bit_cast<double>(get_u64(in));
}

}  // namespace

void save_sketch(const AggregateSketch& sketch,
                 const std::filesystem::path& path,
                 std::optional<double> theta) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("save_sketch: cannot open " + path.string());
  out.write(kSketchMagic, 4);
  put_u16(out, kSketchVersion);
  put_u32(out, sketch.rows());
  put_u32(out, sketch.width());
  put_f64(out, sketch.params().epsilon);
  put_u64(out, sketch.family().master_seed());
  put_u64(out, sketch.report_count());
  out.put(theta.has_value() ? 1 : 0);
  put_f64(out, theta.value_or(0.0));
  for (double cell : sketch.matrix()) put_f64(out, cell);
  if (!out) throw IoError("save_sketch: write failed for " + path.string());
}

LoadedSketch load_sketch(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("load_sketch: cannot open " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kSketchMagic, 4) != 0) {
    throw IoError("load_sketch: bad magic in " + path.string());
  }
  const std::uint16_t version = get_u16(in);
  if (version != kSketchVersion) {
    throw IoError("load_sketch: unsupported format version");
  }
  const std::uint32_t k = get_u32(in);
  const std::uint32_t m = get_u32(in);
  const double epsilon = get_f64(in);
  const std::uint64_t seed = get_u64(in);
  const std::uint64_t n = get_u64(in);
  const int has_theta = in.get();
  const double theta = get_f64(in);
  if (!in) throw IoError("load_sketch: truncated header");

  AggregateSketch sketch(HashFamily(k, m, seed),
                         PrivacyParams::from_epsilon(epsilon));
  std::vector<double> cells(std::size_t{k} * m);
  for (double& cell : cells) cell = get_f64(in);
  if (!in) throw IoError("load_sketch: truncated matrix");

  LoadedSketch result{std::move(sketch),
                      has_theta ? std::optional<double>(theta) : std::nullopt};
  result.sketch.restore(std::move(cells), n);
  return result;
}

}  // namespace ldplcm
