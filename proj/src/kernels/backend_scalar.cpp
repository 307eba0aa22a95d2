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

#include "ldplcm/kernels.hpp"

namespace ldplcm::kernels {

namespace {

void absorb_row_scalar(std::uint64_t* plus_counts, const std::int8_t* entries,
                       std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) {
    plus_counts[i] += entries[i] > 0 ? 1u : 0u;
  }
}

double sum_sq_diff_scalar(const double* a, const double* b, std::size_t len) {
  double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0, acc3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= len; i += 4) {
    const double d0 = a[i] - b[i];
    const double d1 = a[i + 1] - b[i + 1];
    const double d2 = a[i + 2] - b[i + 2];
    const double d3 = a[i + 3] - b[i + 3];
    acc0 += d0 * d0;
    acc1 += d1 * d1;
    acc2 += d2 * d2;
    acc3 += d3 * d3;
  }
  double tail = 0.0;
  for (; i < len; ++i) {
    const double d = a[i] - b[i];
    tail += d * d;
  }
  return ((acc0 + acc2) + (acc1 + acc3)) + tail;
}

}  // namespace

const Backend& scalar_backend() {
  static const Backend backend{"scalar", &absorb_row_scalar,
                               &sum_sq_diff_scalar};
  return backend;
}

}  // namespace ldplcm::kernels
