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

#if defined(__aarch64__)

#include <arm_neon.h>

#include "ldplcm/kernels.hpp"

namespace ldplcm::kernels {

namespace {

void absorb_row_neon(std::uint64_t* plus_counts, const std::int8_t* entries,
                     std::size_t len) {
  std::size_t i = 0;
  for (; i + 2 <= len; i += 2) {
    int64x2_t lanes = {static_cast<std::int64_t>(entries[i]),
                       static_cast<std::int64_t>(entries[i + 1])};
    const uint64x2_t mask = vcgtq_s64(lanes, vdupq_n_s64(0));  // 0 or ~0
    uint64x2_t counts = vld1q_u64(plus_counts + i);
    counts = vsubq_u64(counts, mask);  // x - (~0) = x + 1
    vst1q_u64(plus_counts + i, counts);
  }
  for (; i < len; ++i) {
    plus_counts[i] += entries[i] > 0 ? 1u : 0u;
  }
}

// Lane accumulators acc01 and acc23 hold the stride-4 partial sums of the
// scalar reference: lanes (0,1) and (2,3) of each block of four.
double sum_sq_diff_neon(const double* a, const double* b, std::size_t len) {
  float64x2_t acc01 = vdupq_n_f64(0.0);
  float64x2_t acc23 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= len; i += 4) {
    const float64x2_t d01 = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
    const float64x2_t d23 = vsubq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
    acc01 = vaddq_f64(acc01, vmulq_f64(d01, d01));
    acc23 = vaddq_f64(acc23, vmulq_f64(d23, d23));
  }
  double tail = 0.0;
  for (; i < len; ++i) {
    const double d = a[i] - b[i];
    tail += d * d;
  }
  const double l0 = vgetq_lane_f64(acc01, 0);
  const double l1 = vgetq_lane_f64(acc01, 1);
  const double l2 = vgetq_lane_f64(acc23, 0);
  const double l3 = vgetq_lane_f64(acc23, 1);
  return ((l0 + l2) + (l1 + l3)) + tail;
}

}  // namespace

const Backend& neon_backend() {
  static const Backend backend{"neon", &absorb_row_neon, &sum_sq_diff_neon};
  return backend;
}

}  // namespace ldplcm::kernels

#endif  // __aarch64__
