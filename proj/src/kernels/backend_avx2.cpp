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

// Compiled with -mavx2 on x86-64 only; dispatch.cpp checks the CPU before
// handing out this backend.

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cstring>

#include "ldplcm/kernels.hpp"

namespace ldplcm::kernels {

namespace {

void absorb_row_avx2(std::uint64_t* plus_counts, const std::int8_t* entries,
                     std::size_t len) {
  const __m128i zero = _mm_setzero_si128();
  std::size_t i = 0;
  for (; i + 4 <= len; i += 4) {
    std::int32_t packed;
    std::memcpy(&packed, entries + i, sizeof(packed));
    const __m128i bytes = _mm_cvtsi32_si128(packed);
    const __m128i lanes32 = _mm_cvtepi8_epi32(bytes);
    const __m128i gt32 = _mm_cmpgt_epi32(lanes32, zero);  // 0 or -1 per lane
    const __m256i mask64 = _mm256_cvtepi32_epi64(gt32);
    __m256i counts = _mm256_loadu_si256(
        reinterpret_cast<const __m256i*>(plus_counts + i));
    counts = _mm256_sub_epi64(counts, mask64);  // x - (-1) = x + 1
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(plus_counts + i), counts);
  }
  for (; i < len; ++i) {
    plus_counts[i] += entries[i] > 0 ? 1u : 0u;
  }
}

double sum_sq_diff_avx2(const double* a, const double* b, std::size_t len) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= len; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i),
                                    _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double tail = 0.0;
  for (; i < len; ++i) {
    const double d = a[i] - b[i];
    tail += d * d;
  }
  return ((lanes[0] + lanes[2]) + (lanes[1] + lanes[3])) + tail;
}

}  // namespace

const Backend& avx2_backend() {
  static const Backend backend{"avx2", &absorb_row_avx2, &sum_sq_diff_avx2};
  return backend;
}

}  // namespace ldplcm::kernels

#endif  // x86-64
