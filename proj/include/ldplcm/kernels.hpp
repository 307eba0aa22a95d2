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

#include <cstddef>
#include <cstdint>

namespace ldplcm::kernels {

// Inner loops that dominate aggregation and metric computation. Every backend
// must produce results bit-identical to the scalar reference:
//
//  * absorb_row increments integer counters, exact by construction.
//  * sum_sq_diff is pinned to a fixed reduction order: four stride-4 lane
//    accumulators combined as (l0 + l2) + (l1 + l3), plus an in-order tail.
//    Vector backends implement that same order with their native lanes.

// plus_counts[i] += 1 wherever entries[i] > 0, for i in [0, len).
// `entries` holds the +/-1 report bits as signed bytes.
using AbsorbRowFn = void (*)(std::uint64_t* plus_counts,
                             const std::int8_t* entries, std::size_t len);

// Sum of (a[i] - b[i])^2 over [0, len) in the pinned reduction order.
using SumSqDiffFn = double (*)(const double* a, const double* b,
                               std::size_t len);

struct Backend {
  const char* name;
  AbsorbRowFn absorb_row;
  SumSqDiffFn sum_sq_diff;
};

// Portable reference implementation; always available.
const Backend& scalar_backend();

// Best backend for this CPU, chosen once per process. The environment
// variable LDPLCM_KERNELS (scalar | avx2 | neon) forces a specific backend
// and throws ConfigError if it names one this build/CPU cannot run.
const Backend& active_backend();

}  // namespace ldplcm::kernels
