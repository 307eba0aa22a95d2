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

#include <cstdlib>
#include <string>

#include "ldplcm/errors.hpp"
#include "ldplcm/kernels.hpp"

namespace ldplcm::kernels {

#if defined(__x86_64__) || defined(_M_X64)
const Backend& avx2_backend();
#endif
#if defined(__aarch64__)
const Backend& neon_backend();
#endif

namespace {

bool cpu_has_avx2() {
#if (defined(__x86_64__) || defined(_M_X64)) && defined(__GNUC__)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const Backend& pick_backend() {
  if (const char* forced = std::getenv("LDPLCM_KERNELS")) {
    const std::string name(forced);
    if (name == "scalar") return scalar_backend();
#if defined(__x86_64__) || defined(_M_X64)
    if (name == "avx2") {
      if (!cpu_has_avx2()) {
        throw ConfigError("LDPLCM_KERNELS=avx2 but the CPU lacks AVX2");
      }
      return avx2_backend();
    }
#endif
#if defined(__aarch64__)
    if (name == "neon") return neon_backend();
#endif
    throw ConfigError("LDPLCM_KERNELS names an unavailable backend: " + name);
  }
#if defined(__x86_64__) || defined(_M_X64)
  if (cpu_has_avx2()) return avx2_backend();
#endif
#if defined(__aarch64__)
  return neon_backend();
#endif
  return scalar_backend();
}

}  // namespace

const Backend& active_backend() {
  static const Backend& backend = pick_backend();
  return backend;
}

}  // namespace ldplcm::kernels
