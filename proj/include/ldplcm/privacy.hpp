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

#include <cmath>
#include <limits>

#include "ldplcm/errors.hpp"

namespace ldplcm {

// Privacy budget epsilon and the two constants derived from it:
//   p_flip    = 1 / (e^{eps/2} + 1), the per-bit sign-flip probability,
//   c_epsilon = (e^{eps/2} + 1) / (e^{eps/2} - 1), the debiasing factor the
//               server applies to each received bit.
// Both are pure functions of epsilon; 0 < p_flip < 1/2 and c_epsilon > 1.
struct PrivacyParams {
  double epsilon = 0.0;
  double p_flip = 0.0;
  double c_epsilon = 0.0;

  static PrivacyParams from_epsilon(double epsilon) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
      throw ConfigError("PrivacyParams: epsilon must be a positive finite number");
    }
    const double e_half = std::exp(epsilon / 2.0);
    PrivacyParams p;
    p.epsilon = epsilon;
    p.p_flip = 1.0 / (e_half + 1.0);
    p.c_epsilon = (e_half + 1.0) / (e_half - 1.0);
    return p;
  }

  bool operator==(const PrivacyParams& other) const {
    return epsilon == other.epsilon;
  }
};

}  // namespace ldplcm
