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

#include "ldplcm/client.hpp"

#include <algorithm>

#include "ldplcm/errors.hpp"

namespace ldplcm {

std::vector<std::int8_t> encode_low(ItemKey d, const HashFamily& family,
                                    std::uint32_t row) {
  std::vector<std::int8_t> bits(family.width(), -1);
  bits[family.column(row, d)] = 1;
  return bits;
}

std::vector<std::int8_t> encode_high(std::uint32_t m) {
  return std::vector<std::int8_t>(m, -1);
}

void perturb(std::span<std::int8_t> bits, const PrivacyParams& params,
             Rng& rng) {
  for (std::int8_t& bit : bits) {
    if (rng.bernoulli(params.p_flip)) bit = -bit;
  }
}

void client_report_into(ItemKey d, Phase phase, const PublishedModel* model,
                        const PrivacyParams& params, const HashFamily& family,
                        Rng& rng, Report& out, bool* took_high_branch) {
  if (phase == Phase::two && model == nullptr) {
    throw ContractError("client_report: phase 2 requires a published model");
  }
  // Draw order is fixed (row first, then one Bernoulli per bit) so the same
  // client seed replays to the same report.
  const std::uint32_t row = rng.next_below(family.rows());
  out.row = static_cast<std::uint16_t>(row);

  const bool high = phase == Phase::two && model->is_high(d);
  if (took_high_branch != nullptr) *took_high_branch = high;

  out.bits.assign(family.width(), -1);
  if (!high) out.bits[family.column(row, d)] = 1;
  perturb(out.bits, params, rng);
}

Report client_report(ItemKey d, Phase phase, const PublishedModel* model,
                     const PrivacyParams& params, const HashFamily& family,
                     Rng& rng, bool* took_high_branch) {
  Report report;
  client_report_into(d, phase, model, params, family, rng, report,
                     took_high_branch);
  return report;
}

}  // namespace ldplcm
