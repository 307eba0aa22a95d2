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

#include "ldplcm/server.hpp"

namespace ldplcm {

double row_average_at(const AggregateSketch& sketch, ItemKey d) {
  const HashFamily& family = sketch.family();
  double sum = 0.0;
  for (std::uint32_t row = 0; row < family.rows(); ++row) {
    sum += sketch.cell(row, family.column(row, d));
  }
  return sum / static_cast<double>(family.rows());
}

double estimate_low(const AggregateSketch& sketch, double theta, ItemKey d) {
  const double m = static_cast<double>(sketch.width());
  const double n = static_cast<double>(sketch.report_count());
  return m / (m - 1.0) *
         (row_average_at(sketch, d) - (1.0 - theta) * n / m);
}

double estimate_apple_cms(const AggregateSketch& sketch, ItemKey d) {
  return estimate_low(sketch, 0.0, d);
}

double estimate_ldplcm(const AggregateSketch& sketch,
                       const PublishedModel& model, double theta, ItemKey d,
                       bool* via_model) {
  const bool high = model.is_high(d);
  if (via_model != nullptr) *via_model = high;
  if (high) return model.predict(d);
  return estimate_low(sketch, theta, d);
}

double variance_bound(double n, double m, double k, double theta, double f_d,
                      double sum_sq_low, const PrivacyParams& params) {
  const double c = params.c_epsilon;
  return n * (c * c - 1.0) / 4.0 + (n * (1.0 - theta) - f_d) / m +
         sum_sq_low / (k * m);
}

}  // namespace ldplcm
