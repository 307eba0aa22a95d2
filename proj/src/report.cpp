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

#include "ldplcm/report.hpp"

#include <istream>
#include <ostream>

#include "ldplcm/errors.hpp"

namespace ldplcm {

std::vector<std::uint8_t> encode_report(const Report& report) {
  const std::size_t m = report.bits.size();
  std::vector<std::uint8_t> out(2 + (m + 7) / 8, 0);
  out[0] = static_cast<std::uint8_t>(report.row & 0xff);
  out[1] = static_cast<std::uint8_t>(report.row >> 8);
  for (std::size_t i = 0; i < m; ++i) {
    if (report.bits[i] > 0) {
      out[2 + i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
    }
  }
  return out;
}

Report decode_report(const std::uint8_t* data, std::size_t size,
                     std::size_t m) {
  const std::size_t expected = 2 + (m + 7) / 8;
  if (size != expected) {
    throw ContractError("decode_report: payload size does not match m");
  }
  Report report;
  report.row = static_cast<std::uint16_t>(data[0] | (data[1] << 8));
  report.bits.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    report.bits[i] = (data[2 + i / 8] >> (i % 8)) & 1u ? 1 : -1;
  }
  return report;
}

void append_report_log(std::ostream& out, const Report& report) {
  const std::vector<std::uint8_t> payload = encode_report(report);
  const std::uint32_t size = static_cast<std::uint32_t>(payload.size());
  const std::uint8_t header[4] = {
      static_cast<std::uint8_t>(size & 0xff),
      static_cast<std::uint8_t>((size >> 8) & 0xff),
      static_cast<std::uint8_t>((size >> 16) & 0xff),
      static_cast<std::uint8_t>((size >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(header), 4);
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size()));
}

std::vector<Report> read_report_log(std::istream& in, std::size_t m) {
  std::vector<Report> reports;
  std::uint8_t header[4];
  while (in.read(reinterpret_cast<char*>(header), 4)) {
    const std::uint32_t size = header[0] | (header[1] << 8) |
                               (header[2] << 16) |
                               (static_cast<std::uint32_t>(header[3]) << 24);
    std::vector<std::uint8_t> payload(size);
    if (!in.read(reinterpret_cast<char*>(payload.data()), size)) {
      throw IoError("read_report_log: truncated record");
    }
    reports.push_back(decode_report(payload.data(), payload.size(), m));
  }
  return reports;
}

}  // namespace ldplcm
