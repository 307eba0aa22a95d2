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

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace ldplcm {

// The only thing a client ever transmits: a perturbed +/-1 vector of length m
// and the hash row the client picked for itself.
struct Report {
  std::uint16_t row = 0;
  std::vector<std::int8_t> bits;  // each entry is exactly -1 or +1

  bool operator==(const Report&) const = default;
};

// Wire format: row as little-endian uint16, then the vector bit-packed
// LSB-first within each byte (+1 -> 1, -1 -> 0), padded to whole bytes.
std::vector<std::uint8_t> encode_report(const Report& report);

// Decodes a record produced by encode_report; m is the vector length the
// receiver expects. Throws ContractError on a short or oversized buffer.
Report decode_report(const std::uint8_t* data, std::size_t size, std::size_t m);

// Length-prefixed binary log: each record is a little-endian uint32 payload
// size followed by the encode_report payload.
void append_report_log(std::ostream& out, const Report& report);
std::vector<Report> read_report_log(std::istream& in, std::size_t m);

}  // namespace ldplcm
