// Copyright 2026 The qforce Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qforce/qmac.hpp"

#include <algorithm>

namespace qforce::qmac {

namespace {

bool fits(std::int64_t v, Precision mode) {
  const int w = fxp::bits(mode);
  return v >= fxp::min_code(w) && v <= fxp::max_code(w);
}

}  // namespace

SimdWord SimdWord::pack(std::span<const std::int32_t> lanes, Precision mode) {
  QFORCE_REQUIRE(lanes.size() == static_cast<std::size_t>(fxp::lane_count(mode)),
                 "pack: lane count does not match precision mode");
  SimdWord w;
  w.mode_ = mode;
  const int width = fxp::bits(mode);
  const std::uint64_t mask = (1ULL << width) - 1;
  for (std::size_t i = 0; i < lanes.size(); ++i) {
    QFORCE_REQUIRE(fits(lanes[i], mode), "pack: lane value exceeds the mode width");
    const std::uint64_t raw = static_cast<std::uint64_t>(static_cast<std::int64_t>(lanes[i])) & mask;
    const int bit = static_cast<int>(i) * width;
    if (bit < 64) {
      w.lo_ |= raw << bit;
    } else {
      w.hi_ |= raw << (bit - 64);
    }
  }
  return w;
}

std::vector<std::int32_t> SimdWord::unpack() const {
  std::vector<std::int32_t> out(static_cast<std::size_t>(fxp::lane_count(mode_)));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = lane(static_cast<int>(i));
  return out;
}

void AccumulatorBank::set(int i, std::int64_t v) {
  QFORCE_REQUIRE(i >= 0 && i < lanes(), "accumulator lane out of range");
  if (width() < 64) {
    QFORCE_REQUIRE(v >= fxp::min_code(width()) && v <= fxp::max_code(width()),
                   "accumulator value exceeds its width");
  }
  accs_[static_cast<std::size_t>(i)] = v;
}

AccumulatorBank simd_mac(const AccumulatorBank& acc, const SimdWord& a, const SimdWord& b,
                         MultiplierKind kind) {
  QFORCE_REQUIRE(a.mode() == acc.mode() && b.mode() == acc.mode(),
                 "simd_mac: operand and accumulator modes differ");
  AccumulatorBank out = acc;
  const int lanes = acc.lanes();
  const int width = acc.width();
  for (int i = 0; i < lanes; ++i) {
    const std::int64_t p = lane_product(a.lane(i), b.lane(i), acc.mode(), kind);
    out.set(i, saturating_add(acc[i], p, width));
  }
  return out;
}

std::int64_t dot(std::span<const std::int32_t> a, std::span<const std::int32_t> b, Precision mode,
                 MultiplierKind kind, MacCounter* counter) {
  QFORCE_REQUIRE(a.size() == b.size(), "dot: operand lengths differ");
  const auto lanes = static_cast<std::size_t>(fxp::lane_count(mode));
  AccumulatorBank bank(mode);
  std::array<std::int32_t, 16> la{};
  std::array<std::int32_t, 16> lb{};
  std::uint64_t cycles = 0;
  for (std::size_t base = 0; base < a.size(); base += lanes) {
    const std::size_t n = std::min(lanes, a.size() - base);
    std::copy_n(a.begin() + static_cast<std::ptrdiff_t>(base), n, la.begin());
    std::copy_n(b.begin() + static_cast<std::ptrdiff_t>(base), n, lb.begin());
    std::fill(la.begin() + static_cast<std::ptrdiff_t>(n), la.begin() + static_cast<std::ptrdiff_t>(lanes), 0);
    std::fill(lb.begin() + static_cast<std::ptrdiff_t>(n), lb.begin() + static_cast<std::ptrdiff_t>(lanes), 0);
    bank = simd_mac(bank, SimdWord::pack({la.data(), lanes}, mode),
                    SimdWord::pack({lb.data(), lanes}, mode), kind);
    ++cycles;
  }
  std::int64_t sum = 0;
  for (auto v : bank.values()) sum = saturating_add(sum, v, 64);
  if (counter) {
    counter->macs += a.size();
    counter->cycles += cycles;
  }
  return sum;
}

std::int64_t dot(const fxp::QTensor& a, const fxp::QTensor& b, Precision mode, MultiplierKind kind,
                 MacCounter* counter) {
  return dot(a.view(), b.view(), mode, kind, counter);
}

}  // namespace qforce::qmac
