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

#pragma once

// Bit-exact model of the multi-precision SIMD multiply-accumulate unit.
//
// The datapath owns sixteen 8x8 multiplier primitives. FxP8 mode feeds one
// lane to each primitive (16 MACs/cycle), FxP16 spends four primitives per
// lane (4 MACs/cycle) and FxP32 spends all sixteen on one lane (1 MAC/cycle).
// Wider products are recombined by shift-add from byte partial products:
// the top byte of each operand is signed, the lower bytes unsigned.

#include <array>
#include <bit>
#include <cstdint>
#include <limits>
#include <span>
#include <type_traits>
#include <vector>

#include "qforce/error.hpp"
#include "qforce/fxp.hpp"

namespace qforce::qmac {

using fxp::Precision;

enum class MultiplierKind : std::uint8_t { Exact, MitchellLog };

// One byte operand of the 8x8 primitive; `is_signed` selects two's-complement
// or unsigned interpretation, the per-port sign mode of the multiplier array.
struct Operand8 {
  std::uint8_t byte = 0;
  bool is_signed = true;

  constexpr std::int32_t value() const {
    return is_signed ? static_cast<std::int32_t>(static_cast<std::int8_t>(byte))
                     : static_cast<std::int32_t>(byte);
  }
};

// Mitchell's logarithmic product of two magnitudes: log2 is approximated by
// the piecewise-linear k + f/2^k, summed, and inverted the same way. The
// result never exceeds the exact product and is exact for powers of two.
constexpr std::uint32_t mitchell_magnitude(std::uint32_t a, std::uint32_t b) {
  if (a == 0 || b == 0) return 0;
  const int ka = std::bit_width(a) - 1;
  const int kb = std::bit_width(b) - 1;
  const std::uint32_t fa = a - (std::uint32_t{1} << ka);
  const std::uint32_t fb = b - (std::uint32_t{1} << kb);
  const std::uint32_t mantissa = (fa << kb) + (fb << ka);
  const std::uint32_t base = std::uint32_t{1} << (ka + kb);
  return mantissa < base ? base + mantissa : 2 * mantissa;
}

// The 8x8 multiplier primitive.
constexpr std::int32_t mul8x8(Operand8 a, Operand8 b, MultiplierKind kind) {
  const std::int32_t x = a.value();
  const std::int32_t y = b.value();
  if (kind == MultiplierKind::Exact) return x * y;
  const auto mag = static_cast<std::int32_t>(
      mitchell_magnitude(static_cast<std::uint32_t>(x < 0 ? -x : x),
                         static_cast<std::uint32_t>(y < 0 ? -y : y)));
  return ((x < 0) != (y < 0)) ? -mag : mag;
}

inline std::int16_t mul8(std::int8_t a, std::int8_t b, MultiplierKind kind = MultiplierKind::Exact) {
  return static_cast<std::int16_t>(
      mul8x8({static_cast<std::uint8_t>(a), true}, {static_cast<std::uint8_t>(b), true}, kind));
}

// Byte i of a W-byte operand as a primitive input: only the top byte signed.
template <int Bytes, class T>
constexpr Operand8 byte_operand(T v, int i) {
  using U = std::make_unsigned_t<T>;
  return {static_cast<std::uint8_t>(static_cast<U>(v) >> (8 * i)), i == Bytes - 1};
}

// 16x16 product from four primitive calls. `prim` is any callable with the
// signature of mul8x8 minus the kind argument, so tests can observe calls.
template <class Primitive>
std::int32_t mul16_composed_with(std::int16_t a, std::int16_t b, Primitive&& prim) {
  std::uint32_t sum = 0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const std::int32_t partial = prim(byte_operand<2>(a, i), byte_operand<2>(b, j));
      sum += static_cast<std::uint32_t>(partial) << (8 * (i + j));
    }
  }
  return static_cast<std::int32_t>(sum);
}

// 32x32 product from sixteen primitive calls, recombined modulo 2^64; the
// true product always fits in 64 bits so the wrap-free result is exact.
template <class Primitive>
std::int64_t mul32_composed_with(std::int32_t a, std::int32_t b, Primitive&& prim) {
  std::uint64_t sum = 0;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      const std::int32_t partial = prim(byte_operand<4>(a, i), byte_operand<4>(b, j));
      sum += static_cast<std::uint64_t>(static_cast<std::int64_t>(partial)) << (8 * (i + j));
    }
  }
  return static_cast<std::int64_t>(sum);
}

inline std::int32_t mul16_composed(std::int16_t a, std::int16_t b,
                                   MultiplierKind kind = MultiplierKind::Exact) {
  return mul16_composed_with(a, b, [kind](Operand8 x, Operand8 y) { return mul8x8(x, y, kind); });
}

inline std::int64_t mul32_composed(std::int32_t a, std::int32_t b,
                                   MultiplierKind kind = MultiplierKind::Exact) {
  return mul32_composed_with(a, b, [kind](Operand8 x, Operand8 y) { return mul8x8(x, y, kind); });
}

// Product of two lane values at the given mode's width.
inline std::int64_t lane_product(std::int32_t a, std::int32_t b, Precision mode, MultiplierKind kind) {
  switch (mode) {
    case Precision::FxP8:
      return mul8(static_cast<std::int8_t>(a), static_cast<std::int8_t>(b), kind);
    case Precision::FxP16:
      return mul16_composed(static_cast<std::int16_t>(a), static_cast<std::int16_t>(b), kind);
    case Precision::FxP32:
      return mul32_composed(a, b, kind);
  }
  return 0;
}

// 128-bit packed operand register. Lane i of width w occupies bits
// [i*w, (i+1)*w), little-endian by lane index; unused upper bits are zero.
class SimdWord {
 public:
  SimdWord() = default;

  // Throws ContractViolation unless lanes.size() == lane_count(mode) and
  // every lane fits the mode's signed width.
  static SimdWord pack(std::span<const std::int32_t> lanes, Precision mode);

  std::vector<std::int32_t> unpack() const;

  std::int32_t lane(int i) const {
    const int w = fxp::bits(mode_);
    const int bit = i * w;
    const std::uint64_t word = bit < 64 ? lo_ : hi_;
    const std::uint64_t raw = (word >> (bit & 63)) & (w == 64 ? ~0ULL : ((1ULL << w) - 1));
    // Sign-extend from w bits.
    const std::uint64_t sign = 1ULL << (w - 1);
    return static_cast<std::int32_t>(static_cast<std::int64_t>((raw ^ sign) - sign));
  }

  Precision mode() const { return mode_; }
  std::uint64_t low() const { return lo_; }
  std::uint64_t high() const { return hi_; }

  friend bool operator==(const SimdWord&, const SimdWord&) = default;

 private:
  std::uint64_t lo_ = 0;
  std::uint64_t hi_ = 0;
  Precision mode_ = Precision::FxP8;
};

// Accumulator width per mode: 32 bits behind FxP8 and FxP16 lanes, 64 bits
// behind the single FxP32 lane.
constexpr int accumulator_bits(Precision mode) { return mode == Precision::FxP32 ? 64 : 32; }

inline std::int64_t saturating_add(std::int64_t a, std::int64_t b, int width_bits) {
  if (width_bits >= 64) {
    std::int64_t r;
    if (__builtin_add_overflow(a, b, &r)) {
      return b > 0 ? std::numeric_limits<std::int64_t>::max()
                   : std::numeric_limits<std::int64_t>::min();
    }
    return r;
  }
  const std::int64_t hi = (std::int64_t{1} << (width_bits - 1)) - 1;
  const std::int64_t lo = -(std::int64_t{1} << (width_bits - 1));
  const std::int64_t r = a + b;  // operands are at most 33 bits wide here
  return r > hi ? hi : (r < lo ? lo : r);
}

class AccumulatorBank {
 public:
  explicit AccumulatorBank(Precision mode = Precision::FxP8) : mode_(mode) {}

  Precision mode() const { return mode_; }
  int lanes() const { return fxp::lane_count(mode_); }
  int width() const { return accumulator_bits(mode_); }
  std::int64_t operator[](int i) const { return accs_[static_cast<std::size_t>(i)]; }
  std::span<const std::int64_t> values() const {
    return {accs_.data(), static_cast<std::size_t>(lanes())};
  }
  void set(int i, std::int64_t v);

  friend bool operator==(const AccumulatorBank&, const AccumulatorBank&) = default;

 private:
  Precision mode_;
  std::array<std::int64_t, 16> accs_{};
};

// One hardware cycle: acc_i <- sat(acc_i + a_i * b_i) on every active lane.
// Throws ContractViolation when the three modes disagree.
AccumulatorBank simd_mac(const AccumulatorBank& acc, const SimdWord& a, const SimdWord& b,
                         MultiplierKind kind = MultiplierKind::Exact);

// Bookkeeping for dot(): logical MACs issued and simd_mac cycles spent.
struct MacCounter {
  std::uint64_t macs = 0;
  std::uint64_t cycles = 0;
};

// Sum of a_i * b_i in product space. Operands are streamed through simd_mac
// one packed word at a time (the tail is zero-padded) and the bank is reduced
// lane 0 upward by saturating 64-bit addition.
std::int64_t dot(std::span<const std::int32_t> a, std::span<const std::int32_t> b, Precision mode,
                 MultiplierKind kind = MultiplierKind::Exact, MacCounter* counter = nullptr);

std::int64_t dot(const fxp::QTensor& a, const fxp::QTensor& b, Precision mode,
                 MultiplierKind kind = MultiplierKind::Exact, MacCounter* counter = nullptr);

}  // namespace qforce::qmac
