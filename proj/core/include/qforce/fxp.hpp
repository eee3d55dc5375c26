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

// Adaptive fixed-point number system.
//
// A tensor is coded as signed integers at 8, 16 or 32 bits with one
// per-tensor scale (codes per unit). Calibration derives the scale from the
// tensor's dynamic range:
//
//     scale = 2^bits / (|min(W, 0)| + |max(W, 0)|)
//
// Rounding is half-to-even everywhere and overflow saturates to the signed
// range [-(2^(bits-1)), 2^(bits-1) - 1]. There is no zero point.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qforce/error.hpp"

namespace qforce::fxp {

enum class Precision : std::uint8_t { FxP8, FxP16, FxP32 };

constexpr int bits(Precision p) {
  switch (p) {
    case Precision::FxP8: return 8;
    case Precision::FxP16: return 16;
    case Precision::FxP32: return 32;
  }
  return 0;
}

// SIMD lanes per 128-bit operand word: 16 / 4 / 1.
constexpr int lane_count(Precision p) {
  switch (p) {
    case Precision::FxP8: return 16;
    case Precision::FxP16: return 4;
    case Precision::FxP32: return 1;
  }
  return 0;
}

Precision precision_from_bits(int bits);
std::string to_string(Precision p);

constexpr std::int64_t min_code(int bits) { return -(std::int64_t{1} << (bits - 1)); }
constexpr std::int64_t max_code(int bits) { return (std::int64_t{1} << (bits - 1)) - 1; }

struct QuantParams {
  double scale = 1.0;  // codes per unit
  int bits = 8;

  std::int64_t min_code() const { return fxp::min_code(bits); }
  std::int64_t max_code() const { return fxp::max_code(bits); }
  Precision precision() const { return precision_from_bits(bits); }

  // Throws ContractViolation unless scale is positive and finite and bits is
  // one of 8/16/32.
  void validate() const;

  friend bool operator==(const QuantParams&, const QuantParams&) = default;
};

// Params whose scale is 2^(bits-1), the calibration of the range
// [-1, 1]. Used for bounded activations (sigmoid, tanh, softmax, LSTM h).
QuantParams unit_params(int bits);

class QTensor {
 public:
  QTensor() = default;
  // Throws ContractViolation if the shape does not match the code count or a
  // code is outside the declared signed range.
  QTensor(std::vector<std::int32_t> codes, QuantParams params, std::vector<std::size_t> shape);

  static QTensor zeros(QuantParams params, std::vector<std::size_t> shape);

  const std::vector<std::int32_t>& codes() const { return codes_; }
  std::span<const std::int32_t> view() const { return codes_; }
  const QuantParams& params() const { return params_; }
  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t size() const { return codes_.size(); }
  std::int32_t operator[](std::size_t i) const { return codes_[i]; }

  // Same codes, new shape with identical element count.
  QTensor reshaped(std::vector<std::size_t> shape) const;

  friend bool operator==(const QTensor&, const QTensor&) = default;

 private:
  std::vector<std::int32_t> codes_;
  QuantParams params_;
  std::vector<std::size_t> shape_;
};

std::size_t element_count(std::span<const std::size_t> shape);

// Half-to-even rounding of a finite double.
double round_half_even(double v);

// Rounds v half-to-even and clamps it into [lo, hi].
std::int64_t saturate_round(double v, std::int64_t lo, std::int64_t hi);

// Scale 2^(bits-1) / r for the literal range r = |min(values,0)| + |max(values,0)|.
// An all-zero tensor calibrates to scale 1. Throws CalibrationError on
// non-finite input and ContractViolation on empty input or bad bits.
QuantParams calibrate(std::span<const double> values, int bits);

// calibrate on the symmetrised range [-m, m], m = max|v|, i.e.
// scale = 2^(bits-1) / m. This is what the inference pipeline uses, so that
// one-sided tensors (ReLU outputs, positive biases) keep their full range.
QuantParams calibrate_symmetric(std::span<const double> values, int bits);

// Format for a Q-MAC operand: calibrate_symmetric with the range mapped
// operand_headroom(bits) bits below the top code. At 16 bits products stay
// under 2^26 (32 per lane before the 32-bit accumulator saturates); at 32
// bits under 2^46 (2^17 per lane in 64 bits).
constexpr int operand_headroom(int bits) { return bits == 32 ? 8 : bits == 16 ? 2 : 0; }
QuantParams calibrate_operand(std::span<const double> values, int bits);

QTensor quantize(std::span<const double> values, const QuantParams& params,
                 std::vector<std::size_t> shape = {});

std::int32_t quantize_value(double v, const QuantParams& params);

std::vector<double> dequantize(const QTensor& t);

inline double dequantize_code(std::int64_t code, const QuantParams& p) {
  return static_cast<double>(code) / p.scale;
}

// Maps a product-space accumulator (scale a.scale * b.scale) to an output
// code: saturate(round_half_even(acc * out.scale / (a.scale * b.scale))).
std::int32_t requantize(std::int64_t acc, const QuantParams& a, const QuantParams& b,
                        const QuantParams& out);

// Rescales every code of t into `out` with one rounding step.
QTensor requantize_tensor(const QTensor& t, const QuantParams& out);

}  // namespace qforce::fxp
