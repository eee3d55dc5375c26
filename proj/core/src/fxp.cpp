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

#include "qforce/fxp.hpp"

#include <algorithm>
#include <cmath>

namespace qforce::fxp {

Precision precision_from_bits(int b) {
  switch (b) {
    case 8: return Precision::FxP8;
    case 16: return Precision::FxP16;
    case 32: return Precision::FxP32;
    default: throw ContractViolation("bit width must be 8, 16 or 32, got " + std::to_string(b));
  }
}

std::string to_string(Precision p) { return "fxp" + std::to_string(bits(p)); }

void QuantParams::validate() const {
  (void)precision_from_bits(bits);
  QFORCE_REQUIRE(std::isfinite(scale) && scale > 0.0, "scale must be positive and finite");
}

QuantParams unit_params(int bits) {
  QuantParams p{std::ldexp(1.0, bits - 1), bits};
  p.validate();
  return p;
}

std::size_t element_count(std::span<const std::size_t> shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

QTensor::QTensor(std::vector<std::int32_t> codes, QuantParams params, std::vector<std::size_t> shape)
    : codes_(std::move(codes)), params_(params), shape_(std::move(shape)) {
  params_.validate();
  if (shape_.empty()) shape_ = {codes_.size()};
  QFORCE_REQUIRE(element_count(shape_) == codes_.size(), "QTensor shape does not match code count");
  const auto lo = params_.min_code();
  const auto hi = params_.max_code();
  for (auto c : codes_) {
    QFORCE_REQUIRE(c >= lo && c <= hi, "QTensor code outside the declared bit width");
  }
}

QTensor QTensor::zeros(QuantParams params, std::vector<std::size_t> shape) {
  std::vector<std::int32_t> codes(element_count(shape), 0);
  return QTensor(std::move(codes), params, std::move(shape));
}

QTensor QTensor::reshaped(std::vector<std::size_t> shape) const {
  QFORCE_REQUIRE(element_count(shape) == codes_.size(), "reshape changes element count");
  QTensor t = *this;
  t.shape_ = std::move(shape);
  return t;
}

double round_half_even(double v) {
  const double lo = std::floor(v);
  const double frac = v - lo;
  if (frac > 0.5) return lo + 1.0;
  if (frac < 0.5) return lo;
  return std::fmod(lo, 2.0) == 0.0 ? lo : lo + 1.0;
}

std::int64_t saturate_round(double v, std::int64_t lo, std::int64_t hi) {
  const double r = round_half_even(v);
  if (r >= static_cast<double>(hi)) return hi;
  if (r <= static_cast<double>(lo)) return lo;
  return static_cast<std::int64_t>(r);
}

namespace {

void check_finite(std::span<const double> values) {
  QFORCE_REQUIRE(!values.empty(), "calibration needs at least one value");
  for (double v : values) {
    if (!std::isfinite(v)) throw CalibrationError("non-finite value in calibration tensor");
  }
}

}  // namespace

QuantParams calibrate(std::span<const double> values, int bits) {
  (void)precision_from_bits(bits);
  check_finite(values);
  const double lo = std::min(0.0, *std::min_element(values.begin(), values.end()));
  const double hi = std::max(0.0, *std::max_element(values.begin(), values.end()));
  const double range = std::fabs(lo) + std::fabs(hi);
  QuantParams p{range == 0.0 ? 1.0 : std::ldexp(1.0, bits) / range, bits};
  if (!std::isfinite(p.scale)) throw CalibrationError("calibration range too small for a finite scale");
  return p;
}

QuantParams calibrate_symmetric(std::span<const double> values, int bits) {
  (void)precision_from_bits(bits);
  check_finite(values);
  double m = 0.0;
  for (double v : values) m = std::max(m, std::fabs(v));
  const double range[2] = {-m, m};
  return calibrate(range, bits);
}

QuantParams calibrate_operand(std::span<const double> values, int bits) {
  QuantParams p = calibrate_symmetric(values, bits);
  p.scale = std::ldexp(p.scale, -operand_headroom(bits));
  return p;
}

std::int32_t quantize_value(double v, const QuantParams& p) {
  return static_cast<std::int32_t>(saturate_round(v * p.scale, p.min_code(), p.max_code()));
}

QTensor quantize(std::span<const double> values, const QuantParams& params,
                 std::vector<std::size_t> shape) {
  params.validate();
  std::vector<std::int32_t> codes(values.size());
  std::transform(values.begin(), values.end(), codes.begin(),
                 [&](double v) { return quantize_value(v, params); });
  return QTensor(std::move(codes), params, std::move(shape));
}

std::vector<double> dequantize(const QTensor& t) {
  std::vector<double> out(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = dequantize_code(t[i], t.params());
  return out;
}

std::int32_t requantize(std::int64_t acc, const QuantParams& a, const QuantParams& b,
                        const QuantParams& out) {
  const double v = static_cast<double>(acc) * out.scale / (a.scale * b.scale);
  return static_cast<std::int32_t>(saturate_round(v, out.min_code(), out.max_code()));
}

QTensor requantize_tensor(const QTensor& t, const QuantParams& out) {
  out.validate();
  if (t.params() == out) return t;
  std::vector<std::int32_t> codes(t.size());
  const double ratio = out.scale / t.params().scale;
  for (std::size_t i = 0; i < t.size(); ++i) {
    codes[i] = static_cast<std::int32_t>(
        saturate_round(static_cast<double>(t[i]) * ratio, out.min_code(), out.max_code()));
  }
  return QTensor(std::move(codes), out, t.shape());
}

}  // namespace qforce::fxp
