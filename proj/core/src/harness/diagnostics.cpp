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

#include "qforce/harness/diagnostics.hpp"

#include <cmath>
#include <limits>

#include "qforce/error.hpp"
#include "qforce/harness/rng.hpp"
#include "qforce/qmac.hpp"
#include "qforce/vact.hpp"

namespace qforce::harness {
namespace {

using fxp::Precision;
using fxp::QTensor;
using fxp::QuantParams;

std::int64_t random_code(Rng& rng, int bits) {
  const std::uint64_t span = std::uint64_t{1} << bits;
  return static_cast<std::int64_t>(rng.below(span)) + fxp::min_code(bits);
}

std::vector<std::int64_t> corners(int bits) {
  const std::int64_t lo = fxp::min_code(bits);
  const std::int64_t hi = fxp::max_code(bits);
  return {lo, lo + 1, -256, -255, -129, -128, -127, -1, 0, 1, 127, 128, 129, 255, 256, hi - 1, hi};
}

}  // namespace

std::vector<VactDumpRow> vact_dump(std::span<const Precision> precisions, double lo, double hi, double step) {
  QFORCE_REQUIRE(step > 0.0 && hi >= lo, "vact-dump grid needs lo <= hi and a positive step");
  const double m = std::max(std::abs(lo), std::abs(hi));
  const double range[2] = {-m, m};
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<VactDumpRow> rows;
  for (auto p : precisions) {
    const int bits = fxp::bits(p);
    const QuantParams in = fxp::calibrate(range, bits);
    const QuantParams unit = fxp::unit_params(bits);
    const auto cfg = vact::CordicConfig::for_precision(p);
    std::vector<double> xs(n);
    for (std::size_t i = 0; i < n; ++i) xs[i] = lo + static_cast<double>(i) * step;
    const QTensor xq = fxp::quantize(xs, in, {n});
    const QTensor relu = vact::relu_fx(xq);
    const QTensor sig = vact::sigmoid_fx(xq, cfg, unit);
    const QTensor th = vact::tanh_fx(xq, cfg, unit);
    auto emit = [&](const char* fn, std::size_t i, double fixed, double oracle) {
      rows.push_back({fn, bits, xs[i], xq[i], fixed, oracle, std::abs(fixed - oracle)});
    };
    for (std::size_t i = 0; i < n; ++i) {
      const double xd = fxp::dequantize_code(xq[i], in);
      emit("relu", i, fxp::dequantize_code(relu[i], in), std::max(xd, 0.0));
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double xd = fxp::dequantize_code(xq[i], in);
      emit("sigmoid", i, fxp::dequantize_code(sig[i], unit), 1.0 / (1.0 + std::exp(-xd)));
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double xd = fxp::dequantize_code(xq[i], in);
      emit("tanh", i, fxp::dequantize_code(th[i], unit), std::tanh(xd));
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double xd = fxp::dequantize_code(xq[i], in);
      const QTensor pair({xq[i], 0}, in, {2});
      const QTensor sm = vact::softmax_fx(pair, cfg, unit);
      emit("softmax2", i, fxp::dequantize_code(sm[0], unit), 1.0 / (1.0 + std::exp(-xd)));
    }
  }
  return rows;
}

std::vector<MacVerifyResult> mac_verify(Precision p, std::uint64_t seed, std::uint64_t random_cases,
                                        std::uint64_t lane_cases) {
  using qmac::MultiplierKind;
  std::vector<MacVerifyResult> out;
  const int bits = fxp::bits(p);
  Rng rng(seed);

  // Scalar products against native wide multiplication.
  MacVerifyResult scalar{"", bits, 0, 0};
  auto check = [&](std::int64_t a, std::int64_t b) {
    ++scalar.cases;
    if (qmac::lane_product(static_cast<std::int32_t>(a), static_cast<std::int32_t>(b), p, MultiplierKind::Exact) !=
        a * b)
      ++scalar.mismatches;
  };
  if (p == Precision::FxP8) {
    scalar.suite = "mul8_exhaustive";
    for (int a = -128; a < 128; ++a)
      for (int b = -128; b < 128; ++b) check(a, b);
  } else {
    scalar.suite = bits == 16 ? "mul16_composed" : "mul32_composed";
    for (std::uint64_t i = 0; i < random_cases; ++i) check(random_code(rng, bits), random_code(rng, bits));
    for (auto a : corners(bits))
      for (auto b : corners(bits)) check(a, b);
  }
  out.push_back(scalar);

  // Packed MAC sequences against per-lane scalar accumulation.
  const int lanes = fxp::lane_count(p);
  const int width = qmac::accumulator_bits(p);
  MacVerifyResult packed{"simd_lanes", bits, 0, 0};
  std::vector<std::int32_t> la(static_cast<std::size_t>(lanes)), lb(la);
  for (std::uint64_t s = 0; s < lane_cases; ++s) {
    qmac::AccumulatorBank bank(p);
    std::vector<std::int64_t> ref(static_cast<std::size_t>(lanes), 0);
    const int len = 1 + static_cast<int>(rng.below(8));
    for (int k = 0; k < len; ++k) {
      for (int l = 0; l < lanes; ++l) {
        la[static_cast<std::size_t>(l)] = static_cast<std::int32_t>(random_code(rng, bits));
        lb[static_cast<std::size_t>(l)] = static_cast<std::int32_t>(random_code(rng, bits));
        ref[static_cast<std::size_t>(l)] = qmac::saturating_add(
            ref[static_cast<std::size_t>(l)],
            std::int64_t{la[static_cast<std::size_t>(l)]} * lb[static_cast<std::size_t>(l)], width);
      }
      bank = qmac::simd_mac(bank, qmac::SimdWord::pack(la, p), qmac::SimdWord::pack(lb, p));
    }
    ++packed.cases;
    for (int l = 0; l < lanes; ++l)
      if (bank[l] != ref[static_cast<std::size_t>(l)]) {
        ++packed.mismatches;
        break;
      }
  }
  out.push_back(packed);

  // Dot products with ragged tails; operands kept small enough that no lane
  // saturates, so the reference is a plain sum.
  MacVerifyResult dots{"dot_tails", bits, 0, 0};
  const int small = std::min(bits, 12);
  for (std::uint64_t s = 0; s < lane_cases; ++s) {
    const auto len = static_cast<std::size_t>(1 + rng.below(64));
    std::vector<std::int32_t> a(len), b(len);
    std::int64_t ref = 0;
    for (std::size_t i = 0; i < len; ++i) {
      a[i] = static_cast<std::int32_t>(random_code(rng, small));
      b[i] = static_cast<std::int32_t>(random_code(rng, small));
      ref += std::int64_t{a[i]} * b[i];
    }
    ++dots.cases;
    if (qmac::dot(a, b, p) != ref) ++dots.mismatches;
  }
  out.push_back(dots);
  return out;
}

}  // namespace qforce::harness
