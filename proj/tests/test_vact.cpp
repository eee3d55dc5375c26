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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracle.hpp"
#include "qforce/error.hpp"
#include "qforce/vact.hpp"

namespace {

using namespace qforce;
using namespace qforce::vact;
using fxp::Precision;
using fxp::QTensor;
using fxp::QuantParams;

QuantParams input_format(int bits, double range = 4.0) {
  return {std::ldexp(1.0, bits - 1) / range, bits};
}

// Max |f_fixed - f| over the grid, f evaluated at the dequantized input.
template <class Fixed, class Ref>
double grid_error(Precision p, Fixed fixed, Ref ref) {
  const int b = fxp::bits(p);
  const QuantParams in = input_format(b);
  std::vector<double> xs;
  for (int i = -1024; i <= 1024; ++i) xs.push_back(i / 256.0);
  const QTensor xq = fxp::quantize(xs, in, {xs.size()});
  const QuantParams out = fxp::unit_params(b);
  const QTensor y = fixed(xq, CordicConfig::for_precision(p), out);
  double worst = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i)
    worst = std::max(worst, std::abs(y[i] / out.scale - ref(xq[i] / in.scale)));
  return worst;
}

struct Bound {
  Precision p;
  double tol;
};

class Accuracy : public ::testing::TestWithParam<Bound> {};

TEST_P(Accuracy, TanhOnGrid) {
  const auto [p, tol] = GetParam();
  EXPECT_LE(grid_error(p, tanh_fx, [](double x) { return std::tanh(x); }), tol);
}

TEST_P(Accuracy, SigmoidOnGrid) {
  const auto [p, tol] = GetParam();
  EXPECT_LE(grid_error(p, sigmoid_fx, oracle::sigmoid), tol);
}

INSTANTIATE_TEST_SUITE_P(Outputs, Accuracy,
                         ::testing::Values(Bound{Precision::FxP8, 0x1p-6}, Bound{Precision::FxP16, 0x1p-10},
                                           Bound{Precision::FxP32, 0x1p-14}),
                         [](const auto& info) { return fxp::to_string(info.param.p); });

class Symmetry : public ::testing::TestWithParam<Precision> {};

TEST_P(Symmetry, TanhOddAndSigmoidComplement) {
  const Precision p = GetParam();
  const int b = fxp::bits(p);
  const QuantParams in = input_format(b);
  const QuantParams out = fxp::unit_params(b);
  const auto cfg = CordicConfig::for_precision(p);
  // Grid codes for x in [0, 4] and their negations (the top code saturates,
  // so its negation is still representable).
  std::vector<double> xs;
  for (int i = 0; i <= 1024; ++i) xs.push_back(i / 256.0);
  const QTensor xq = fxp::quantize(xs, in, {xs.size()});
  std::vector<std::int32_t> neg_codes;
  for (auto c : xq.codes()) neg_codes.push_back(-c);
  const QTensor nq(neg_codes, in, {neg_codes.size()});
  const QTensor t = tanh_fx(xq, cfg, out), tn = tanh_fx(nq, cfg, out);
  const QTensor s = sigmoid_fx(xq, cfg, out), sn = sigmoid_fx(nq, cfg, out);
  const auto one = static_cast<std::int64_t>(out.scale);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    ASSERT_LE(std::abs(std::int64_t{t[i]} + tn[i]), 1) << xs[i];
    ASSERT_LE(std::abs(std::int64_t{s[i]} + sn[i] - one), 1) << xs[i];
  }
}

TEST_P(Symmetry, Monotone) {
  const Precision p = GetParam();
  const int b = fxp::bits(p);
  const QuantParams in = input_format(b);
  const QuantParams out = fxp::unit_params(b);
  std::vector<std::int32_t> codes;
  // Every code for 8 and 16 bits; a stride-4093 sweep for 32 bits.
  const std::int64_t stride = b == 32 ? 4093 : 1;
  for (std::int64_t c = fxp::min_code(b); c <= fxp::max_code(b); c += stride)
    codes.push_back(static_cast<std::int32_t>(c));
  const QTensor x(codes, in, {codes.size()});
  const auto cfg = CordicConfig::for_precision(p);
  const QTensor t = tanh_fx(x, cfg, out), s = sigmoid_fx(x, cfg, out);
  for (std::size_t i = 1; i < codes.size(); ++i) {
    ASSERT_LE(t[i - 1], t[i]) << codes[i];
    ASSERT_LE(s[i - 1], s[i]) << codes[i];
  }
}

INSTANTIATE_TEST_SUITE_P(Modes, Symmetry, ::testing::Values(Precision::FxP8, Precision::FxP16, Precision::FxP32),
                         [](const auto& info) { return fxp::to_string(info.param); });

TEST(Cordic, LatencyFormula) {
  EXPECT_EQ(latency_cycles(CordicConfig::make(8)), 4);
  EXPECT_EQ(latency_cycles(CordicConfig::make(16)), 7);
  EXPECT_EQ(latency_cycles(CordicConfig::make(32)), 13);
  for (int n = 8; n <= 40; ++n)
    EXPECT_EQ(latency_cycles(CordicConfig::make(n)), static_cast<int>(std::ceil(3.0 * n / 8.0)) + 1);
  EXPECT_THROW(CordicConfig::make(7), ContractViolation);
}

TEST(Cordic, ScheduleRepeatsFourAndThirteen) {
  const auto cfg = CordicConfig::make(20);
  const std::vector<int> expect{1, 2, 3, 4, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 13, 14, 15, 16, 17, 18};
  EXPECT_EQ(cfg.schedule, expect);
  EXPECT_EQ(static_cast<int>(cfg.schedule.size()), cfg.iterations);
}

TEST(Cordic, GainMatchesIndependentProduct) {
  for (int n : {8, 16, 32}) {
    const auto cfg = CordicConfig::make(n);
    double k = std::sqrt(1.0 - std::pow(31.0 / 32, 2)) * std::sqrt(1.0 - std::pow(3.0 / 4, 2));
    for (int s : cfg.schedule) k *= std::sqrt(1.0 - std::pow(2.0, -2.0 * s));
    EXPECT_NEAR(cfg.gain, k, 1e-15);
    EXPECT_NEAR(cfg.recompute_gain(), k, 1e-15);
  }
}

TEST(Cordic, SinhCoshAcrossRange) {
  const auto cfg = CordicConfig::make(32);
  for (double t = -4.0; t <= 4.0; t += 1.0 / 64) {
    const auto r = cordic_hyperbolic(t, cfg);
    EXPECT_NEAR(r.cosh, std::cosh(t), 1e-5 * std::cosh(t)) << t;
    EXPECT_NEAR(r.sinh, std::sinh(t), 1e-5 * std::cosh(t)) << t;
  }
  EXPECT_THROW(cordic_hyperbolic(4.01, cfg), ContractViolation);
}

TEST(Cordic, HalvingIterationsAtLeastDoublesError) {
  auto err = [](int n) {
    const auto cfg = CordicConfig::make(n);
    double worst = 0.0;
    for (double t = -4.0; t <= 4.0; t += 1.0 / 128) {
      const auto r = cordic_hyperbolic(t, cfg);
      worst = std::max(worst, std::abs(r.sinh / r.cosh - std::tanh(t)));
    }
    return worst;
  };
  const double e8 = err(8), e16 = err(16), e32 = err(32);
  EXPECT_GE(e8, 2.0 * e16);
  EXPECT_GE(e16, 2.0 * e32);
}

TEST(LinearDivide, MatchesQuotient) {
  std::mt19937_64 gen(4);
  std::uniform_int_distribution<std::int64_t> d(1, std::int64_t{1} << 36);
  for (int i = 0; i < 20000; ++i) {
    std::int64_t a = d(gen), b = d(gen);
    if (a > b) std::swap(a, b);
    const double q = std::ldexp(static_cast<double>(linear_divide(a, b)), -kFracBits);
    ASSERT_NEAR(q, static_cast<double>(a) / static_cast<double>(b), 0x1p-24);
  }
  EXPECT_EQ(linear_divide(0, 5), 0);
  EXPECT_NEAR(linear_divide(1, 3), kOne / 3.0, 1.0);
  EXPECT_NEAR(linear_divide(2, 7), 2.0 * kOne / 7.0, 1.0);
  EXPECT_EQ(linear_divide(5, 5), kOne);
  EXPECT_THROW(linear_divide(1, 0), ContractViolation);
}

TEST(Exp, AccuracyAndDomain) {
  const auto cfg = CordicConfig::make(16);
  for (double x = -40.0; x <= 0.0; x += 1.0 / 32) EXPECT_NEAR(exp_fx(x, cfg), std::exp(x), 0x1p-12) << x;
  // Past -8 the result keeps its relative accuracy until it underflows.
  for (double x = -12.0; x <= -8.0; x += 1.0 / 16) EXPECT_NEAR(exp_fx(x, cfg) / std::exp(x), 1.0, 0.01) << x;
  EXPECT_EQ(exp_fx(-100.0, cfg), 0.0);
  EXPECT_NEAR(exp_fx(0.0, cfg), 1.0, 0x1p-12);
  EXPECT_THROW(exp_fx(0.5, cfg), ContractViolation);
  EXPECT_THROW(exp_fx(std::nan(""), cfg), ContractViolation);
}

TEST(Relu, ClampsNegatives) {
  const QTensor x({-5, 0, 7, -128, 127}, {10.0, 8}, {5});
  EXPECT_EQ(relu_fx(x).codes(), (std::vector<std::int32_t>{0, 0, 7, 0, 127}));
  EXPECT_EQ(relu_fx(x).params(), x.params());
}

TEST(Tanh, SaturatesBeyondFour) {
  const QTensor x({-32768, 32767}, {1000.0, 16}, {2});
  const auto y = tanh_fx(x, CordicConfig::make(16), fxp::unit_params(16));
  EXPECT_GE(y[1], 32767 - 24);  // tanh(4) = 0.99933
  EXPECT_EQ(y[0], -y[1]);
}

TEST(Activate, Dispatch) {
  const auto cfg = CordicConfig::make(16);
  const QTensor x({-100, 0, 100}, {64.0, 16}, {3});
  const auto u = fxp::unit_params(16);
  EXPECT_EQ(activate(ActKind::Tanh, x, cfg, u), tanh_fx(x, cfg, u));
  EXPECT_EQ(activate(ActKind::Sigmoid, x, cfg, u), sigmoid_fx(x, cfg, u));
  EXPECT_EQ(activate(ActKind::Softmax, x, cfg, u), softmax_fx(x, cfg, u));
  EXPECT_EQ(activate(ActKind::ReLU, x, cfg, x.params()).codes(), (std::vector<std::int32_t>{0, 0, 100}));
}

TEST(Softmax, SumShiftAndArgmax) {
  std::mt19937_64 gen(2024);
  std::uniform_int_distribution<int> len(2, 16);
  const QuantParams in{512.0, 16};
  const QuantParams out = fxp::unit_params(16);
  const auto cfg = CordicConfig::for_precision(Precision::FxP16);
  int eligible = 0, agree = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const int n = len(gen);
    std::uniform_int_distribution<int> code(-4000, 4000);
    std::vector<std::int32_t> c(static_cast<std::size_t>(n));
    for (auto& v : c) v = code(gen);
    const QTensor z(c, in, {c.size()});
    const QTensor p = softmax_fx(z, cfg, out);
    double sum = 0.0;
    for (auto v : p.codes()) {
      ASSERT_GE(v, 0);
      sum += v / out.scale;
    }
    ASSERT_LE(std::abs(sum - 1.0), 1.0 / out.scale);

    const int shift = std::uniform_int_distribution<int>(-20000, 20000)(gen);
    std::vector<std::int32_t> cs(c);
    for (auto& v : cs) v += shift;
    ASSERT_EQ(softmax_fx(QTensor(cs, in, {cs.size()}), cfg, out).codes(), p.codes());

    std::vector<std::int32_t> sorted(c);
    std::sort(sorted.rbegin(), sorted.rend());
    if (sorted[0] - sorted[1] >= 2) {
      ++eligible;
      std::vector<double> zf;
      for (auto v : c) zf.push_back(v / in.scale);
      const auto ref = oracle::softmax(zf);
      const auto want = std::max_element(ref.begin(), ref.end()) - ref.begin();
      const auto got = std::max_element(p.codes().begin(), p.codes().end()) - p.codes().begin();
      agree += want == got;
    }
  }
  ASSERT_GT(eligible, 1000);
  EXPECT_GE(static_cast<double>(agree) / eligible, 0.99);
}

TEST(Softmax, EqualLogitsAreUniformAndTraceCountsStages) {
  const auto cfg = CordicConfig::make(16);
  const QTensor z({300, 300, 300, 300}, {64.0, 16}, {4});
  SoftmaxTrace tr;
  const auto p = softmax_fx(z, cfg, fxp::unit_params(16), &tr);
  EXPECT_EQ(p.codes(), (std::vector<std::int32_t>{8192, 8192, 8192, 8192}));
  EXPECT_EQ(tr.exp_ops, 4u);
  EXPECT_EQ(tr.div_ops, 4u);
  EXPECT_EQ(tr.max_fifo_depth, 4u);
}

TEST(Softmax, SingleDominantLogit) {
  const auto cfg = CordicConfig::make(16);
  const QTensor z({0, 32000, 0}, {64.0, 16}, {3});
  const auto p = softmax_fx(z, cfg, fxp::unit_params(16));
  EXPECT_EQ(p[0], 0);
  EXPECT_EQ(p[2], 0);
  EXPECT_EQ(p[1], 32767);
}

}  // namespace
