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

// Versatile activation unit: ReLU, sigmoid, tanh and softmax computed with a
// shared hyperbolic CORDIC core plus a linear-vectoring divider.
//
// All CORDIC arithmetic runs on 32-bit registers in Q6.25 regardless of the
// I/O precision; only the input decode and output requantization depend on
// the SIMD precision mode.

#include <cstdint>
#include <span>
#include <vector>

#include "qforce/fxp.hpp"

namespace qforce::vact {

using fxp::Precision;
using fxp::QTensor;
using fxp::QuantParams;

enum class ActKind : std::uint8_t { ReLU, Sigmoid, Tanh, Softmax };

enum class CordicMode : std::uint8_t { HyperbolicRotation, LinearVectoring };

// Fraction bits of the working register. Six integer bits cover cosh(4).
inline constexpr int kFracBits = 25;
inline constexpr std::int32_t kOne = std::int32_t{1} << kFracBits;

// Largest |theta| the expanded core converges for after clamping.
inline constexpr double kMaxTheta = 4.0;

struct CordicConfig {
  int iterations = 16;            // scheduled hyperbolic iterations, repeats included
  std::vector<int> schedule;      // shift index of each scheduled iteration
  std::vector<int> pre_shifts;    // expanded pre-iterations, factor (1 - 2^-s)
  double gain = 1.0;              // K_h over pre-iterations and schedule
  CordicMode mode = CordicMode::HyperbolicRotation;

  // Derived at construction: atanh(1 - 2^-s) and atanh(2^-k) in Q6.25.
  std::vector<std::int32_t> pre_angles;
  std::vector<std::int32_t> angles;

  // n scheduled iterations over shifts 1, 2, 3, 4, 4, 5, ..., 13, 13, ...
  // with the two expanded pre-iterations (angles atanh(31/32), atanh(3/4)).
  // Throws ContractViolation for n < 8.
  static CordicConfig make(int n);

  // n = 16 for FxP8/FxP16 outputs, n = 32 for FxP32.
  static CordicConfig for_precision(Precision p);

  double recompute_gain() const;
};

// (x, y, z) register triple in Q6.25.
struct CordicState {
  std::int32_t x = 0;
  std::int32_t y = 0;
  std::int32_t z = 0;
};

// Rotation-mode hyperbolic CORDIC from x0 = 1/K_h, y0 = 0, z0 = theta.
// Returns the final state: x ~ cosh(theta), y ~ sinh(theta).
CordicState hyperbolic_rotate(std::int32_t theta, const CordicConfig& cfg);

// Linear-vectoring CORDIC quotient num/den in Q.25 for 0 <= num <= den,
// den > 0. Result is clamped to [0, 1].
std::int32_t linear_divide(std::int64_t num, std::int64_t den);

struct SinhCosh {
  double sinh = 0.0;
  double cosh = 1.0;
};

// Throws ContractViolation unless |theta| <= 4.
SinhCosh cordic_hyperbolic(double theta, const CordicConfig& cfg);

QTensor relu_fx(const QTensor& x);

// Inputs are clamped to [-4, 4]; the pipeline works on |x| and restores the
// sign, so tanh_fx(-x) == -tanh_fx(x) code for code.
QTensor tanh_fx(const QTensor& x, const CordicConfig& cfg, const QuantParams& out);

// 1/2 + tanh(x/2)/2 with inputs clamped to [-8, 8].
QTensor sigmoid_fx(const QTensor& x, const CordicConfig& cfg, const QuantParams& out);

// e^x for x <= 0 as (cosh(x/2) + sinh(x/2))^2, with a power-of-two range
// reduction below -8. Throws ContractViolation for x > 0 or non-finite x.
double exp_fx(double x, const CordicConfig& cfg);

// Working-register form of exp_fx: result in Q.25.
std::int32_t exp_working(double x, const CordicConfig& cfg);

// Stage trace of one softmax evaluation: exponentials queue up in a FIFO in
// front of the divider.
struct SoftmaxTrace {
  std::uint64_t exp_ops = 0;
  std::uint64_t div_ops = 0;
  std::size_t max_fifo_depth = 0;
};

// Max-subtracted softmax. The dequantized outputs sum to 1 within one code;
// shifting every logit code by a constant leaves the output unchanged.
QTensor softmax_fx(const QTensor& logits, const CordicConfig& cfg, const QuantParams& out,
                   SoftmaxTrace* trace = nullptr);

// Pipeline latency of the core: ceil(3n/8) + 1 cycles.
int latency_cycles(const CordicConfig& cfg);

// Dispatch helper used by the layers.
QTensor activate(ActKind kind, const QTensor& x, const CordicConfig& cfg, const QuantParams& out);

}  // namespace qforce::vact
