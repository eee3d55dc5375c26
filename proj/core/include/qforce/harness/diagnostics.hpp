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

// Self-check suites behind the `vact-dump` and `mac-verify` commands.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qforce/fxp.hpp"

namespace qforce::harness {

struct VactDumpRow {
  std::string function;  // relu, sigmoid, tanh, softmax2
  int bits = 0;
  double x = 0.0;             // grid point
  std::int32_t x_code = 0;    // quantized input
  double fixed = 0.0;         // dequantized fixed-point output
  double oracle = 0.0;        // double-precision f at the dequantized input
  double error = 0.0;         // |fixed - oracle|
};

// Grid lo, lo + step, ..., hi for every function and precision. Inputs use
// the calibrated format of [-max(|lo|,|hi|), max(|lo|,|hi|)]; outputs use the unit
// format (ReLU keeps the input format). softmax2 is softmax([x, 0])[0].
std::vector<VactDumpRow> vact_dump(std::span<const fxp::Precision> precisions, double lo = -4.0, double hi = 4.0,
                                   double step = 1.0 / 256);

struct MacVerifyResult {
  std::string suite;
  int bits = 0;
  std::uint64_t cases = 0;
  std::uint64_t mismatches = 0;
};

// FxP8: exhaustive mul8 over all 65,536 pairs. FxP16/FxP32: `random_cases`
// composed products plus operand corner cross-products. Every mode adds a
// packed-lane suite of `lane_cases` MAC sequences checked lane by lane, and a
// dot-product suite with ragged tails.
std::vector<MacVerifyResult> mac_verify(fxp::Precision p, std::uint64_t seed, std::uint64_t random_cases = 1000000,
                                        std::uint64_t lane_cases = 10000);

}  // namespace qforce::harness
