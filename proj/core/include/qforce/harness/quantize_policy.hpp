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

// Post-training quantization of a float policy into a NetworkSpec.

#include <cstdint>
#include <optional>
#include <vector>

#include "qforce/harness/float_net.hpp"
#include "qforce/harness/gridworld.hpp"
#include "qforce/qnet.hpp"

namespace qforce::harness {

struct CalibrationSample {
  std::vector<double> obs;
  std::optional<FloatNetwork::LstmState> state;  // recurrent state before this step
};

struct CalibrationSet {
  std::vector<CalibrationSample> samples;
  ActivationRanges ranges;
};

// Plays greedy float-policy episodes (episode i seeded with derive_seed(seed, i))
// until at least `min_samples` observations have been forwarded.
CalibrationSet collect_calibration(const FloatNetwork& net, std::size_t min_samples, std::uint64_t seed,
                                   const GridConfig& env = {});

// Weights get fxp::calibrate_operand scales at `bits`, biases 32-bit scales, and
// activation formats come from `ranges`. Bounded outputs (sigmoid, tanh,
// softmax, LSTM h) use unit formats; the LSTM cell keeps at least 16 bits.
qnet::NetworkSpec quantize_policy(const FloatNetwork& net, fxp::Precision precision, const ActivationRanges& ranges,
                                  qmac::MultiplierKind multiplier = qmac::MultiplierKind::Exact);

}  // namespace qforce::harness
