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

// Greedy evaluation episodes for float and quantized policies, and the
// reward-retention study built on them.

#include <cstdint>
#include <string>
#include <vector>

#include "qforce/harness/float_net.hpp"
#include "qforce/harness/gridworld.hpp"
#include "qforce/qnet.hpp"

namespace qforce::harness {

struct RolloutRow {
  std::string policy;  // "float", "q8", "q16", "q32"
  int bits = 0;        // 0 for float
  int episodes = 0;
  // NaN when episodes == 0 (and retention when the baseline is unavailable).
  double mean_reward = 0.0;
  double std_reward = 0.0;
  double retention = 0.0;
  std::uint64_t inferences = 0;
  double ns_per_inference = 0.0;  // wall clock; informational only
};

struct RolloutReport {
  std::uint64_t seed = 0;
  std::string variant;
  std::vector<RolloutRow> rows;
  // ns_per_inference(q32) / ns_per_inference(q8); NaN if either row is missing.
  double q8_speedup_vs_q32 = 0.0;

  const RolloutRow* find(const std::string& policy) const;
};

// Worker count: QFRL_THREADS if set to a positive integer, else hardware
// concurrency. Results never depend on it.
int worker_count();

// Episode i starts from derive_seed(seed, i); rewards are reduced in episode
// order.
RolloutRow rollout_float(const FloatNetwork& net, int episodes, std::uint64_t seed, const GridConfig& env = {});
RolloutRow rollout_quantized(const qnet::NetworkSpec& net, int episodes, std::uint64_t seed,
                             const GridConfig& env = {});

// Float baseline plus one quantized row per precision. Calibration uses
// `calib_samples` observations from episodes seeded independently of the
// evaluation episodes.
RolloutReport retention_study(const FloatNetwork& net, const std::vector<fxp::Precision>& precisions, int episodes,
                              std::uint64_t seed, std::size_t calib_samples = 256, const GridConfig& env = {});

}  // namespace qforce::harness
