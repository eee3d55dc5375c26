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

// Desk-scale policy-gradient trainer for the float policy: REINFORCE with
// reward-to-go returns, a batch-mean baseline and Adam updates.

#include <cstdint>
#include <functional>

#include "qforce/harness/float_net.hpp"
#include "qforce/harness/gridworld.hpp"

namespace qforce::harness {

struct TrainConfig {
  double lr = 3e-3;
  double gamma = 0.97;
  int chunk_episodes = 2000;  // episodes between greedy evaluations
  int max_episodes = 20000;   // 10x the nominal budget
  int batch_episodes = 8;
  double entropy_start = 0.02;
  double entropy_end = 0.0;
  double target_reward = 0.8;
  int eval_episodes = 200;
  GridConfig env;
};

struct TrainProgress {
  int episodes = 0;
  double train_mean = 0.0;  // mean return over the last chunk (sampled actions)
  double greedy_mean = 0.0;
};

struct TrainResult {
  FloatNetwork net;
  int episodes = 0;
  double greedy_mean = 0.0;
};

// Throws TrainingFailure if the greedy mean stays below the target after
// max_episodes. Deterministic given (topology, seed, config).
TrainResult train_policy(const qnet::Topology& topology, std::uint64_t seed, const TrainConfig& cfg = {},
                         const std::function<void(const TrainProgress&)>& on_chunk = {});

// Mean return of greedy float-policy episodes seeded derive_seed(seed, i).
double greedy_mean_reward(const FloatNetwork& net, int episodes, std::uint64_t seed, const GridConfig& env = {});

}  // namespace qforce::harness
