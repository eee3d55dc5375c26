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

#include <benchmark/benchmark.h>

#include "qforce/harness/float_net.hpp"
#include "qforce/harness/gridworld.hpp"
#include "qforce/harness/quantize_policy.hpp"

namespace {

using qforce::fxp::Precision;
using qforce::qnet::SubgoalVariant;

void BM_HrlForward(benchmark::State& state) {
  const auto p = static_cast<Precision>(state.range(0));
  const auto variant = static_cast<SubgoalVariant>(state.range(1));
  const auto net = qforce::harness::FloatNetwork::random(qforce::qnet::Topology::defaults(variant), 5, 0.05);
  const auto calib = qforce::harness::collect_calibration(net, 256, 6);
  const auto spec = qforce::harness::quantize_policy(net, p, calib.ranges);
  qforce::harness::GridWorld world;
  world.reset(7);
  const auto obs = qforce::qnet::quantize_observation(world.observe(), spec);
  std::optional<qforce::qnet::LstmState> s;
  if (spec.subgoal_lstm) s = qforce::qnet::LstmState::zeros(*spec.subgoal_lstm);
  for (auto _ : state) benchmark::DoNotOptimize(qforce::qnet::hrl_forward(obs, spec, s));
  state.SetLabel(qforce::fxp::to_string(p) + "/" + qforce::qnet::to_string(variant));
}
BENCHMARK(BM_HrlForward)->ArgsProduct({{0, 1, 2}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_FloatForward(benchmark::State& state) {
  const auto net = qforce::harness::FloatNetwork::random(qforce::qnet::Topology::defaults(SubgoalVariant::FC), 5);
  qforce::harness::GridWorld world;
  world.reset(7);
  const auto obs = world.observe();
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(obs));
}
BENCHMARK(BM_FloatForward)->Unit(benchmark::kMicrosecond);

}  // namespace
