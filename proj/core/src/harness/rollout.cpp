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

#include "qforce/harness/rollout.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <thread>

#include "qforce/harness/quantize_policy.hpp"
#include "qforce/harness/rng.hpp"

namespace qforce::harness {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct EpisodeResult {
  double reward = 0.0;
  std::uint64_t steps = 0;
};

template <class Play>
RolloutRow run(std::string policy, int bits, int episodes, std::uint64_t seed, Play play) {
  RolloutRow row{std::move(policy), bits, std::max(episodes, 0), kNaN, kNaN, kNaN, 0, kNaN};
  if (episodes <= 0) return row;

  std::vector<EpisodeResult> results(static_cast<std::size_t>(episodes));
  std::atomic<int> next{0};
  std::atomic<std::int64_t> busy_ns{0};
  auto worker = [&] {
    const auto t0 = std::chrono::steady_clock::now();
    for (int i; (i = next.fetch_add(1)) < episodes;)
      results[static_cast<std::size_t>(i)] = play(derive_seed(seed, static_cast<std::uint64_t>(i)));
    busy_ns += std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - t0).count();
  };
  const int n = std::min(worker_count(), episodes);
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  double sum = 0.0;
  for (const auto& r : results) {
    sum += r.reward;
    row.inferences += r.steps;
  }
  row.mean_reward = sum / episodes;
  double sq = 0.0;
  for (const auto& r : results) sq += (r.reward - row.mean_reward) * (r.reward - row.mean_reward);
  row.std_reward = std::sqrt(sq / episodes);
  row.ns_per_inference = static_cast<double>(busy_ns.load()) / static_cast<double>(std::max<std::uint64_t>(row.inferences, 1));
  return row;
}

int argmax(const std::vector<double>& v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

const RolloutRow* RolloutReport::find(const std::string& policy) const {
  for (const auto& r : rows)
    if (r.policy == policy) return &r;
  return nullptr;
}

int worker_count() {
  if (const char* s = std::getenv("QFRL_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(s, &end, 10);
    if (end != s && *end == '\0' && v > 0) return static_cast<int>(std::min(v, 256L));
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

RolloutRow rollout_float(const FloatNetwork& net, int episodes, std::uint64_t seed, const GridConfig& env) {
  const bool lstm = net.topology().variant == qnet::SubgoalVariant::LSTM;
  return run("float", 0, episodes, seed, [&](std::uint64_t s) {
    GridWorld world(env);
    world.reset(s);
    std::optional<FloatNetwork::LstmState> state;
    if (lstm) state = net.initial_state();
    EpisodeResult r;
    while (!world.done()) {
      auto out = net.forward(world.observe(), state);
      state = std::move(out.state);
      r.reward += world.step(argmax(out.probs)).reward;
      ++r.steps;
    }
    return r;
  });
}

RolloutRow rollout_quantized(const qnet::NetworkSpec& net, int episodes, std::uint64_t seed, const GridConfig& env) {
  net.validate();
  const int bits = fxp::bits(net.topology.action_precision);
  const bool lstm = net.topology.variant == qnet::SubgoalVariant::LSTM;
  return run("q" + std::to_string(bits), bits, episodes, seed, [&](std::uint64_t s) {
    GridWorld world(env);
    world.reset(s);
    std::optional<qnet::LstmState> state;
    if (lstm) state = qnet::LstmState::zeros(*net.subgoal_lstm);
    EpisodeResult r;
    while (!world.done()) {
      const auto obs = world.observe();
      auto out = qnet::hrl_forward(qnet::quantize_observation(obs, net), net, state);
      state = std::move(out.state);
      r.reward += world.step(qnet::select_action(out.action_probs)).reward;
      ++r.steps;
    }
    return r;
  });
}

RolloutReport retention_study(const FloatNetwork& net, const std::vector<fxp::Precision>& precisions, int episodes,
                              std::uint64_t seed, std::size_t calib_samples, const GridConfig& env) {
  RolloutReport report;
  report.seed = seed;
  report.variant = qnet::to_string(net.topology().variant);
  const std::uint64_t eval_seed = derive_seed(seed, 0);
  report.rows.push_back(rollout_float(net, episodes, eval_seed, env));
  const double base = report.rows.front().mean_reward;
  report.rows.front().retention = episodes > 0 ? 1.0 : kNaN;

  const CalibrationSet calib = collect_calibration(net, calib_samples, derive_seed(seed, 1), env);
  for (auto p : precisions) {
    const auto spec = quantize_policy(net, p, calib.ranges);
    RolloutRow row = rollout_quantized(spec, episodes, eval_seed, env);
    row.retention = episodes > 0 && base > 0.0 ? row.mean_reward / base : kNaN;
    report.rows.push_back(std::move(row));
  }
  const auto* q8 = report.find("q8");
  const auto* q32 = report.find("q32");
  report.q8_speedup_vs_q32 = q8 && q32 ? q32->ns_per_inference / q8->ns_per_inference : kNaN;
  return report;
}

}  // namespace qforce::harness
