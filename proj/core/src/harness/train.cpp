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

#include "qforce/harness/train.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qforce/error.hpp"
#include "qforce/harness/rng.hpp"

namespace qforce::harness {
namespace {

struct Step {
  FloatNetwork::Cache cache;
  std::vector<double> probs;
  int action = 0;
  double reward = 0.0;
};

int sample(const std::vector<double>& p, double u) {
  double run = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    run += p[i];
    if (u < run) return static_cast<int>(i);
  }
  return static_cast<int>(p.size()) - 1;
}

class Adam {
 public:
  explicit Adam(const FloatNetwork& shape, double lr) : m_(shape.zeros_like()), v_(shape.zeros_like()), lr_(lr) {}

  void step(FloatNetwork& net, const FloatNetwork& grad) {
    ++t_;
    const double c1 = 1.0 - std::pow(kBeta1, t_);
    const double c2 = 1.0 - std::pow(kBeta2, t_);
    for (const auto& [name, g] : grad.tensors()) {
      auto& p = net.at(name).data;
      auto& m = m_.at(name).data;
      auto& v = v_.at(name).data;
      for (std::size_t i = 0; i < p.size(); ++i) {
        m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * g.data[i];
        v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * g.data[i] * g.data[i];
        p[i] -= lr_ * (m[i] / c1) / (std::sqrt(v[i] / c2) + 1e-8);
      }
    }
  }

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  FloatNetwork m_, v_;
  double lr_;
  int t_ = 0;
};

int argmax(const std::vector<double>& v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

double greedy_mean_reward(const FloatNetwork& net, int episodes, std::uint64_t seed, const GridConfig& env) {
  if (episodes <= 0) return 0.0;
  const bool lstm = net.topology().variant == qnet::SubgoalVariant::LSTM;
  GridWorld world(env);
  double total = 0.0;
  for (int ep = 0; ep < episodes; ++ep) {
    world.reset(derive_seed(seed, static_cast<std::uint64_t>(ep)));
    std::optional<FloatNetwork::LstmState> state;
    if (lstm) state = net.initial_state();
    double ret = 0.0;
    while (!world.done()) {
      auto out = net.forward(world.observe(), state);
      state = out.state;
      ret += world.step(argmax(out.probs)).reward;
    }
    total += ret;
  }
  return total / episodes;
}

TrainResult train_policy(const qnet::Topology& topology, std::uint64_t seed, const TrainConfig& cfg,
                         const std::function<void(const TrainProgress&)>& on_chunk) {
  QFORCE_REQUIRE(cfg.batch_episodes > 0 && cfg.chunk_episodes > 0 && cfg.max_episodes > 0,
                 "training budgets must be positive");
  QFORCE_REQUIRE(cfg.chunk_episodes % cfg.batch_episodes == 0, "chunk size must be a multiple of the batch size");
  const bool lstm = topology.variant == qnet::SubgoalVariant::LSTM;
  FloatNetwork net = FloatNetwork::random(topology, derive_seed(seed, 0));
  Adam opt(net, cfg.lr);
  GridWorld world(cfg.env);
  const std::uint64_t env_seed = derive_seed(seed, 1);
  const std::uint64_t act_seed = derive_seed(seed, 2);
  const std::uint64_t eval_seed = derive_seed(seed, 3);

  std::vector<std::vector<Step>> batch;
  double chunk_return = 0.0;
  int chunk_count = 0;
  double greedy = 0.0;
  for (int ep = 0; ep < cfg.max_episodes;) {
    const double frac = static_cast<double>(ep) / cfg.max_episodes;
    const double beta = cfg.entropy_start + (cfg.entropy_end - cfg.entropy_start) * std::min(1.0, 5.0 * frac);
    batch.clear();
    for (int b = 0; b < cfg.batch_episodes && ep < cfg.max_episodes; ++b, ++ep) {
      world.reset(derive_seed(env_seed, static_cast<std::uint64_t>(ep)));
      Rng rng(derive_seed(act_seed, static_cast<std::uint64_t>(ep)));
      std::optional<FloatNetwork::LstmState> state;
      if (lstm) state = net.initial_state();
      std::vector<Step> traj;
      double ret = 0.0;
      while (!world.done()) {
        Step s;
        auto out = net.forward(world.observe(), state, nullptr, &s.cache);
        state = out.state;
        s.action = sample(out.probs, rng.uniform());
        s.probs = std::move(out.probs);
        s.reward = world.step(s.action).reward;
        ret += s.reward;
        traj.push_back(std::move(s));
      }
      chunk_return += ret;
      ++chunk_count;
      batch.push_back(std::move(traj));
    }

    // Reward-to-go, normalized over the batch.
    std::vector<std::vector<double>> adv(batch.size());
    double sum = 0.0, sq = 0.0;
    std::size_t n = 0;
    for (std::size_t b = 0; b < batch.size(); ++b) {
      adv[b].resize(batch[b].size());
      double g = 0.0;
      for (std::size_t t = batch[b].size(); t-- > 0;) {
        g = batch[b][t].reward + cfg.gamma * g;
        adv[b][t] = g;
        sum += g;
        sq += g * g;
        ++n;
      }
    }
    const double mean = sum / static_cast<double>(n);
    const double sd = std::sqrt(std::max(sq / static_cast<double>(n) - mean * mean, 0.0)) + 1e-8;

    FloatNetwork grad = net.zeros_like();
    std::vector<double> dlogits;
    for (std::size_t b = 0; b < batch.size(); ++b) {
      for (std::size_t t = 0; t < batch[b].size(); ++t) {
        const Step& s = batch[b][t];
        const double a = (adv[b][t] - mean) / sd;
        double entropy = 0.0;
        for (double p : s.probs) entropy -= p > 0.0 ? p * std::log(p) : 0.0;
        dlogits.assign(s.probs.size(), 0.0);
        for (std::size_t i = 0; i < s.probs.size(); ++i) {
          const double p = s.probs[i];
          const double pg = (p - (static_cast<int>(i) == s.action ? 1.0 : 0.0)) * a;
          const double ent = p > 0.0 ? p * (std::log(p) + entropy) : 0.0;
          dlogits[i] = (pg + beta * ent) / static_cast<double>(n);
        }
        net.backward(s.cache, dlogits, grad);
      }
    }
    opt.step(net, grad);

    if (ep % cfg.chunk_episodes == 0 || ep == cfg.max_episodes) {
      greedy = greedy_mean_reward(net, cfg.eval_episodes, eval_seed, cfg.env);
      if (on_chunk) on_chunk({ep, chunk_return / std::max(chunk_count, 1), greedy});
      chunk_return = 0.0;
      chunk_count = 0;
      if (greedy >= cfg.target_reward) return {std::move(net), ep, greedy};
    }
  }
  std::ostringstream msg;
  msg << "policy reached greedy mean reward " << greedy << " after " << cfg.max_episodes
      << " episodes, below the target " << cfg.target_reward;
  throw TrainingFailure(msg.str());
}

}  // namespace qforce::harness
