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

// Double-precision reference of the policy graph. It is the float oracle for
// the quantized network, the source of calibration ranges, and the model
// trained by the policy-gradient oracle (forward + hand-written backward).

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qforce/qnet.hpp"

namespace qforce::harness {

struct FloatTensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  std::size_t size() const { return data.size(); }
  friend bool operator==(const FloatTensor&, const FloatTensor&) = default;
};

// Largest magnitude seen at each activation site.
struct ActivationRanges {
  double input = 0.0;
  std::array<double, 3> conv{};
  double embed = 0.0;
  double subgoal = 0.0;
  std::array<double, 4> gate{};  // LSTM pre-activations, by qnet::Gate
  double cell = 0.0;
  double concat = 0.0;
  double logits = 0.0;
  std::uint64_t samples = 0;
};

class FloatNetwork {
 public:
  struct LstmState {
    std::vector<double> h;
    std::vector<double> c;
  };

  struct LstmStepCache {
    std::vector<double> h_prev, c_prev, i, f, o, g, c, tanh_c, h;
  };

  struct Cache {
    std::vector<double> input;
    std::array<std::vector<double>, 3> conv;  // post-ReLU outputs
    std::vector<double> embed;
    std::vector<double> subgoal;
    std::vector<LstmStepCache> steps;
    std::vector<double> concat;
  };

  struct Output {
    std::vector<double> logits;
    std::vector<double> probs;
    std::vector<double> embedding;
    std::vector<double> subgoal;
    std::optional<LstmState> state;
  };

  explicit FloatNetwork(qnet::Topology topology);

  // He-normal weights, forget-gate bias 1, other biases N(0, bias_std^2).
  static FloatNetwork random(const qnet::Topology& topology, std::uint64_t seed, double bias_std = 0.0);

  const qnet::Topology& topology() const { return topology_; }
  const std::map<std::string, FloatTensor>& tensors() const { return tensors_; }
  FloatTensor& at(const std::string& name);
  const FloatTensor& at(const std::string& name) const;

  LstmState initial_state() const;

  Output forward(std::span<const double> obs, const std::optional<LstmState>& state = std::nullopt,
                 ActivationRanges* ranges = nullptr, Cache* cache = nullptr) const;

  // Accumulates d(loss)/d(params) into `grads` given d(loss)/d(logits). The
  // incoming recurrent state is treated as a constant.
  void backward(const Cache& cache, std::span<const double> dlogits, FloatNetwork& grads) const;

  FloatNetwork zeros_like() const;

  friend bool operator==(const FloatNetwork&, const FloatNetwork&) = default;

 private:
  qnet::Topology topology_;
  std::map<std::string, FloatTensor> tensors_;
};

// JSON document {"format": "qforce-float", "version": 1, "topology": <net
// text>, "tensors": {name: {"shape": [...], "data": [...]}}}. Doubles
// round-trip exactly.
std::string to_json(const FloatNetwork& net);
FloatNetwork float_network_from_json(const std::string& text);
void save_float_weights(const std::filesystem::path& path, const FloatNetwork& net);
FloatNetwork load_float_weights(const std::filesystem::path& path);

inline const char* gate_suffix(int g) {
  static constexpr const char* kNames[] = {"i", "f", "o", "g"};
  return kNames[g];
}

}  // namespace qforce::harness
