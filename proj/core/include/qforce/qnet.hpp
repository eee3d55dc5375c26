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

// Quantized hierarchical policy network: three stride-2 convolutions, a
// 32-wide embedding, a sub-goal module (FC or K-step LSTM) and an action
// head over [embedding || sub-goal] followed by softmax. Every dot product
// runs through qmac::dot and every non-linearity through vact.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qforce/fxp.hpp"
#include "qforce/qmac.hpp"
#include "qforce/vact.hpp"

namespace qforce::qnet {

using fxp::Precision;
using fxp::QTensor;
using fxp::QuantParams;
using qmac::MultiplierKind;
using vact::ActKind;

enum class SubgoalVariant : std::uint8_t { FC, LSTM };

std::string to_string(SubgoalVariant v);

enum class LayerKind : std::uint8_t { Conv, FC, LSTM };

// Shape-only description of one layer, shared with the performance model.
struct LayerDesc {
  std::string name;
  LayerKind kind = LayerKind::FC;
  Precision precision = Precision::FxP16;
  // Conv: input H/W/C, kernel, output H/W/C. FC: in_dim/out_dim.
  // LSTM: in_dim = input width, out_dim = hidden width, steps = unroll K.
  int in_h = 0, in_w = 0, in_c = 0;
  int kernel = 0;
  int out_h = 0, out_w = 0, out_c = 0;
  int in_dim = 0, out_dim = 0;
  int steps = 1;
};

struct ConvDims {
  int out_channels = 8;
  int kernel = 3;
  Precision precision = Precision::FxP16;

  friend bool operator==(const ConvDims&, const ConvDims&) = default;
};

// Declarative graph description. Defaults: 32x32x3 input, convs 8/16/16
// with 3x3 kernels, embedding 32, sub-goal 16 (LSTM: K = 4), 4 actions.
struct Topology {
  int in_height = 32;
  int in_width = 32;
  int in_channels = 3;
  std::array<ConvDims, 3> convs{{{8, 3, Precision::FxP16}, {16, 3, Precision::FxP16}, {16, 3, Precision::FxP16}}};
  int embed_dim = 32;
  Precision embed_precision = Precision::FxP16;
  SubgoalVariant variant = SubgoalVariant::FC;
  int subgoal_dim = 16;
  int unroll_k = 4;
  Precision subgoal_precision = Precision::FxP16;
  int actions = 4;
  Precision action_precision = Precision::FxP16;

  static Topology defaults(SubgoalVariant variant, Precision p = Precision::FxP16);

  void set_precision(Precision p);
  // Throws ContractViolation on non-positive dims, a spatial size smaller
  // than a kernel, or an embedding width other than 32.
  void validate() const;
  std::vector<LayerDesc> layers() const;
  int flatten_dim() const;
  int action_input_dim() const { return embed_dim + subgoal_dim; }

  friend bool operator==(const Topology&, const Topology&) = default;
};

struct ConvLayerSpec {
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 0;
  int stride = 2;
  QTensor weight;  // out x in x k x k
  QTensor bias;    // out
  Precision precision = Precision::FxP16;
  QuantParams out;  // output activation format
};

struct FcLayerSpec {
  int in_dim = 0;
  int out_dim = 0;
  QTensor weight;  // out_dim x in_dim
  QTensor bias;    // out_dim
  Precision precision = Precision::FxP16;
  ActKind activation = ActKind::ReLU;
  QuantParams out;      // accumulator requantization target (logits for softmax)
  QuantParams act_out;  // format after the activation; equals `out` for ReLU
};

enum Gate : int { kInputGate = 0, kForgetGate = 1, kOutputGate = 2, kCellGate = 3 };

struct LstmWeights {
  int input_dim = 0;
  int hidden_dim = 0;
  Precision precision = Precision::FxP16;
  // Indexed by Gate: W_x* (hidden x input), W_h* (hidden x hidden), b_*.
  std::array<QTensor, 4> w_x;
  std::array<QTensor, 4> w_h;
  std::array<QTensor, 4> b;
  std::array<QuantParams, 4> gate_in;  // pre-activation formats
  QuantParams cell;                    // c_t format, at least 16 bits
  QuantParams hidden;                  // h_t format

  void validate() const;
};

struct LstmState {
  QTensor h;
  QTensor c;

  static LstmState zeros(const LstmWeights& w);
  friend bool operator==(const LstmState&, const LstmState&) = default;
};

struct NetworkSpec {
  Topology topology;
  QuantParams input;  // observation format
  std::array<ConvLayerSpec, 3> convs;
  FcLayerSpec embed;
  std::optional<FcLayerSpec> subgoal_fc;
  std::optional<LstmWeights> subgoal_lstm;
  QuantParams concat;  // format of [embedding || sub-goal]
  FcLayerSpec action;
  MultiplierKind multiplier = MultiplierKind::Exact;

  void validate() const;
};

// Per-layer runtime counters.
struct LayerTrace {
  std::string name;
  std::uint64_t mac_ops = 0;
  std::uint64_t af_ops = 0;
  std::uint64_t simd_cycles = 0;
};

struct ForwardTrace {
  std::vector<LayerTrace> layers;
  LayerTrace& layer(const std::string& name);
};

// Valid-padding stride-2 convolution over an HWC input, then ReLU.
QTensor conv2d_s2(const QTensor& input, const ConvLayerSpec& spec,
                  MultiplierKind kind = MultiplierKind::Exact, LayerTrace* trace = nullptr);

QTensor fc(const QTensor& input, const FcLayerSpec& spec, MultiplierKind kind = MultiplierKind::Exact,
           LayerTrace* trace = nullptr);

LstmState lstm_step(const QTensor& x, const LstmState& state, const LstmWeights& w,
                    MultiplierKind kind = MultiplierKind::Exact, LayerTrace* trace = nullptr);

struct ForwardResult {
  QTensor action_probs;
  QTensor subgoal;
  QTensor embedding;
  std::optional<LstmState> state;
};

// Full policy pass. `state` must be present exactly when the sub-goal module
// is an LSTM; the LSTM is stepped K times on the embedding.
ForwardResult hrl_forward(const QTensor& obs, const NetworkSpec& net,
                          const std::optional<LstmState>& state = std::nullopt,
                          ForwardTrace* trace = nullptr);

// Observation pixels (HWC, row-major) quantized to the network input format.
QTensor quantize_observation(std::span<const double> pixels, const NetworkSpec& net);

enum class SelectMode : std::uint8_t { Greedy, Sample };

// Greedy: argmax, lowest index on ties. Sample: inverse-CDF draw from the
// dequantized, renormalized distribution with a generator seeded by `seed`.
int select_action(const QTensor& probs, SelectMode mode = SelectMode::Greedy, std::uint64_t seed = 0);

// Codes of t re-expressed at another bit width with the scale shifted by the
// same power of two, after fxp::operand_headroom.
QTensor to_precision(const QTensor& t, Precision p);

}  // namespace qforce::qnet
