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

#include "qforce/harness/quantize_policy.hpp"

#include <algorithm>

#include "qforce/error.hpp"
#include "qforce/harness/rng.hpp"

namespace qforce::harness {
namespace {

using fxp::Precision;
using fxp::QTensor;
using fxp::QuantParams;

constexpr int kBiasBits = 32;

QTensor quantize_tensor(const FloatTensor& t, int bits) {
  return fxp::quantize(t.data, fxp::calibrate_operand(t.data, bits), t.shape);
}

QTensor quantize_bias(const FloatTensor& t) {
  return fxp::quantize(t.data, fxp::calibrate_symmetric(t.data, kBiasBits), t.shape);
}

// Formats of tensors that feed a Q-MAC.
QuantParams range_params(double max_abs, int bits) {
  const double r[1] = {max_abs};
  return fxp::calibrate_operand(r, bits);
}

// Pre-activation and cell formats only meet V-ACT or a single product.
QuantParams plain_range_params(double max_abs, int bits) {
  const double r[1] = {max_abs};
  return fxp::calibrate_symmetric(r, bits);
}

int argmax(const std::vector<double>& v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

CalibrationSet collect_calibration(const FloatNetwork& net, std::size_t min_samples, std::uint64_t seed,
                                   const GridConfig& env) {
  CalibrationSet set;
  const bool lstm = net.topology().variant == qnet::SubgoalVariant::LSTM;
  GridWorld world(env);
  for (std::uint64_t ep = 0; set.samples.size() < min_samples; ++ep) {
    world.reset(derive_seed(seed, ep));
    std::optional<FloatNetwork::LstmState> state;
    if (lstm) state = net.initial_state();
    while (!world.done()) {
      CalibrationSample s{world.observe(), state};
      auto out = net.forward(s.obs, state, &set.ranges);
      state = out.state;
      set.samples.push_back(std::move(s));
      world.step(argmax(out.probs));
    }
  }
  return set;
}

qnet::NetworkSpec quantize_policy(const FloatNetwork& net, Precision precision, const ActivationRanges& ranges,
                                  qmac::MultiplierKind multiplier) {
  qnet::NetworkSpec spec;
  spec.topology = net.topology();
  spec.topology.set_precision(precision);
  spec.multiplier = multiplier;
  const auto& t = spec.topology;

  spec.input = range_params(ranges.input, fxp::bits(t.convs[0].precision));
  int in_c = t.in_channels;
  for (std::size_t i = 0; i < 3; ++i) {
    const std::string p = "conv" + std::to_string(i + 1);
    auto& c = spec.convs[i];
    c.in_channels = in_c;
    c.out_channels = t.convs[i].out_channels;
    c.kernel = t.convs[i].kernel;
    c.precision = t.convs[i].precision;
    c.weight = quantize_tensor(net.at(p + ".weight"), fxp::bits(c.precision));
    c.bias = quantize_bias(net.at(p + ".bias"));
    c.out = range_params(ranges.conv[i], fxp::bits(c.precision));
    in_c = c.out_channels;
  }

  auto fc = [&](const std::string& p, int in, int out, Precision prec, vact::ActKind act, double out_range) {
    qnet::FcLayerSpec s;
    s.in_dim = in;
    s.out_dim = out;
    s.weight = quantize_tensor(net.at(p + ".weight"), fxp::bits(prec));
    s.bias = quantize_bias(net.at(p + ".bias"));
    s.precision = prec;
    s.activation = act;
    s.out = act == vact::ActKind::ReLU ? range_params(out_range, fxp::bits(prec))
                                       : plain_range_params(out_range, fxp::bits(prec));
    s.act_out = act == vact::ActKind::ReLU ? s.out : fxp::unit_params(fxp::bits(prec));
    return s;
  };
  spec.embed = fc("embed", t.flatten_dim(), t.embed_dim, t.embed_precision, vact::ActKind::ReLU, ranges.embed);
  if (t.variant == qnet::SubgoalVariant::FC) {
    spec.subgoal_fc =
        fc("subgoal", t.embed_dim, t.subgoal_dim, t.subgoal_precision, vact::ActKind::ReLU, ranges.subgoal);
  } else {
    qnet::LstmWeights l;
    l.input_dim = t.embed_dim;
    l.hidden_dim = t.subgoal_dim;
    l.precision = t.subgoal_precision;
    const int lb = fxp::bits(l.precision);
    for (int g = 0; g < 4; ++g) {
      const std::string s = gate_suffix(g);
      const auto gi = static_cast<std::size_t>(g);
      l.w_x[gi] = quantize_tensor(net.at("lstm.w_x." + s), lb);
      l.w_h[gi] = quantize_tensor(net.at("lstm.w_h." + s), lb);
      l.b[gi] = quantize_bias(net.at("lstm.b." + s));
      l.gate_in[gi] = plain_range_params(ranges.gate[gi], lb);
    }
    l.cell = plain_range_params(ranges.cell, std::max(lb, 16));
    l.hidden = range_params(1.0, lb);
    spec.subgoal_lstm = std::move(l);
  }
  spec.concat = range_params(ranges.concat, fxp::bits(t.action_precision));
  spec.action = fc("action", t.action_input_dim(), t.actions, t.action_precision, vact::ActKind::Softmax,
                   ranges.logits);
  spec.validate();
  return spec;
}

}  // namespace qforce::harness
