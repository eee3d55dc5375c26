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

#include "qforce/qnet.hpp"

#include <algorithm>
#include <cmath>

#include "qforce/error.hpp"

namespace qforce::qnet {

namespace {

using qmac::saturating_add;

int conv_out(int in, int k) { return (in - k) / 2 + 1; }

// Bias code moved into the product space of (a, b) with one rounding step.
std::int64_t bias_in_product_space(std::int32_t bias_code, const QuantParams& bias,
                                   const QuantParams& a, const QuantParams& b) {
  const double v = static_cast<double>(bias_code) * (a.scale * b.scale) / bias.scale;
  return fxp::saturate_round(v, std::numeric_limits<std::int64_t>::min(),
                             std::numeric_limits<std::int64_t>::max());
}

// Accumulator from product space (from_a * from_b) into (to_a * to_b).
std::int64_t rescale_acc(std::int64_t acc, double from_scale, double to_scale) {
  const double v = static_cast<double>(acc) * to_scale / from_scale;
  return fxp::saturate_round(v, std::numeric_limits<std::int64_t>::min(),
                             std::numeric_limits<std::int64_t>::max());
}

void require_bits(const QTensor& t, Precision p, const char* what) {
  QFORCE_REQUIRE(t.params().bits <= fxp::bits(p), std::string(what) + ": operand wider than layer precision");
}

std::uint64_t splitmix64(std::uint64_t& s) {
  std::uint64_t z = (s += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Elementwise products in the LSTM cell run on the 16-bit composed
// multiplier (32-bit for FxP32 networks).
Precision elementwise_mode(Precision p) {
  return p == Precision::FxP32 ? Precision::FxP32 : Precision::FxP16;
}

}  // namespace

std::string to_string(SubgoalVariant v) { return v == SubgoalVariant::FC ? "fc" : "lstm"; }

Topology Topology::defaults(SubgoalVariant variant, Precision p) {
  Topology t;
  t.variant = variant;
  t.set_precision(p);
  return t;
}

void Topology::set_precision(Precision p) {
  for (auto& c : convs) c.precision = p;
  embed_precision = subgoal_precision = action_precision = p;
}

void Topology::validate() const {
  QFORCE_REQUIRE(in_height > 0 && in_width > 0 && in_channels > 0, "input dims must be positive");
  int h = in_height, w = in_width;
  for (const auto& c : convs) {
    QFORCE_REQUIRE(c.out_channels > 0 && c.kernel > 0, "conv dims must be positive");
    QFORCE_REQUIRE(h >= c.kernel && w >= c.kernel, "conv input smaller than its kernel");
    h = conv_out(h, c.kernel);
    w = conv_out(w, c.kernel);
  }
  QFORCE_REQUIRE(embed_dim == 32, "embedding width must be 32");
  QFORCE_REQUIRE(subgoal_dim > 0 && actions > 0, "sub-goal and action dims must be positive");
  QFORCE_REQUIRE(variant == SubgoalVariant::FC || unroll_k >= 1, "LSTM unroll K must be >= 1");
}

int Topology::flatten_dim() const {
  int h = in_height, w = in_width;
  for (const auto& c : convs) {
    h = conv_out(h, c.kernel);
    w = conv_out(w, c.kernel);
  }
  return h * w * convs.back().out_channels;
}

std::vector<LayerDesc> Topology::layers() const {
  validate();
  std::vector<LayerDesc> out;
  int h = in_height, w = in_width, c = in_channels;
  for (std::size_t i = 0; i < convs.size(); ++i) {
    LayerDesc d;
    d.name = "conv" + std::to_string(i + 1);
    d.kind = LayerKind::Conv;
    d.precision = convs[i].precision;
    d.in_h = h;
    d.in_w = w;
    d.in_c = c;
    d.kernel = convs[i].kernel;
    d.out_h = conv_out(h, d.kernel);
    d.out_w = conv_out(w, d.kernel);
    d.out_c = convs[i].out_channels;
    h = d.out_h;
    w = d.out_w;
    c = d.out_c;
    out.push_back(d);
  }
  LayerDesc e;
  e.name = "embed";
  e.kind = LayerKind::FC;
  e.precision = embed_precision;
  e.in_dim = flatten_dim();
  e.out_dim = embed_dim;
  out.push_back(e);

  LayerDesc s;
  s.name = "subgoal";
  s.precision = subgoal_precision;
  s.in_dim = embed_dim;
  s.out_dim = subgoal_dim;
  if (variant == SubgoalVariant::LSTM) {
    s.kind = LayerKind::LSTM;
    s.steps = unroll_k;
  }
  out.push_back(s);

  LayerDesc a;
  a.name = "action";
  a.precision = action_precision;
  a.in_dim = action_input_dim();
  a.out_dim = actions;
  out.push_back(a);
  return out;
}

void LstmWeights::validate() const {
  QFORCE_REQUIRE(input_dim > 0 && hidden_dim > 0, "LSTM dims must be positive");
  const auto in = static_cast<std::size_t>(input_dim);
  const auto hid = static_cast<std::size_t>(hidden_dim);
  for (int g = 0; g < 4; ++g) {
    QFORCE_REQUIRE(w_x[g].size() == hid * in, "LSTM W_x must be hidden x input");
    QFORCE_REQUIRE(w_h[g].size() == hid * hid, "LSTM W_h must be hidden x hidden");
    QFORCE_REQUIRE(b[g].size() == hid, "LSTM bias must have hidden entries");
    gate_in[g].validate();
  }
  QFORCE_REQUIRE(cell.bits >= 16, "LSTM cell state must be stored at 16 bits or more");
  hidden.validate();
}

LstmState LstmState::zeros(const LstmWeights& w) {
  const auto hid = static_cast<std::size_t>(w.hidden_dim);
  return {QTensor::zeros(w.hidden, {hid}), QTensor::zeros(w.cell, {hid})};
}

void NetworkSpec::validate() const {
  topology.validate();
  input.validate();
  QFORCE_REQUIRE(input.bits == fxp::bits(topology.convs[0].precision),
                 "input format must match the first convolution's precision");
  QFORCE_REQUIRE(embed.out_dim == 32, "embedding width must be 32");
  QFORCE_REQUIRE(action.in_dim == topology.action_input_dim(),
                 "action head input must be embedding + sub-goal");
  if (topology.variant == SubgoalVariant::FC) {
    QFORCE_REQUIRE(subgoal_fc.has_value() && !subgoal_lstm.has_value(), "FC variant needs an FC sub-goal");
  } else {
    QFORCE_REQUIRE(subgoal_lstm.has_value() && !subgoal_fc.has_value(), "LSTM variant needs LSTM weights");
    subgoal_lstm->validate();
  }
}

LayerTrace& ForwardTrace::layer(const std::string& name) {
  for (auto& l : layers) {
    if (l.name == name) return l;
  }
  layers.push_back(LayerTrace{name, 0, 0, 0});
  return layers.back();
}

QTensor to_precision(const QTensor& t, Precision p) {
  const int b = fxp::bits(p);
  if (t.params().bits == b) return t;
  auto usable = [](int bits) { return bits - fxp::operand_headroom(bits); };
  const QuantParams target{std::ldexp(t.params().scale, usable(b) - usable(t.params().bits)), b};
  return fxp::requantize_tensor(t, target);
}

QTensor conv2d_s2(const QTensor& input, const ConvLayerSpec& spec, MultiplierKind kind, LayerTrace* trace) {
  QFORCE_REQUIRE(spec.stride == 2, "Q-Conv stride is fixed at 2");
  QFORCE_REQUIRE(input.shape().size() == 3, "conv input must be HWC");
  const int in_h = static_cast<int>(input.shape()[0]);
  const int in_w = static_cast<int>(input.shape()[1]);
  const int in_c = static_cast<int>(input.shape()[2]);
  const int k = spec.kernel;
  const int oc = spec.out_channels;
  QFORCE_REQUIRE(in_c == spec.in_channels, "conv input channels do not match the layer");
  QFORCE_REQUIRE(in_h >= k && in_w >= k, "conv input smaller than kernel");
  QFORCE_REQUIRE(spec.weight.size() == static_cast<std::size_t>(oc * in_c * k * k),
                 "conv weights must be out x in x k x k");
  QFORCE_REQUIRE(spec.bias.size() == static_cast<std::size_t>(oc), "conv bias must have one entry per output channel");
  require_bits(input, spec.precision, "conv2d_s2");
  require_bits(spec.weight, spec.precision, "conv2d_s2");

  const int out_h = conv_out(in_h, k);
  const int out_w = conv_out(in_w, k);
  const int window = k * k * in_c;

  // Kernels re-laid out as [o][ky][kx][c] to match HWC windows.
  std::vector<std::int32_t> kernels(static_cast<std::size_t>(oc * window));
  for (int o = 0; o < oc; ++o)
    for (int c = 0; c < in_c; ++c)
      for (int ky = 0; ky < k; ++ky)
        for (int kx = 0; kx < k; ++kx)
          kernels[static_cast<std::size_t>(o * window + (ky * k + kx) * in_c + c)] =
              spec.weight[static_cast<std::size_t>(((o * in_c + c) * k + ky) * k + kx)];

  std::vector<std::int64_t> bias(static_cast<std::size_t>(oc));
  for (int o = 0; o < oc; ++o)
    bias[static_cast<std::size_t>(o)] = bias_in_product_space(spec.bias[static_cast<std::size_t>(o)], spec.bias.params(),
                                                              input.params(), spec.weight.params());

  std::vector<std::int32_t> patch(static_cast<std::size_t>(window));
  std::vector<std::int32_t> out(static_cast<std::size_t>(out_h * out_w * oc));
  qmac::MacCounter counter;
  const auto& x = input.codes();
  for (int oy = 0; oy < out_h; ++oy) {
    for (int ox = 0; ox < out_w; ++ox) {
      for (int ky = 0; ky < k; ++ky) {
        const auto row = static_cast<std::size_t>(((2 * oy + ky) * in_w + 2 * ox) * in_c);
        std::copy_n(x.begin() + static_cast<std::ptrdiff_t>(row), k * in_c,
                    patch.begin() + ky * k * in_c);
      }
      for (int o = 0; o < oc; ++o) {
        const std::span<const std::int32_t> kern(kernels.data() + o * window, static_cast<std::size_t>(window));
        std::int64_t acc = qmac::dot(patch, kern, spec.precision, kind, &counter);
        acc = saturating_add(acc, bias[static_cast<std::size_t>(o)], 64);
        const std::int32_t code = fxp::requantize(acc, input.params(), spec.weight.params(), spec.out);
        out[static_cast<std::size_t>((oy * out_w + ox) * oc + o)] = std::max(code, 0);
      }
    }
  }
  if (trace) {
    trace->mac_ops += counter.macs;
    trace->simd_cycles += counter.cycles;
    trace->af_ops += out.size();
  }
  return QTensor(std::move(out), spec.out,
                 {static_cast<std::size_t>(out_h), static_cast<std::size_t>(out_w), static_cast<std::size_t>(oc)});
}

namespace {

// Product-space accumulators W*x + b for every output row.
std::vector<std::int64_t> affine_acc(const QTensor& x, const QTensor& w, const QTensor& b, int out_dim,
                                     Precision mode, MultiplierKind kind, qmac::MacCounter* counter) {
  const auto in = x.size();
  std::vector<std::int64_t> acc(static_cast<std::size_t>(out_dim));
  for (std::size_t j = 0; j < acc.size(); ++j) {
    const std::span<const std::int32_t> row(w.codes().data() + j * in, in);
    const std::int64_t d = qmac::dot(row, x.view(), mode, kind, counter);
    acc[j] = saturating_add(d, bias_in_product_space(b[j], b.params(), w.params(), x.params()), 64);
  }
  return acc;
}

}  // namespace

QTensor fc(const QTensor& input, const FcLayerSpec& spec, MultiplierKind kind, LayerTrace* trace) {
  QFORCE_REQUIRE(input.size() == static_cast<std::size_t>(spec.in_dim), "fc input length does not match in_dim");
  QFORCE_REQUIRE(spec.weight.size() == static_cast<std::size_t>(spec.in_dim * spec.out_dim),
                 "fc weight must be out_dim x in_dim");
  QFORCE_REQUIRE(spec.bias.size() == static_cast<std::size_t>(spec.out_dim), "fc bias must have out_dim entries");
  require_bits(input, spec.precision, "fc");
  require_bits(spec.weight, spec.precision, "fc");

  qmac::MacCounter counter;
  const auto acc = affine_acc(input, spec.weight, spec.bias, spec.out_dim, spec.precision, kind, &counter);
  std::vector<std::int32_t> codes(acc.size());
  for (std::size_t j = 0; j < acc.size(); ++j)
    codes[j] = fxp::requantize(acc[j], spec.weight.params(), input.params(), spec.out);
  QTensor pre(std::move(codes), spec.out, {static_cast<std::size_t>(spec.out_dim)});

  const auto cfg = vact::CordicConfig::for_precision(spec.precision);
  QTensor out = spec.activation == ActKind::ReLU ? vact::relu_fx(pre)
                                                 : vact::activate(spec.activation, pre, cfg, spec.act_out);
  if (trace) {
    trace->mac_ops += counter.macs;
    trace->simd_cycles += counter.cycles;
    trace->af_ops += static_cast<std::uint64_t>(spec.out_dim);
  }
  return out;
}

LstmState lstm_step(const QTensor& x, const LstmState& state, const LstmWeights& w, MultiplierKind kind,
                    LayerTrace* trace) {
  w.validate();
  const auto hid = static_cast<std::size_t>(w.hidden_dim);
  QFORCE_REQUIRE(x.size() == static_cast<std::size_t>(w.input_dim), "lstm input length does not match");
  QFORCE_REQUIRE(state.h.size() == hid && state.c.size() == hid, "lstm state length does not match hidden_dim");
  require_bits(x, w.precision, "lstm_step");
  require_bits(state.h, w.precision, "lstm_step");

  const auto cfg = vact::CordicConfig::for_precision(w.precision);
  const QuantParams unit = fxp::unit_params(fxp::bits(w.precision));
  const Precision ew = elementwise_mode(w.precision);
  qmac::MacCounter counter;

  // Gate pre-activations W_x x + W_h h + b, summed in the product space of
  // the input term, then one requantization per gate.
  std::array<QTensor, 4> gate;
  for (int g = 0; g < 4; ++g) {
    const auto acc = affine_acc(x, w.w_x[g], w.b[g], w.hidden_dim, w.precision, kind, &counter);
    const double x_space = w.w_x[g].params().scale * x.params().scale;
    const double h_space = w.w_h[g].params().scale * state.h.params().scale;
    std::vector<std::int32_t> pre(hid);
    for (std::size_t j = 0; j < hid; ++j) {
      const std::span<const std::int32_t> row(w.w_h[g].codes().data() + j * hid, hid);
      const std::int64_t ah = qmac::dot(row, state.h.view(), w.precision, kind, &counter);
      const std::int64_t total = saturating_add(acc[j], rescale_acc(ah, h_space, x_space), 64);
      pre[j] = fxp::requantize(total, w.w_x[g].params(), x.params(), w.gate_in[g]);
    }
    const QTensor pre_t(std::move(pre), w.gate_in[g], {hid});
    gate[static_cast<std::size_t>(g)] =
        g == kCellGate ? vact::tanh_fx(pre_t, cfg, unit) : vact::sigmoid_fx(pre_t, cfg, unit);
  }

  // c_t = f * c_{t-1} + i * g
  const QTensor& ig = gate[kInputGate];
  const QTensor& fg = gate[kForgetGate];
  const QTensor& og = gate[kOutputGate];
  const QTensor& cg = gate[kCellGate];
  const QTensor c_prev = w.cell == state.c.params() ? state.c : fxp::requantize_tensor(state.c, w.cell);
  const double fc_space = unit.scale * c_prev.params().scale;
  const double ig_space = unit.scale * unit.scale;
  std::vector<std::int32_t> c_codes(hid);
  for (std::size_t j = 0; j < hid; ++j) {
    const std::int64_t keep = qmac::lane_product(fg[j], c_prev[j], ew, kind);
    const std::int64_t write = qmac::lane_product(ig[j], cg[j], ew, kind);
    const std::int64_t total = saturating_add(keep, rescale_acc(write, ig_space, fc_space), 64);
    c_codes[j] = fxp::requantize(total, unit, c_prev.params(), w.cell);
  }
  QTensor c_next(std::move(c_codes), w.cell, {hid});

  // h_t = tanh(c_t) * o
  const QTensor tc = vact::tanh_fx(c_next, cfg, unit);
  std::vector<std::int32_t> h_codes(hid);
  for (std::size_t j = 0; j < hid; ++j) {
    const std::int64_t p = qmac::lane_product(tc[j], og[j], ew, kind);
    h_codes[j] = fxp::requantize(p, unit, unit, w.hidden);
  }

  if (trace) {
    trace->mac_ops += counter.macs;
    trace->simd_cycles += counter.cycles;
    // 3 sigmoid + 2 tanh activations and 3 elementwise products per unit.
    trace->af_ops += 8 * hid;
  }
  return {QTensor(std::move(h_codes), w.hidden, {hid}), std::move(c_next)};
}

ForwardResult hrl_forward(const QTensor& obs, const NetworkSpec& net, const std::optional<LstmState>& state,
                          ForwardTrace* trace) {
  const Topology& topo = net.topology;
  QFORCE_REQUIRE(obs.shape().size() == 3 && obs.shape()[0] == static_cast<std::size_t>(topo.in_height) &&
                     obs.shape()[1] == static_cast<std::size_t>(topo.in_width) &&
                     obs.shape()[2] == static_cast<std::size_t>(topo.in_channels),
                 "observation shape does not match the network input");
  const bool lstm = topo.variant == SubgoalVariant::LSTM;
  QFORCE_REQUIRE(state.has_value() == lstm, "recurrent state must be supplied exactly for the LSTM variant");

  auto layer = [&](const char* name) { return trace ? &trace->layer(name) : nullptr; };
  const MultiplierKind kind = net.multiplier;

  QTensor x = obs;
  for (std::size_t i = 0; i < net.convs.size(); ++i) {
    x = conv2d_s2(to_precision(x, net.convs[i].precision), net.convs[i], kind,
                  layer(i == 0 ? "conv1" : i == 1 ? "conv2" : "conv3"));
  }
  x = x.reshaped({x.size()});
  QTensor embedding = fc(to_precision(x, net.embed.precision), net.embed, kind, layer("embed"));

  ForwardResult r;
  if (lstm) {
    const LstmWeights& w = *net.subgoal_lstm;
    LstmState s = *state;
    const QTensor in = to_precision(embedding, w.precision);
    for (int k = 0; k < topo.unroll_k; ++k) s = lstm_step(in, s, w, kind, layer("subgoal"));
    r.subgoal = s.h;
    r.state = std::move(s);
  } else {
    r.subgoal = fc(to_precision(embedding, net.subgoal_fc->precision), *net.subgoal_fc, kind, layer("subgoal"));
  }

  // Action head input is [embedding || sub-goal] in that order.
  const QTensor e = fxp::requantize_tensor(embedding, net.concat);
  const QTensor g = fxp::requantize_tensor(r.subgoal, net.concat);
  std::vector<std::int32_t> cat(e.codes());
  cat.insert(cat.end(), g.codes().begin(), g.codes().end());
  const QTensor joined(std::move(cat), net.concat, {e.size() + g.size()});
  r.action_probs = fc(joined, net.action, kind, layer("action"));
  r.embedding = std::move(embedding);
  return r;
}

QTensor quantize_observation(std::span<const double> pixels, const NetworkSpec& net) {
  const auto& t = net.topology;
  return fxp::quantize(pixels, net.input,
                       {static_cast<std::size_t>(t.in_height), static_cast<std::size_t>(t.in_width),
                        static_cast<std::size_t>(t.in_channels)});
}

int select_action(const QTensor& probs, SelectMode mode, std::uint64_t seed) {
  QFORCE_REQUIRE(probs.size() > 0, "select_action on an empty distribution");
  if (mode == SelectMode::Greedy) {
    return static_cast<int>(std::max_element(probs.codes().begin(), probs.codes().end()) - probs.codes().begin());
  }
  std::int64_t total = 0;
  for (auto c : probs.codes()) total += std::max(c, 0);
  if (total == 0) return 0;
  std::uint64_t s = seed;
  const double u = static_cast<double>(splitmix64(s) >> 11) * 0x1.0p-53;
  const double threshold = u * static_cast<double>(total);
  std::int64_t run = 0;
  int last_nonzero = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const std::int64_t c = std::max(probs[i], 0);
    if (c == 0) continue;
    run += c;
    last_nonzero = static_cast<int>(i);
    if (threshold < static_cast<double>(run)) return last_nonzero;
  }
  return last_nonzero;
}

}  // namespace qforce::qnet
