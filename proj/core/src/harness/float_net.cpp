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

#include "qforce/harness/float_net.hpp"

#include <algorithm>
#include <cmath>

#include "qforce/error.hpp"
#include "qforce/harness/rng.hpp"

namespace qforce::harness {
namespace {

using qnet::SubgoalVariant;

FloatTensor make(std::vector<std::size_t> shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return {std::move(shape), std::vector<double>(n, 0.0)};
}

std::string conv_name(std::size_t i, const char* part) { return "conv" + std::to_string(i + 1) + "." + part; }

std::string lstm_name(const char* part, int g) { return std::string("lstm.") + part + "." + gate_suffix(g); }

int conv_out(int in, int k) { return (in - k) / 2 + 1; }

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

void track(double& slot, std::span<const double> v) {
  for (double x : v) slot = std::max(slot, std::abs(x));
}

// y = W x + b, W row-major out x in.
std::vector<double> affine(const FloatTensor& w, const FloatTensor& b, std::span<const double> x) {
  const std::size_t out = b.size();
  const std::size_t in = x.size();
  std::vector<double> y(out);
  for (std::size_t o = 0; o < out; ++o) {
    double s = b.data[o];
    const double* row = w.data.data() + o * in;
    for (std::size_t i = 0; i < in; ++i) s += row[i] * x[i];
    y[o] = s;
  }
  return y;
}

// dW += g x^T, db += g, dx += W^T g.
void affine_back(const FloatTensor& w, std::span<const double> x, std::span<const double> g, FloatTensor& dw,
                 FloatTensor* db, std::vector<double>* dx) {
  const std::size_t in = x.size();
  for (std::size_t o = 0; o < g.size(); ++o) {
    const double go = g[o];
    if (go == 0.0) continue;
    if (db) db->data[o] += go;
    double* drow = dw.data.data() + o * in;
    const double* row = w.data.data() + o * in;
    for (std::size_t i = 0; i < in; ++i) drow[i] += go * x[i];
    if (dx)
      for (std::size_t i = 0; i < in; ++i) (*dx)[i] += go * row[i];
  }
}

struct ConvShape {
  int in_h, in_w, in_c, k, oc, out_h, out_w;
};

std::vector<double> conv_forward(const ConvShape& s, const FloatTensor& w, const FloatTensor& b,
                                 std::span<const double> x) {
  std::vector<double> y(static_cast<std::size_t>(s.out_h * s.out_w * s.oc));
  for (int oy = 0; oy < s.out_h; ++oy)
    for (int ox = 0; ox < s.out_w; ++ox)
      for (int o = 0; o < s.oc; ++o) {
        double acc = b.data[static_cast<std::size_t>(o)];
        for (int c = 0; c < s.in_c; ++c)
          for (int ky = 0; ky < s.k; ++ky)
            for (int kx = 0; kx < s.k; ++kx)
              acc += w.data[static_cast<std::size_t>(((o * s.in_c + c) * s.k + ky) * s.k + kx)] *
                     x[static_cast<std::size_t>(((2 * oy + ky) * s.in_w + 2 * ox + kx) * s.in_c + c)];
        y[static_cast<std::size_t>((oy * s.out_w + ox) * s.oc + o)] = std::max(acc, 0.0);
      }
  return y;
}

// `g` is d(loss)/d(pre-activation).
void conv_backward(const ConvShape& s, const FloatTensor& w, std::span<const double> x, std::span<const double> g,
                   FloatTensor& dw, FloatTensor& db, std::vector<double>* dx) {
  for (int oy = 0; oy < s.out_h; ++oy)
    for (int ox = 0; ox < s.out_w; ++ox)
      for (int o = 0; o < s.oc; ++o) {
        const double go = g[static_cast<std::size_t>((oy * s.out_w + ox) * s.oc + o)];
        if (go == 0.0) continue;
        db.data[static_cast<std::size_t>(o)] += go;
        for (int c = 0; c < s.in_c; ++c)
          for (int ky = 0; ky < s.k; ++ky)
            for (int kx = 0; kx < s.k; ++kx) {
              const auto wi = static_cast<std::size_t>(((o * s.in_c + c) * s.k + ky) * s.k + kx);
              const auto xi = static_cast<std::size_t>(((2 * oy + ky) * s.in_w + 2 * ox + kx) * s.in_c + c);
              dw.data[wi] += go * x[xi];
              if (dx) (*dx)[xi] += go * w.data[wi];
            }
      }
}

std::array<ConvShape, 3> conv_shapes(const qnet::Topology& t) {
  std::array<ConvShape, 3> out{};
  int h = t.in_height, w = t.in_width, c = t.in_channels;
  for (std::size_t i = 0; i < 3; ++i) {
    const int k = t.convs[i].kernel;
    out[i] = {h, w, c, k, t.convs[i].out_channels, conv_out(h, k), conv_out(w, k)};
    h = out[i].out_h;
    w = out[i].out_w;
    c = out[i].oc;
  }
  return out;
}

}  // namespace

FloatNetwork::FloatNetwork(qnet::Topology topology) : topology_(std::move(topology)) {
  topology_.validate();
  const auto& t = topology_;
  std::size_t in_c = static_cast<std::size_t>(t.in_channels);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto oc = static_cast<std::size_t>(t.convs[i].out_channels);
    const auto k = static_cast<std::size_t>(t.convs[i].kernel);
    tensors_[conv_name(i, "weight")] = make({oc, in_c, k, k});
    tensors_[conv_name(i, "bias")] = make({oc});
    in_c = oc;
  }
  const auto e = static_cast<std::size_t>(t.embed_dim);
  const auto s = static_cast<std::size_t>(t.subgoal_dim);
  tensors_["embed.weight"] = make({e, static_cast<std::size_t>(t.flatten_dim())});
  tensors_["embed.bias"] = make({e});
  if (t.variant == SubgoalVariant::FC) {
    tensors_["subgoal.weight"] = make({s, e});
    tensors_["subgoal.bias"] = make({s});
  } else {
    for (int g = 0; g < 4; ++g) {
      tensors_[lstm_name("w_x", g)] = make({s, e});
      tensors_[lstm_name("w_h", g)] = make({s, s});
      tensors_[lstm_name("b", g)] = make({s});
    }
  }
  const auto a = static_cast<std::size_t>(t.actions);
  tensors_["action.weight"] = make({a, e + s});
  tensors_["action.bias"] = make({a});
}

FloatNetwork FloatNetwork::random(const qnet::Topology& topology, std::uint64_t seed, double bias_std) {
  FloatNetwork net(topology);
  Rng rng(seed);
  for (auto& [name, t] : net.tensors_) {
    const bool bias = name.find(".bias") != std::string::npos || name.rfind("lstm.b.", 0) == 0;
    if (bias) {
      for (auto& v : t.data) v = bias_std > 0.0 ? rng.normal() * bias_std : 0.0;
      if (name == "lstm.b.f") std::fill(t.data.begin(), t.data.end(), 1.0);
      continue;
    }
    std::size_t fan_in = 1;
    for (std::size_t d = 1; d < t.shape.size(); ++d) fan_in *= t.shape[d];
    double std_dev = std::sqrt(2.0 / static_cast<double>(fan_in));
    if (name.rfind("lstm.", 0) == 0) std_dev = 1.0 / std::sqrt(static_cast<double>(fan_in));
    if (name == "action.weight") std_dev *= 0.1;
    for (auto& v : t.data) v = rng.normal() * std_dev;
  }
  return net;
}

FloatTensor& FloatNetwork::at(const std::string& name) {
  auto it = tensors_.find(name);
  QFORCE_REQUIRE(it != tensors_.end(), "unknown tensor " + name);
  return it->second;
}

const FloatTensor& FloatNetwork::at(const std::string& name) const {
  auto it = tensors_.find(name);
  QFORCE_REQUIRE(it != tensors_.end(), "unknown tensor " + name);
  return it->second;
}

FloatNetwork::LstmState FloatNetwork::initial_state() const {
  const auto s = static_cast<std::size_t>(topology_.subgoal_dim);
  return {std::vector<double>(s, 0.0), std::vector<double>(s, 0.0)};
}

FloatNetwork FloatNetwork::zeros_like() const {
  FloatNetwork z(*this);
  for (auto& [_, t] : z.tensors_) std::fill(t.data.begin(), t.data.end(), 0.0);
  return z;
}

FloatNetwork::Output FloatNetwork::forward(std::span<const double> obs, const std::optional<LstmState>& state,
                                           ActivationRanges* ranges, Cache* cache) const {
  const auto& t = topology_;
  QFORCE_REQUIRE(obs.size() == static_cast<std::size_t>(t.in_height * t.in_width * t.in_channels),
                 "observation length does not match the network input");
  const bool lstm = t.variant == SubgoalVariant::LSTM;
  QFORCE_REQUIRE(state.has_value() == lstm, "recurrent state must be supplied exactly for the LSTM variant");

  if (ranges) {
    track(ranges->input, obs);
    ++ranges->samples;
  }
  const auto shapes = conv_shapes(t);
  std::vector<double> x(obs.begin(), obs.end());
  if (cache) cache->input = x;
  for (std::size_t i = 0; i < 3; ++i) {
    x = conv_forward(shapes[i], at(conv_name(i, "weight")), at(conv_name(i, "bias")), x);
    if (ranges) track(ranges->conv[i], x);
    if (cache) cache->conv[i] = x;
  }
  std::vector<double> e = affine(at("embed.weight"), at("embed.bias"), x);
  for (auto& v : e) v = std::max(v, 0.0);
  if (ranges) track(ranges->embed, e);
  if (cache) cache->embed = e;

  Output out;
  if (lstm) {
    LstmState s = *state;
    if (cache) cache->steps.clear();
    const std::size_t hid = s.h.size();
    for (int k = 0; k < t.unroll_k; ++k) {
      std::array<std::vector<double>, 4> pre;
      for (int g = 0; g < 4; ++g) {
        pre[static_cast<std::size_t>(g)] = affine(at(lstm_name("w_x", g)), at(lstm_name("b", g)), e);
        const FloatTensor& wh = at(lstm_name("w_h", g));
        for (std::size_t j = 0; j < hid; ++j) {
          double acc = 0.0;
          for (std::size_t i = 0; i < hid; ++i) acc += wh.data[j * hid + i] * s.h[i];
          pre[static_cast<std::size_t>(g)][j] += acc;
        }
        if (ranges) track(ranges->gate[static_cast<std::size_t>(g)], pre[static_cast<std::size_t>(g)]);
      }
      LstmStepCache step;
      step.h_prev = s.h;
      step.c_prev = s.c;
      step.i.resize(hid);
      step.f.resize(hid);
      step.o.resize(hid);
      step.g.resize(hid);
      step.tanh_c.resize(hid);
      for (std::size_t j = 0; j < hid; ++j) {
        step.i[j] = sigmoid(pre[qnet::kInputGate][j]);
        step.f[j] = sigmoid(pre[qnet::kForgetGate][j]);
        step.o[j] = sigmoid(pre[qnet::kOutputGate][j]);
        step.g[j] = std::tanh(pre[qnet::kCellGate][j]);
        s.c[j] = step.f[j] * s.c[j] + step.i[j] * step.g[j];
        step.tanh_c[j] = std::tanh(s.c[j]);
        s.h[j] = step.o[j] * step.tanh_c[j];
      }
      if (ranges) track(ranges->cell, s.c);
      step.c = s.c;
      step.h = s.h;
      if (cache) cache->steps.push_back(std::move(step));
    }
    out.subgoal = s.h;
    out.state = std::move(s);
  } else {
    out.subgoal = affine(at("subgoal.weight"), at("subgoal.bias"), e);
    for (auto& v : out.subgoal) v = std::max(v, 0.0);
  }
  if (ranges) track(ranges->subgoal, out.subgoal);
  if (cache) cache->subgoal = out.subgoal;

  std::vector<double> cat(e);
  cat.insert(cat.end(), out.subgoal.begin(), out.subgoal.end());
  if (ranges) track(ranges->concat, cat);
  out.logits = affine(at("action.weight"), at("action.bias"), cat);
  if (ranges) track(ranges->logits, out.logits);
  if (cache) cache->concat = cat;

  const double m = *std::max_element(out.logits.begin(), out.logits.end());
  out.probs.resize(out.logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < out.logits.size(); ++i) z += out.probs[i] = std::exp(out.logits[i] - m);
  for (auto& p : out.probs) p /= z;
  out.embedding = std::move(e);
  return out;
}

void FloatNetwork::backward(const Cache& cache, std::span<const double> dlogits, FloatNetwork& grads) const {
  const auto& t = topology_;
  const std::size_t e_dim = cache.embed.size();
  std::vector<double> dcat(cache.concat.size(), 0.0);
  affine_back(at("action.weight"), cache.concat, dlogits, grads.at("action.weight"), &grads.at("action.bias"), &dcat);

  std::vector<double> de(dcat.begin(), dcat.begin() + static_cast<std::ptrdiff_t>(e_dim));
  std::vector<double> ds(dcat.begin() + static_cast<std::ptrdiff_t>(e_dim), dcat.end());

  if (t.variant == SubgoalVariant::FC) {
    for (std::size_t j = 0; j < ds.size(); ++j)
      if (cache.subgoal[j] <= 0.0) ds[j] = 0.0;
    affine_back(at("subgoal.weight"), cache.embed, ds, grads.at("subgoal.weight"), &grads.at("subgoal.bias"), &de);
  } else {
    const std::size_t hid = ds.size();
    std::vector<double> dh = ds;
    std::vector<double> dc(hid, 0.0);
    for (auto it = cache.steps.rbegin(); it != cache.steps.rend(); ++it) {
      const LstmStepCache& st = *it;
      std::array<std::vector<double>, 4> dpre;
      for (auto& v : dpre) v.assign(hid, 0.0);
      std::vector<double> dc_prev(hid);
      for (std::size_t j = 0; j < hid; ++j) {
        const double d_o = dh[j] * st.tanh_c[j];
        dc[j] += dh[j] * st.o[j] * (1.0 - st.tanh_c[j] * st.tanh_c[j]);
        const double d_f = dc[j] * st.c_prev[j];
        const double d_i = dc[j] * st.g[j];
        const double d_g = dc[j] * st.i[j];
        dc_prev[j] = dc[j] * st.f[j];
        dpre[qnet::kInputGate][j] = d_i * st.i[j] * (1.0 - st.i[j]);
        dpre[qnet::kForgetGate][j] = d_f * st.f[j] * (1.0 - st.f[j]);
        dpre[qnet::kOutputGate][j] = d_o * st.o[j] * (1.0 - st.o[j]);
        dpre[qnet::kCellGate][j] = d_g * (1.0 - st.g[j] * st.g[j]);
      }
      std::vector<double> dh_prev(hid, 0.0);
      for (int g = 0; g < 4; ++g) {
        const auto& dp = dpre[static_cast<std::size_t>(g)];
        affine_back(at(lstm_name("w_x", g)), cache.embed, dp, grads.at(lstm_name("w_x", g)),
                    &grads.at(lstm_name("b", g)), &de);
        affine_back(at(lstm_name("w_h", g)), st.h_prev, dp, grads.at(lstm_name("w_h", g)), nullptr, &dh_prev);
      }
      dh = std::move(dh_prev);
      dc = std::move(dc_prev);
    }
  }

  for (std::size_t j = 0; j < de.size(); ++j)
    if (cache.embed[j] <= 0.0) de[j] = 0.0;
  std::vector<double> dx(cache.conv[2].size(), 0.0);
  affine_back(at("embed.weight"), cache.conv[2], de, grads.at("embed.weight"), &grads.at("embed.bias"), &dx);

  const auto shapes = conv_shapes(t);
  for (std::size_t i = 3; i-- > 0;) {
    for (std::size_t j = 0; j < dx.size(); ++j)
      if (cache.conv[i][j] <= 0.0) dx[j] = 0.0;
    const std::vector<double>& in = i == 0 ? cache.input : cache.conv[i - 1];
    std::vector<double> din;
    if (i > 0) din.assign(in.size(), 0.0);
    conv_backward(shapes[i], at(conv_name(i, "weight")), in, dx, grads.at(conv_name(i, "weight")),
                  grads.at(conv_name(i, "bias")), i > 0 ? &din : nullptr);
    dx = std::move(din);
  }
}

}  // namespace qforce::harness
