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


// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Every check compares against the reference models in
// oracle.hpp or against exact integer arithmetic.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "golden_case.hpp"
#include "oracle.hpp"
#include "qforce/harness/float_net.hpp"
#include "qforce/harness/gridworld.hpp"
#include "qforce/harness/quantize_policy.hpp"
#include "qforce/harness/rollout.hpp"
#include "qforce/harness/train.hpp"
#include "qforce/harness/weight_file.hpp"
#include "qforce/perf.hpp"
#include "qforce/qmac.hpp"
#include "qforce/qnet.hpp"
#include "qforce/vact.hpp"

namespace {

using namespace qforce;
using fxp::Precision;
using fxp::QTensor;
using fxp::QuantParams;
using oracle::i128;
using qnet::SubgoalVariant;
namespace fs = std::filesystem;

const Precision kAll[] = {Precision::FxP8, Precision::FxP16, Precision::FxP32};

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::int64_t full_range(std::mt19937_64& gen, int bits) {
  return std::uniform_int_distribution<std::int64_t>(fxp::min_code(bits), fxp::max_code(bits))(gen);
}

std::vector<double> normals(std::mt19937_64& gen, std::size_t n, double sd) {
  std::normal_distribution<double> d(0.0, sd);
  std::vector<double> v(n);
  for (auto& x : v) x = d(gen);
  return v;
}

QTensor operand(const std::vector<double>& v, int bits, std::vector<std::size_t> shape) {
  return fxp::quantize(v, fxp::calibrate_operand(v, bits), std::move(shape));
}

QTensor bias32(const std::vector<double>& v) { return fxp::quantize(v, fxp::calibrate_symmetric(v, 32), {v.size()}); }

// ---- 1 ----
Outcome qmac_exactness() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  std::uint64_t bad = 0, cases = 0;
  for (int a = -128; a < 128; ++a)
    for (int b = -128; b < 128; ++b, ++cases)
      bad += qmac::mul8(static_cast<std::int8_t>(a), static_cast<std::int8_t>(b)) != a * b;
  std::mt19937_64 gen(1);
  for (int i = 0; i < 1000000; ++i, ++cases) {
    const auto a = static_cast<std::int16_t>(full_range(gen, 16)), b = static_cast<std::int16_t>(full_range(gen, 16));
    bad += qmac::mul16_composed(a, b) != std::int32_t{a} * b;
  }
  for (int i = 0; i < 1000000; ++i, ++cases) {
    const auto a = static_cast<std::int32_t>(full_range(gen, 32)), b = static_cast<std::int32_t>(full_range(gen, 32));
    bad += static_cast<i128>(qmac::mul32_composed(a, b)) != static_cast<i128>(a) * b;
  }
  for (int bits : {16, 32}) {
    std::vector<std::int64_t> corners = {0, 1, -1, 127, 128, -128, -129, 255, 256, -256};
    for (std::int64_t v : {fxp::min_code(bits), fxp::min_code(bits) + 1, fxp::max_code(bits), fxp::max_code(bits) - 1})
      corners.push_back(v);
    if (bits == 32)
      for (std::int64_t v : {32767, -32768, 65535, 65536, -65536}) corners.push_back(v);
    for (auto a : corners)
      for (auto b : corners) {
        ++cases;
        if (bits == 16)
          bad += qmac::mul16_composed(static_cast<std::int16_t>(a), static_cast<std::int16_t>(b)) != a * b;
        else
          bad += static_cast<i128>(qmac::mul32_composed(static_cast<std::int32_t>(a), static_cast<std::int32_t>(b))) !=
                 static_cast<i128>(a) * b;
      }
  }
  const double secs = seconds_since(t0);
  o.require(bad == 0, "mismatches");
  o.require(secs <= 60.0, "runtime over 60 s");
  o.detail << cases << " products, " << bad << " mismatches, " << secs << " s";
  return o;
}

// ---- 2 ----
std::int64_t sat(i128 v, int width) { return oracle::clamp_to_width(v, width); }

Outcome simd_lanes() {
  Outcome o;
  std::mt19937_64 gen(2);
  std::uint64_t bad = 0, seqs = 0, dots = 0;
  for (auto p : kAll) {
    const int b = fxp::bits(p), lanes = fxp::lane_count(p);
    const int width = qmac::accumulator_bits(p);
    for (int s = 0; s < 10000; ++s, ++seqs) {
      qmac::AccumulatorBank acc(p);
      std::vector<i128> ref(static_cast<std::size_t>(lanes), 0);
      const int cycles = 1 + static_cast<int>(gen() % 8);
      for (int c = 0; c < cycles; ++c) {
        std::vector<std::int32_t> x(static_cast<std::size_t>(lanes)), y(x.size());
        for (int l = 0; l < lanes; ++l) {
          x[static_cast<std::size_t>(l)] = static_cast<std::int32_t>(full_range(gen, b));
          y[static_cast<std::size_t>(l)] = static_cast<std::int32_t>(full_range(gen, b));
          ref[static_cast<std::size_t>(l)] =
              sat(ref[static_cast<std::size_t>(l)] + static_cast<i128>(x[static_cast<std::size_t>(l)]) *
                                                         y[static_cast<std::size_t>(l)],
                  width);
        }
        acc = qmac::simd_mac(acc, qmac::SimdWord::pack(x, p), qmac::SimdWord::pack(y, p));
      }
      for (int l = 0; l < lanes; ++l) bad += acc[l] != ref[static_cast<std::size_t>(l)];
    }
    // dot: element i streams through lane i % lanes; tails are zero-padded.
    for (int s = 0; s < 10000; ++s, ++dots) {
      const std::size_t n = gen() % 70;
      const int mag = s % 2 == 0 ? b : std::max(2, b / 2);
      std::vector<std::int32_t> x(n), y(n);
      for (std::size_t i = 0; i < n; ++i) {
        x[i] = static_cast<std::int32_t>(full_range(gen, mag));
        y[i] = static_cast<std::int32_t>(full_range(gen, mag));
      }
      std::vector<i128> lane(static_cast<std::size_t>(lanes), 0);
      for (std::size_t i = 0; i < n; ++i) {
        auto& a = lane[i % static_cast<std::size_t>(lanes)];
        a = sat(a + static_cast<i128>(x[i]) * y[i], width);
      }
      i128 total = 0;
      for (auto v : lane) total = sat(total + v, 64);
      qmac::MacCounter counter;
      bad += qmac::dot(x, y, p, qmac::MultiplierKind::Exact, &counter) != total;
      bad += counter.cycles != (n + static_cast<std::size_t>(lanes) - 1) / static_cast<std::size_t>(lanes);
      bad += counter.macs != n;
    }
  }
  o.require(bad == 0, "lane mismatch");
  o.detail << seqs << " packed sequences, " << dots << " dot products, " << bad << " mismatches";
  return o;
}

// ---- 3 ----
std::vector<qnet::Topology> sample_topologies() {
  std::vector<qnet::Topology> nets = {qnet::Topology::defaults(SubgoalVariant::FC),
                                      qnet::Topology::defaults(SubgoalVariant::LSTM)};
  std::mt19937_64 gen(3);
  for (int i = 0; i < 50; ++i) {
    qnet::Topology t;
    t.in_height = 24 + static_cast<int>(gen() % 41);
    t.in_width = 24 + static_cast<int>(gen() % 41);
    t.in_channels = 1 + static_cast<int>(gen() % 4);
    for (auto& c : t.convs) {
      c.out_channels = 1 + static_cast<int>(gen() % 24);
      c.kernel = 1 + static_cast<int>(gen() % 3);
    }
    t.variant = gen() % 2 ? SubgoalVariant::FC : SubgoalVariant::LSTM;
    t.subgoal_dim = 1 + static_cast<int>(gen() % 32);
    t.unroll_k = 1 + static_cast<int>(gen() % 8);
    t.actions = 2 + static_cast<int>(gen() % 6);
    nets.push_back(t);
  }
  return nets;
}

Outcome lane_throughput() {
  Outcome o;
  int checked = 0;
  for (const auto& t : sample_topologies())
    for (int pes = 1; pes <= 8; ++pes) {
      perf::PerfReport r[3];
      for (int i = 0; i < 3; ++i) r[i] = perf::estimate(t, perf::HwConfig{pes, kAll[i], 232.0, 16});
      o.require(r[0].mac_cycles_exact * 4.0 == r[1].mac_cycles_exact, "FxP8:FxP16 pre-ceiling ratio");
      o.require(r[0].mac_cycles_exact * 16.0 == r[2].mac_cycles_exact, "FxP8:FxP32 pre-ceiling ratio");
      const auto layers = static_cast<double>(r[0].layers.size());
      for (const auto& x : r)
        o.require(static_cast<double>(x.mac_cycles) - x.mac_cycles_exact <= layers &&
                      static_cast<double>(x.mac_cycles) >= x.mac_cycles_exact,
                  "ceiling slack");
      ++checked;
    }
  o.detail << checked << " (net, PE) configurations, ratio 1:4:16 before ceiling";
  return o;
}

// ---- 4 ----
Outcome vact_accuracy() {
  Outcome o;
  const double tol[] = {0x1p-6, 0x1p-10, 0x1p-14};
  std::vector<double> xs;
  for (int i = -1024; i <= 1024; ++i) xs.push_back(i / 256.0);
  for (int k = 0; k < 3; ++k) {
    const Precision p = kAll[k];
    const int b = fxp::bits(p);
    const QuantParams in{std::ldexp(1.0, b - 1) / 4.0, b};
    const QuantParams out = fxp::unit_params(b);
    const auto cfg = vact::CordicConfig::for_precision(p);
    const QTensor xq = fxp::quantize(xs, in, {xs.size()});
    std::vector<std::int32_t> neg;
    for (auto c : xq.codes()) neg.push_back(static_cast<std::int32_t>(std::min<std::int64_t>(-std::int64_t{c}, in.max_code())));
    const QTensor nq(neg, in, {neg.size()});
    const QTensor th = vact::tanh_fx(xq, cfg, out), thn = vact::tanh_fx(nq, cfg, out);
    const QTensor sg = vact::sigmoid_fx(xq, cfg, out), sgn = vact::sigmoid_fx(nq, cfg, out);
    double et = 0, es = 0;
    std::int64_t odd = 0, comp = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double x = xq[i] / in.scale;
      et = std::max(et, std::fabs(th[i] / out.scale - std::tanh(x)));
      es = std::max(es, std::fabs(sg[i] / out.scale - oracle::sigmoid(x)));
      // Pairs whose negation is exact (the saturated top code has none).
      if (-std::int64_t{xq[i]} == nq[i]) {
        odd = std::max<std::int64_t>(odd, std::abs(std::int64_t{th[i]} + thn[i]));
        comp = std::max<std::int64_t>(comp, std::abs(std::int64_t{sg[i]} + sgn[i] - static_cast<std::int64_t>(out.scale)));
      }
    }
    o.require(et <= tol[k] && es <= tol[k], fxp::to_string(p) + " accuracy");
    o.require(odd <= 1 && comp <= 1, fxp::to_string(p) + " symmetry");
    o.detail << fxp::to_string(p) << " tanh " << et << " sigmoid " << es << " (bound " << tol[k] << "); ";
  }
  for (int n : {8, 16, 32}) {
    const int want = (3 * n + 7) / 8 + 1;
    o.require(vact::latency_cycles(vact::CordicConfig::make(n)) == want, "latency n=" + std::to_string(n));
    o.detail << "latency(" << n << ")=" << want << " ";
  }
  return o;
}

// ---- 5 ----
Outcome softmax() {
  Outcome o;
  std::mt19937_64 gen(5);
  int eligible = 0, agree = 0;
  for (auto p : kAll) {
    const int b = fxp::bits(p);
    const QuantParams in{std::ldexp(1.0, b - 1) / 16.0, b};
    const QuantParams out = fxp::unit_params(b);
    const auto cfg = vact::CordicConfig::for_precision(p);
    for (int trial = 0; trial < 10000; ++trial) {
      const std::size_t n = 2 + gen() % 15;
      std::vector<std::int32_t> c(n);
      const std::int64_t span = fxp::max_code(b) / 2;
      for (auto& v : c) v = static_cast<std::int32_t>(std::uniform_int_distribution<std::int64_t>(-span, span)(gen));
      const QTensor z(c, in, {n});
      const QTensor pr = vact::softmax_fx(z, cfg, out);
      double sum = 0;
      for (auto v : pr.codes()) sum += v / out.scale;
      o.require(std::fabs(sum - 1.0) <= 1.0 / out.scale, "sum within one code");
      const std::int64_t shift = std::uniform_int_distribution<std::int64_t>(-span / 2, span / 2)(gen);
      std::vector<std::int32_t> cs(c);
      for (auto& v : cs) v = static_cast<std::int32_t>(v + shift);
      o.require(vact::softmax_fx(QTensor(cs, in, {n}), cfg, out).codes() == pr.codes(), "shift invariance");
      if (p != Precision::FxP16) continue;
      std::vector<std::int32_t> sorted(c);
      std::sort(sorted.rbegin(), sorted.rend());
      if (sorted[0] - sorted[1] < 2) continue;
      ++eligible;
      std::vector<double> zf;
      for (auto v : c) zf.push_back(v / in.scale);
      const auto ref = oracle::softmax(zf);
      agree += std::max_element(ref.begin(), ref.end()) - ref.begin() ==
               std::max_element(pr.codes().begin(), pr.codes().end()) - pr.codes().begin();
    }
  }
  const double rate = static_cast<double>(agree) / eligible;
  o.require(rate >= 0.99, "argmax agreement");
  o.detail << "3 x 10^4 vectors; FxP16 argmax agreement " << agree << "/" << eligible << " = " << rate;
  return o;
}

// ---- 6 ----
Outcome layer_oracles() {
  Outcome o;
  std::mt19937_64 gen(6);
  double worst_conv = 0, worst_fc = 0, worst_lstm = 0;
  for (auto p : kAll) {
    const int b = fxp::bits(p);
    for (int trial = 0; trial < 100; ++trial) {
      // conv2d_s2 on a random shape.
      const int k = 1 + static_cast<int>(gen() % 3), c = 1 + static_cast<int>(gen() % 4);
      const int h = k + static_cast<int>(gen() % 10), w = k + static_cast<int>(gen() % 10);
      const int oc = 1 + static_cast<int>(gen() % 6);
      const auto uc = static_cast<std::size_t>(c), uk = static_cast<std::size_t>(k), uoc = static_cast<std::size_t>(oc);
      const QTensor x = operand(normals(gen, static_cast<std::size_t>(h * w * c), 1.0), b,
                                {static_cast<std::size_t>(h), static_cast<std::size_t>(w), uc});
      const QTensor wt = operand(normals(gen, uoc * uc * uk * uk, 0.4), b, {uoc, uc, uk, uk});
      const QTensor bs = bias32(normals(gen, uoc, 0.2));
      const auto ref = oracle::conv_s2(fxp::dequantize(x), h, w, c, fxp::dequantize(wt), fxp::dequantize(bs), oc, k);
      qnet::ConvLayerSpec cs;
      cs.in_channels = c;
      cs.out_channels = oc;
      cs.kernel = k;
      cs.precision = p;
      cs.weight = wt;
      cs.bias = bs;
      cs.out = fxp::calibrate_symmetric(ref, b);
      const auto got = fxp::dequantize(qnet::conv2d_s2(x, cs));
      o.require(got.size() == ref.size(), "conv shape");
      for (std::size_t i = 0; i < std::min(got.size(), ref.size()); ++i)
        worst_conv = std::max(worst_conv, std::fabs(got[i] - ref[i]) * cs.out.scale);

      // fc on a random shape, ReLU.
      const std::size_t in = 1 + gen() % 48, out = 1 + gen() % 24;
      const QTensor fx = operand(normals(gen, in, 1.0), b, {in});
      const QTensor fw = operand(normals(gen, out * in, 0.3), b, {out, in});
      const QTensor fb = bias32(normals(gen, out, 0.2));
      auto fref = oracle::affine(fxp::dequantize(fw), fxp::dequantize(fb), fxp::dequantize(fx));
      for (auto& v : fref) v = std::max(v, 0.0);
      qnet::FcLayerSpec fs;
      fs.in_dim = static_cast<int>(in);
      fs.out_dim = static_cast<int>(out);
      fs.weight = fw;
      fs.bias = fb;
      fs.precision = p;
      fs.out = fs.act_out = fxp::calibrate_symmetric(fref, b);
      const auto fgot = fxp::dequantize(qnet::fc(fx, fs));
      for (std::size_t i = 0; i < out; ++i) worst_fc = std::max(worst_fc, std::fabs(fgot[i] - fref[i]) * fs.out.scale);
    }
  }
  // Five-step FxP16 LSTM on random shapes.
  for (int trial = 0; trial < 100; ++trial) {
    const int in = 1 + static_cast<int>(gen() % 10), hid = 1 + static_cast<int>(gen() % 10);
    const auto ui = static_cast<std::size_t>(in), uh = static_cast<std::size_t>(hid);
    const double sd = 1.0 / std::sqrt(static_cast<double>(in + hid));
    qnet::LstmWeights lw;
    lw.input_dim = in;
    lw.hidden_dim = hid;
    lw.precision = Precision::FxP16;
    oracle::Lstm ref;
    for (int g = 0; g < 4; ++g) {
      lw.w_x[g] = operand(normals(gen, uh * ui, sd), 16, {uh, ui});
      lw.w_h[g] = operand(normals(gen, uh * uh, sd), 16, {uh, uh});
      lw.b[g] = bias32(normals(gen, uh, 0.3));
      lw.gate_in[g] = fxp::calibrate_symmetric(std::vector<double>{8.0}, 16);
      ref.w_x[g] = fxp::dequantize(lw.w_x[g]);
      ref.w_h[g] = fxp::dequantize(lw.w_h[g]);
      ref.b[g] = fxp::dequantize(lw.b[g]);
    }
    lw.cell = fxp::calibrate_symmetric(std::vector<double>{8.0}, 16);
    lw.hidden = fxp::calibrate_operand(std::vector<double>{1.0}, 16);
    auto st = qnet::LstmState::zeros(lw);
    std::vector<double> h(uh, 0.0), c(uh, 0.0);
    for (int t = 0; t < 5; ++t) {
      const QTensor x = operand(normals(gen, ui, 1.0), 16, {ui});
      st = qnet::lstm_step(x, st, lw);
      ref.step(fxp::dequantize(x), h, c);
      const auto got = fxp::dequantize(st.h);
      for (std::size_t j = 0; j < uh; ++j) worst_lstm = std::max(worst_lstm, std::fabs(got[j] - h[j]));
    }
  }
  o.require(worst_conv <= 1.5, "conv bound");
  o.require(worst_fc <= 1.5, "fc bound");
  o.require(worst_lstm <= 0.02, "lstm bound");
  o.detail << "worst conv " << worst_conv << " codes, fc " << worst_fc << " codes (bound 1.5), 5-step LSTM "
           << worst_lstm << " (bound 0.02); ";

  // End-to-end FxP16 argmax against the float graph.
  for (auto v : {SubgoalVariant::FC, SubgoalVariant::LSTM}) {
    int agree = 0, total = 0;
    for (int n = 0; n < 100; ++n) {
      const auto topo = qnet::Topology::defaults(v, Precision::FxP16);
      const auto net = harness::FloatNetwork::random(topo, 6000 + static_cast<std::uint64_t>(n), 0.1);
      std::vector<std::vector<double>> obs;
      harness::GridWorld world;
      for (int i = 0; i < 10; ++i) {
        world.reset(gen());
        for (int s = static_cast<int>(gen() % 6); s > 0; --s) world.step(static_cast<int>(gen() % 4));
        obs.push_back(world.observe());
      }
      harness::ActivationRanges ranges;
      const auto fstate = v == SubgoalVariant::LSTM ? std::optional(net.initial_state()) : std::nullopt;
      for (const auto& x : obs) net.forward(x, fstate, &ranges);
      const auto spec = harness::quantize_policy(net, Precision::FxP16, ranges);
      std::optional<qnet::LstmState> qs;
      if (spec.subgoal_lstm) qs = qnet::LstmState::zeros(*spec.subgoal_lstm);
      for (const auto& x : obs) {
        const auto f = net.forward(x, fstate);
        const auto q = qnet::hrl_forward(qnet::quantize_observation(x, spec), spec, qs);
        agree += qnet::select_action(q.action_probs) ==
                 static_cast<int>(std::max_element(f.probs.begin(), f.probs.end()) - f.probs.begin());
        ++total;
      }
    }
    o.require(agree * 100 >= total * 99, qnet::to_string(v) + " argmax agreement");
    o.detail << qnet::to_string(v) << " argmax " << agree << "/" << total << " ";
  }
  return o;
}

// ---- 7 ----
Outcome reward_retention() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  for (auto v : {SubgoalVariant::FC, SubgoalVariant::LSTM}) {
    std::optional<harness::TrainResult> result;
    try {
      result = harness::train_policy(qnet::Topology::defaults(v), 42);
    } catch (const TrainingFailure& e) {
      o.require(false, qnet::to_string(v) + " training: " + e.what());
      continue;
    }
    const auto& trained = *result;
    const auto rep = harness::retention_study(trained.net, {Precision::FxP8, Precision::FxP16, Precision::FxP32}, 200,
                                              42, 256);
    const auto* fl = rep.find("float");
    o.require(fl != nullptr && fl->mean_reward >= 0.8, qnet::to_string(v) + " float mean >= 0.8");
    o.detail << qnet::to_string(v) << " (" << trained.episodes << " training episodes): float " << fl->mean_reward;
    for (const char* q : {"q8", "q16", "q32"}) {
      const auto* r = rep.find(q);
      const double need = std::string(q) == "q32" ? 0.99 : 0.95;
      o.require(r != nullptr && r->retention >= need, qnet::to_string(v) + " " + q + " retention");
      o.detail << ", " << q << " " << r->retention;
    }
    o.detail << ", q8 vs q32 wall-clock speedup " << rep.q8_speedup_vs_q32 << "x; ";
  }
  const double secs = seconds_since(t0);
  o.require(secs <= 600.0, "runtime over 10 minutes");
  o.detail << secs << " s";
  return o;
}

// ---- 8 ----
Outcome perf_coherence() {
  Outcome o;
  for (auto v : {SubgoalVariant::FC, SubgoalVariant::LSTM})
    for (auto p : kAll)
      for (auto kind : {qmac::MultiplierKind::Exact, qmac::MultiplierKind::MitchellLog}) {
        const auto topo = qnet::Topology::defaults(v, p);
        const auto net = harness::FloatNetwork::random(topo, 8, 0.1);
        harness::ActivationRanges ranges;
        const auto fstate = v == SubgoalVariant::LSTM ? std::optional(net.initial_state()) : std::nullopt;
        harness::GridWorld world;
        net.forward(world.observe(), fstate, &ranges);
        const auto spec = harness::quantize_policy(net, p, ranges, kind);
        std::optional<qnet::LstmState> qs;
        if (spec.subgoal_lstm) qs = qnet::LstmState::zeros(*spec.subgoal_lstm);
        qnet::ForwardTrace trace;
        qnet::hrl_forward(qnet::quantize_observation(world.observe(), spec), spec, qs, &trace);
        const auto r = perf::estimate(spec, perf::HwConfig{1, p, 232.0, 16});
        std::uint64_t runtime = 0;
        for (const auto& l : trace.layers) runtime += l.mac_ops;
        o.require(runtime == r.mac_ops, "MAC count " + qnet::to_string(v) + " " + fxp::to_string(p));
        for (const auto& l : r.layers)
          o.require(trace.layer(l.name).mac_ops == l.mac_ops, "layer MAC count " + l.name);
      }
  const int pes[] = {1, 2, 3, 4, 5, 6, 7, 8};
  double fc_fps = 0, lstm_fps = 0;
  for (auto v : {SubgoalVariant::FC, SubgoalVariant::LSTM}) {
    const auto rows = perf::sweep(qnet::Topology::defaults(v), pes, kAll);
    for (std::size_t i = 3; i < rows.size(); ++i) o.require(rows[i].fps >= rows[i - 3].fps, "FPS monotone in PEs");
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto other = perf::estimate(
          qnet::Topology::defaults(v == SubgoalVariant::FC ? SubgoalVariant::LSTM : SubgoalVariant::FC), rows[i].hw);
      if (v == SubgoalVariant::FC) o.require(rows[i].fps > other.fps, "FC FPS above LSTM FPS");
    }
    (v == SubgoalVariant::FC ? fc_fps : lstm_fps) = rows[3].fps;  // 2 PEs, FxP8
  }
  o.detail << "runtime MAC counters equal the model on 12 nets; FPS at 2 PEs FxP8: fc " << fc_fps << ", lstm "
           << lstm_fps;
  return o;
}

// ---- 9 ----
class Scratch {
 public:
  Scratch() : dir_(fs::temp_directory_path() / ("qforce_accept_" + std::to_string(::getpid()))) {
    fs::create_directories(dir_);
  }
  ~Scratch() { fs::remove_all(dir_); }
  std::string operator()(const std::string& name) const { return (dir_ / name).string(); }

 private:
  fs::path dir_;
};

int qfrl(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + QFRL_PATH + " " + args + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism_and_formats() {
  Outcome o;
  Scratch tmp;
  int compared = 0;
  auto same_files = [&](const std::string& a, const std::string& b, const std::string& what) {
    const auto x = golden::read_file(a), y = golden::read_file(b);
    o.require(!x.empty() && x == y, what);
    ++compared;
  };
  const std::string t1 = "QFRL_THREADS=1", t4 = "QFRL_THREADS=4";
  o.require(qfrl("train --variant fc --seed 42 --out " + tmp("f1.json"), t1) == 0, "train run 1");
  o.require(qfrl("train --variant fc --seed 42 --out " + tmp("f2.json"), t4) == 0, "train run 2");
  same_files(tmp("f1.json"), tmp("f2.json"), "train output");
  for (const char* p : {"8", "16", "32"}) {
    const std::string q = std::string("quantize --seed 3 --precision ") + p + " --weights " + tmp("f1.json");
    o.require(qfrl(q + " --out " + tmp("a.qfrl"), t1) == 0 && qfrl(q + " --out " + tmp("b.qfrl"), t4) == 0, "quantize");
    same_files(tmp("a.qfrl"), tmp("b.qfrl"), "quantize output");
    for (const char* fmt : {"csv", "json"}) {
      const std::string i = std::string("infer --env-seed 11 --format ") + fmt + " --weights ";
      o.require(qfrl(i + tmp("a.qfrl") + " --out " + tmp("i1")) == 0 && qfrl(i + tmp("b.qfrl") + " --out " + tmp("i2")) == 0,
                "infer");
      same_files(tmp("i1"), tmp("i2"), "infer output");
    }
  }
  const std::string r = "rollout --precision 8,16,32 --episodes 40 --seed 9 --weights " + tmp("f1.json");
  o.require(qfrl(r + " --out " + tmp("r1.csv"), t1) == 0 && qfrl(r + " --out " + tmp("r2.csv"), t4) == 0, "rollout");
  same_files(tmp("r1.csv"), tmp("r2.csv"), "rollout output");
  for (const char* fmt : {"csv", "json"}) {
    const std::string b = std::string("bench --pes 1..8 --precision 8,16,32 --format ") + fmt;
    o.require(qfrl(b + " --out " + tmp("b1"), t1) == 0 && qfrl(b + " --out " + tmp("b2"), t4) == 0, "bench");
    same_files(tmp("b1"), tmp("b2"), "bench output");
  }
  o.require(qfrl("vact-dump --precision 8,16,32 --out " + tmp("v1")) == 0 &&
                qfrl("vact-dump --precision 8,16,32 --out " + tmp("v2")) == 0,
            "vact-dump");
  same_files(tmp("v1"), tmp("v2"), "vact-dump output");

  // WeightFile round trip, bit-exact including scales.
  int files = 0;
  for (auto v : {SubgoalVariant::FC, SubgoalVariant::LSTM})
    for (auto p : kAll) {
      const auto net = harness::FloatNetwork::random(qnet::Topology::defaults(v), 90 + files, 0.1);
      const auto spec = harness::quantize_policy(net, p, harness::collect_calibration(net, 256, 91).ranges);
      const auto wf = harness::to_weight_file(spec);
      const auto path = tmp("w" + std::to_string(files++) + ".qfrl");
      harness::save_weights(path, wf);
      const auto back = harness::load_weights(path);
      o.require(back == wf, "weight file round trip");
      o.require(harness::encode(harness::to_weight_file(harness::to_network_spec(back))) == harness::encode(wf),
                "spec round trip");
    }

  const auto pinned = golden::read_file(std::string(QFORCE_GOLDEN_DIR) + "/action_probs.txt");
  o.require(!pinned.empty() && pinned == golden::action_prob_codes(), "golden action probabilities");
  o.detail << compared << " repeated CLI outputs byte-identical across runs and QFRL_THREADS=1/4; " << files
           << " weight files round-trip; golden probabilities match";
  return o;
}

// ---- 10 ----
Outcome approximate_multiplier() {
  Outcome o;
  double worst = 0;
  for (int a = -128; a < 128; ++a)
    for (int b = -128; b < 128; ++b) {
      if (a == 0 || b == 0) continue;
      const double exact = static_cast<double>(a) * b;
      const double approx =
          qmac::mul8(static_cast<std::int8_t>(a), static_cast<std::int8_t>(b), qmac::MultiplierKind::MitchellLog);
      worst = std::max(worst, std::fabs(approx - exact) / std::fabs(exact));
    }
  // QoR = 1 - mean relative error of dot products over nonzero FxP8 vectors.
  // Same-sign operands keep |exact| away from cancellation; the mixed-sign
  // figure is printed for reference.
  auto qor = [](bool same_sign) {
    std::mt19937_64 gen(10);
    std::uniform_int_distribution<int> d(same_sign ? 1 : -127, 127);
    double sum = 0;
    int counted = 0;
    for (int t = 0; t < 1000; ++t) {
      std::vector<std::int32_t> a(64), b(64);
      for (std::size_t i = 0; i < a.size(); ++i) {
        do a[i] = d(gen); while (a[i] == 0);
        do b[i] = d(gen); while (b[i] == 0);
      }
      i128 exact = 0;
      for (std::size_t i = 0; i < a.size(); ++i) exact += i128{a[i]} * b[i];
      if (exact == 0) continue;
      const auto approx = qmac::dot(a, b, Precision::FxP8, qmac::MultiplierKind::MitchellLog);
      sum += std::fabs(static_cast<double>(approx) - static_cast<double>(exact)) / std::fabs(static_cast<double>(exact));
      ++counted;
    }
    return 1.0 - sum / counted;
  };
  const double q = qor(true);
  o.require(worst <= 0.112, "mul8 worst-case relative error");
  o.require(q >= 0.96, "dot QoR");
  o.detail << "mul8 worst relative error " << worst << " (bound 0.112); dot QoR " << q
           << " (reference range 0.984-0.992; mixed-sign vectors " << qor(false) << ")";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  // Optional arguments pick criteria by number; default runs all of them.
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {"Q-MAC exactness", qmac_exactness},
      {"SIMD lane semantics", simd_lanes},
      {"Lane-throughput law", lane_throughput},
      {"V-ACT accuracy", vact_accuracy},
      {"Softmax", softmax},
      {"Layer oracle equivalence", layer_oracles},
      {"Reward retention", reward_retention},
      {"Perf-model coherence", perf_coherence},
      {"Determinism and formats", determinism_and_formats},
      {"Approximate multiplier", approximate_multiplier},
  };
  int failed = 0;
  int index = 0;
  for (const auto& c : criteria) {
    ++index;
    if (!only.empty() && std::find(only.begin(), only.end(), index) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    failed += !o.pass;
    std::printf("%s %2d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", index, c.name, o.detail.str().c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
