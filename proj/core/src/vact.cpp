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

#include "qforce/vact.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include "qforce/error.hpp"

namespace qforce::vact {

namespace {

std::int32_t to_working(double v) {
  return static_cast<std::int32_t>(fxp::round_half_even(std::ldexp(v, kFracBits)));
}

double from_working(std::int64_t v) { return std::ldexp(static_cast<double>(v), -kFracBits); }

// Magnitude code of a bounded output: q (Q.25, in [0, 1]) scaled to `out`,
// clamped to the positive limit so that negation stays representable.
std::int64_t magnitude_code(std::int64_t q_working, const QuantParams& out) {
  const double v = std::ldexp(static_cast<double>(q_working) * out.scale, -kFracBits);
  return fxp::saturate_round(v, 0, out.max_code());
}

// |tanh(theta)| in Q.25 for a non-negative working-format angle.
std::int32_t tanh_magnitude(std::int32_t theta, const CordicConfig& cfg) {
  if (theta == 0) return 0;
  const CordicState s = hyperbolic_rotate(theta, cfg);
  return linear_divide(s.y, s.x);
}

}  // namespace

CordicConfig CordicConfig::make(int n) {
  QFORCE_REQUIRE(n >= 8, "CORDIC needs at least 8 iterations");
  CordicConfig cfg;
  cfg.iterations = n;
  cfg.pre_shifts = {5, 2};
  int next_repeat = 4;
  for (int k = 1; static_cast<int>(cfg.schedule.size()) < n; ++k) {
    cfg.schedule.push_back(k);
    if (k == next_repeat && static_cast<int>(cfg.schedule.size()) < n) {
      cfg.schedule.push_back(k);
      next_repeat = 3 * next_repeat + 1;
    }
  }
  for (int s : cfg.pre_shifts) cfg.pre_angles.push_back(to_working(std::atanh(1.0 - std::ldexp(1.0, -s))));
  for (int k : cfg.schedule) cfg.angles.push_back(to_working(std::atanh(std::ldexp(1.0, -k))));
  cfg.gain = cfg.recompute_gain();
  return cfg;
}

CordicConfig CordicConfig::for_precision(Precision p) {
  return make(p == Precision::FxP32 ? 32 : 16);
}

double CordicConfig::recompute_gain() const {
  double k = 1.0;
  for (int s : pre_shifts) {
    const double t = 1.0 - std::ldexp(1.0, -s);
    k *= std::sqrt(1.0 - t * t);
  }
  for (int i : schedule) k *= std::sqrt(1.0 - std::ldexp(1.0, -2 * i));
  return k;
}

CordicState hyperbolic_rotate(std::int32_t theta, const CordicConfig& cfg) {
  QFORCE_REQUIRE(cfg.angles.size() == cfg.schedule.size() &&
                     cfg.pre_angles.size() == cfg.pre_shifts.size(),
                 "CordicConfig angle tables are stale; build it with CordicConfig::make");
  CordicState s{to_working(1.0 / cfg.gain), 0, theta};
  for (std::size_t j = 0; j < cfg.pre_shifts.size(); ++j) {
    const int sh = cfg.pre_shifts[j];
    const std::int32_t xs = s.x - (s.x >> sh);
    const std::int32_t ys = s.y - (s.y >> sh);
    if (s.z >= 0) {
      s.x += ys;
      s.y += xs;
      s.z -= cfg.pre_angles[j];
    } else {
      s.x -= ys;
      s.y -= xs;
      s.z += cfg.pre_angles[j];
    }
  }
  for (std::size_t j = 0; j < cfg.schedule.size(); ++j) {
    const int k = cfg.schedule[j];
    const std::int32_t xs = s.x >> k;
    const std::int32_t ys = s.y >> k;
    if (s.z >= 0) {
      s.x += ys;
      s.y += xs;
      s.z -= cfg.angles[j];
    } else {
      s.x -= ys;
      s.y -= xs;
      s.z += cfg.angles[j];
    }
  }
  return s;
}

std::int32_t linear_divide(std::int64_t num, std::int64_t den) {
  QFORCE_REQUIRE(den > 0 && num >= 0 && num <= den, "linear_divide expects 0 <= num <= den");
  if (num == 0) return 0;
  // Normalize so that den >> i keeps enough bits through every iteration.
  while (den < (std::int64_t{1} << 40)) {
    num <<= 1;
    den <<= 1;
  }
  std::int64_t y = num;
  std::int64_t q = 0;
  for (int i = 0; i <= kFracBits; ++i) {
    if (y >= 0) {
      y -= den >> i;
      q += kOne >> i;
    } else {
      y += den >> i;
      q -= kOne >> i;
    }
  }
  return static_cast<std::int32_t>(std::clamp<std::int64_t>(q, 0, kOne));
}

SinhCosh cordic_hyperbolic(double theta, const CordicConfig& cfg) {
  QFORCE_REQUIRE(std::isfinite(theta) && std::fabs(theta) <= kMaxTheta,
                 "cordic_hyperbolic: |theta| must be <= 4 (clamp first)");
  const CordicState s = hyperbolic_rotate(to_working(std::fabs(theta)), cfg);
  const double sh = from_working(s.y);
  return {theta < 0 ? -sh : sh, from_working(s.x)};
}

QTensor relu_fx(const QTensor& x) {
  std::vector<std::int32_t> codes = x.codes();
  for (auto& c : codes) c = std::max(c, 0);
  return QTensor(std::move(codes), x.params(), x.shape());
}

QTensor tanh_fx(const QTensor& x, const CordicConfig& cfg, const QuantParams& out) {
  out.validate();
  std::vector<std::int32_t> codes(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double v = std::min(std::fabs(fxp::dequantize_code(x[i], x.params())), kMaxTheta);
    const auto mag = magnitude_code(tanh_magnitude(to_working(v), cfg), out);
    codes[i] = static_cast<std::int32_t>(x[i] < 0 ? -mag : mag);
  }
  return QTensor(std::move(codes), out, x.shape());
}

QTensor sigmoid_fx(const QTensor& x, const CordicConfig& cfg, const QuantParams& out) {
  out.validate();
  std::vector<std::int32_t> codes(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double half = std::min(std::fabs(fxp::dequantize_code(x[i], x.params())), 2 * kMaxTheta) / 2;
    const std::int64_t t = tanh_magnitude(to_working(half), cfg);
    // 1/2 + t/2 in units of 2^-(F+1).
    const std::int64_t twice = x[i] < 0 ? kOne - t : kOne + t;
    const double v = std::ldexp(static_cast<double>(twice) * out.scale, -(kFracBits + 1));
    codes[i] = static_cast<std::int32_t>(fxp::saturate_round(v, out.min_code(), out.max_code()));
  }
  return QTensor(std::move(codes), out, x.shape());
}

std::int32_t exp_working(double x, const CordicConfig& cfg) {
  QFORCE_REQUIRE(std::isfinite(x) && x <= 0.0, "exp_fx: argument must be finite and <= 0");
  // Below -8 the argument is lifted by k*ln2 and the result shifted right by
  // k, so the rotation input stays inside [-8, -8 + ln2].
  int k = 0;
  if (x < -2 * kMaxTheta) {
    k = static_cast<int>(std::ceil((-2 * kMaxTheta - x) / std::numbers::ln2));
    if (k > kFracBits) return 0;
    x = std::max(x + k * std::numbers::ln2, -2 * kMaxTheta);
  }
  // e^x = (e^(x/2))^2 keeps each rotation inside the convergence range.
  const CordicState s = hyperbolic_rotate(to_working(-x / 2), cfg);
  const std::int64_t half = static_cast<std::int64_t>(s.x) - s.y;  // cosh - sinh of |x/2|
  const std::int64_t sq = half * half;
  const int shift = kFracBits + k;
  const std::int64_t rounded = (sq + (std::int64_t{1} << (shift - 1))) >> shift;
  return static_cast<std::int32_t>(std::clamp<std::int64_t>(rounded, 0, kOne));
}

double exp_fx(double x, const CordicConfig& cfg) { return from_working(exp_working(x, cfg)); }

QTensor softmax_fx(const QTensor& logits, const CordicConfig& cfg, const QuantParams& out,
                   SoftmaxTrace* trace) {
  QFORCE_REQUIRE(logits.size() >= 1, "softmax of an empty tensor");
  out.validate();
  const std::size_t k = logits.size();
  const std::int64_t top = *std::max_element(logits.codes().begin(), logits.codes().end());

  // Exponent stage feeds the divider through a FIFO; the sum is formed in
  // index order as entries are enqueued.
  std::queue<std::int32_t> fifo;
  std::int64_t sum = 0;
  std::size_t depth = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double d = static_cast<double>(logits[i] - top) / logits.params().scale;
    const std::int32_t e = exp_working(d, cfg);
    fifo.push(e);
    sum += e;
    depth = std::max(depth, fifo.size());
  }

  std::vector<std::int32_t> codes(k);
  std::vector<double> remainder(k);
  for (std::size_t i = 0; i < k; ++i) {
    const std::int32_t q = linear_divide(fifo.front(), sum);
    fifo.pop();
    const double v = std::ldexp(static_cast<double>(q) * out.scale, -kFracBits);
    codes[i] = static_cast<std::int32_t>(fxp::saturate_round(v, 0, out.max_code()));
    remainder[i] = v - codes[i];
  }

  // Largest-remainder renormalization towards sum(codes) == round(scale).
  const auto target = fxp::saturate_round(out.scale, 0, std::numeric_limits<std::int64_t>::max());
  std::int64_t diff = target - std::accumulate(codes.begin(), codes.end(), std::int64_t{0});
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (diff > 0) {
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  } else {
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] < remainder[b]; });
  }
  bool progressed = true;
  while (diff != 0 && progressed) {
    progressed = false;
    for (std::size_t i : order) {
      if (diff == 0) break;
      // Entries whose exponential underflowed stay at zero.
      if (diff > 0 && codes[i] < out.max_code() && (codes[i] > 0 || remainder[i] > 0)) {
        ++codes[i];
        --diff;
        progressed = true;
      } else if (diff < 0 && codes[i] > 0) {
        --codes[i];
        ++diff;
        progressed = true;
      }
    }
  }

  if (trace) {
    trace->exp_ops += k;
    trace->div_ops += k;
    trace->max_fifo_depth = std::max(trace->max_fifo_depth, depth);
  }
  return QTensor(std::move(codes), out, logits.shape());
}

int latency_cycles(const CordicConfig& cfg) { return (3 * cfg.iterations + 7) / 8 + 1; }

QTensor activate(ActKind kind, const QTensor& x, const CordicConfig& cfg, const QuantParams& out) {
  switch (kind) {
    case ActKind::ReLU: return relu_fx(fxp::requantize_tensor(x, out));
    case ActKind::Sigmoid: return sigmoid_fx(x, cfg, out);
    case ActKind::Tanh: return tanh_fx(x, cfg, out);
    case ActKind::Softmax: return softmax_fx(x, cfg, out);
  }
  return x;
}

}  // namespace qforce::vact
