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

// Reference models used by the tests. Nothing here calls into the code under
// test except for plain data accessors (codes, scales, shapes).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

using i128 = __int128;

inline std::int64_t clamp_to_width(i128 v, int bits) {
  const i128 hi = (i128{1} << (bits - 1)) - 1;
  const i128 lo = -(i128{1} << (bits - 1));
  return static_cast<std::int64_t>(std::clamp(v, lo, hi));
}

// Nearest integer, ties to even, written independently of the library.
inline double nearest_even(double v) { return std::nearbyint(v); }

inline std::int64_t quantize(double v, double scale, int bits) {
  const double r = nearest_even(v * scale);
  const double hi = std::ldexp(1.0, bits - 1) - 1;
  const double lo = -std::ldexp(1.0, bits - 1);
  return static_cast<std::int64_t>(std::clamp(r, lo, hi));
}

// Mitchell's approximation from floating-point logs: with L = log2 a + log2 b
// using log2(2^k (1 + f)) ~ k + f, the product is 2^floor(L) (1 + frac(L)).
inline std::int64_t mitchell(std::int64_t a, std::int64_t b) {
  if (a == 0 || b == 0) return 0;
  const bool neg = (a < 0) != (b < 0);
  auto approx_log = [](double m) {
    const int k = std::ilogb(m);
    return k + (m / std::ldexp(1.0, k) - 1.0);
  };
  const double l = approx_log(std::fabs(static_cast<double>(a))) + approx_log(std::fabs(static_cast<double>(b)));
  const double fl = std::floor(l);
  const auto mag = static_cast<std::int64_t>(std::ldexp(1.0 + (l - fl), static_cast<int>(fl)));
  return neg ? -mag : mag;
}

// Valid stride-2 convolution on doubles. x: HWC, w: [o][c][ky][kx].
inline std::vector<double> conv_s2(const std::vector<double>& x, int h, int w, int c, const std::vector<double>& wt,
                                   const std::vector<double>& bias, int oc, int k) {
  const int oh = (h - k) / 2 + 1, ow = (w - k) / 2 + 1;
  std::vector<double> y(static_cast<std::size_t>(oh * ow * oc));
  for (int oy = 0; oy < oh; ++oy)
    for (int ox = 0; ox < ow; ++ox)
      for (int o = 0; o < oc; ++o) {
        double s = bias[static_cast<std::size_t>(o)];
        for (int ky = 0; ky < k; ++ky)
          for (int kx = 0; kx < k; ++kx)
            for (int ci = 0; ci < c; ++ci)
              s += x[static_cast<std::size_t>(((2 * oy + ky) * w + 2 * ox + kx) * c + ci)] *
                   wt[static_cast<std::size_t>(((o * c + ci) * k + ky) * k + kx)];
        y[static_cast<std::size_t>((oy * ow + ox) * oc + o)] = std::max(s, 0.0);
      }
  return y;
}

inline std::vector<double> affine(const std::vector<double>& w, const std::vector<double>& b,
                                  const std::vector<double>& x) {
  std::vector<double> y(b);
  for (std::size_t o = 0; o < b.size(); ++o)
    for (std::size_t i = 0; i < x.size(); ++i) y[o] += w[o * x.size() + i] * x[i];
  return y;
}

inline double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

inline std::vector<double> softmax(const std::vector<double>& z) {
  const double m = *std::max_element(z.begin(), z.end());
  std::vector<double> p(z.size());
  double s = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) s += p[i] = std::exp(z[i] - m);
  for (auto& v : p) v /= s;
  return p;
}

struct Lstm {
  // Gate order i, f, o, g. w_x[g]: hid x in, w_h[g]: hid x hid.
  std::vector<double> w_x[4], w_h[4], b[4];

  void step(const std::vector<double>& x, std::vector<double>& h, std::vector<double>& c) const {
    const std::size_t hid = h.size();
    std::vector<double> pre[4];
    for (int g = 0; g < 4; ++g) {
      pre[g] = affine(w_x[g], b[g], x);
      for (std::size_t j = 0; j < hid; ++j)
        for (std::size_t i = 0; i < hid; ++i) pre[g][j] += w_h[g][j * hid + i] * h[i];
    }
    for (std::size_t j = 0; j < hid; ++j) {
      const double ig = sigmoid(pre[0][j]), fg = sigmoid(pre[1][j]), og = sigmoid(pre[2][j]);
      const double gg = std::tanh(pre[3][j]);
      c[j] = fg * c[j] + ig * gg;
      h[j] = og * std::tanh(c[j]);
    }
  }
};

}  // namespace oracle
