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

#include <benchmark/benchmark.h>

#include <vector>

#include "qforce/vact.hpp"

namespace {

using qforce::fxp::Precision;

void BM_Tanh(benchmark::State& state) {
  const auto p = static_cast<Precision>(state.range(0));
  const int bits = qforce::fxp::bits(p);
  const auto cfg = qforce::vact::CordicConfig::for_precision(p);
  std::vector<double> xs(256);
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = -4.0 + 8.0 * static_cast<double>(i) / 256.0;
  const double range[2] = {-4.0, 4.0};
  const auto x = qforce::fxp::quantize(xs, qforce::fxp::calibrate(range, bits), {xs.size()});
  const auto unit = qforce::fxp::unit_params(bits);
  for (auto _ : state) benchmark::DoNotOptimize(qforce::vact::tanh_fx(x, cfg, unit));
  state.SetItemsProcessed(state.iterations() * 256);
  state.SetLabel(qforce::fxp::to_string(p));
}
BENCHMARK(BM_Tanh)->DenseRange(0, 2);

void BM_Softmax4(benchmark::State& state) {
  const auto cfg = qforce::vact::CordicConfig::for_precision(Precision::FxP16);
  const qforce::fxp::QuantParams in{4096.0, 16};
  const qforce::fxp::QTensor logits({1200, -3000, 450, 8000}, in, {4});
  const auto unit = qforce::fxp::unit_params(16);
  for (auto _ : state) benchmark::DoNotOptimize(qforce::vact::softmax_fx(logits, cfg, unit));
}
BENCHMARK(BM_Softmax4);

}  // namespace
