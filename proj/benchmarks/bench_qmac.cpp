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

#include "qforce/harness/rng.hpp"
#include "qforce/qmac.hpp"

namespace {

using qforce::fxp::Precision;
using qforce::qmac::MultiplierKind;

std::vector<std::int32_t> random_codes(std::size_t n, int bits, std::uint64_t seed) {
  qforce::harness::Rng rng(seed);
  std::vector<std::int32_t> v(n);
  for (auto& x : v)
    x = static_cast<std::int32_t>(static_cast<std::int64_t>(rng.below(std::uint64_t{1} << bits)) -
                                  (std::int64_t{1} << (bits - 1)));
  return v;
}

void BM_Dot(benchmark::State& state) {
  const auto p = static_cast<Precision>(state.range(0));
  const auto kind = static_cast<MultiplierKind>(state.range(1));
  const int bits = qforce::fxp::bits(p);
  const auto a = random_codes(1024, bits, 1);
  const auto b = random_codes(1024, bits, 2);
  for (auto _ : state) benchmark::DoNotOptimize(qforce::qmac::dot(a, b, p, kind));
  state.SetItemsProcessed(state.iterations() * 1024);
  state.SetLabel(qforce::fxp::to_string(p));
}
BENCHMARK(BM_Dot)->ArgsProduct({{0, 1, 2}, {0, 1}});

void BM_Mul32Composed(benchmark::State& state) {
  const auto a = random_codes(256, 32, 3);
  const auto b = random_codes(256, 32, 4);
  for (auto _ : state)
    for (std::size_t i = 0; i < a.size(); ++i) benchmark::DoNotOptimize(qforce::qmac::mul32_composed(a[i], b[i]));
  state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(BM_Mul32Composed);

}  // namespace
