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

#include "qforce/perf.hpp"

#include "qforce/error.hpp"
#include "qforce/vact.hpp"

namespace qforce::perf {

void HwConfig::validate() const {
  QFORCE_REQUIRE(num_pes >= 1 && num_pes <= 8, "num_pes must be in [1, 8]");
  QFORCE_REQUIRE(freq_mhz > 0.0, "frequency must be positive");
  QFORCE_REQUIRE(cordic_n >= 8, "CORDIC iteration count must be >= 8");
}

OpCount layer_ops(const qnet::LayerDesc& l) {
  using qnet::LayerKind;
  const auto u = [](int v) { return static_cast<std::uint64_t>(v); };
  switch (l.kind) {
    case LayerKind::Conv: {
      const std::uint64_t outputs = u(l.out_h) * u(l.out_w) * u(l.out_c);
      return {outputs * u(l.kernel) * u(l.kernel) * u(l.in_c), outputs};
    }
    case LayerKind::FC:
      return {u(l.out_dim) * u(l.in_dim), u(l.out_dim)};
    case LayerKind::LSTM:
      return {u(l.steps) * 4 * u(l.out_dim) * (u(l.in_dim) + u(l.out_dim)), u(l.steps) * 8 * u(l.out_dim)};
  }
  return {};
}

PerfReport estimate(const qnet::Topology& net, const HwConfig& hw) {
  hw.validate();
  PerfReport r;
  r.hw = hw;
  r.variant = qnet::to_string(net.variant);
  const std::uint64_t lanes = static_cast<std::uint64_t>(fxp::lane_count(hw.precision));
  const std::uint64_t pes = static_cast<std::uint64_t>(hw.num_pes);
  const auto fill = static_cast<std::uint64_t>(vact::latency_cycles(vact::CordicConfig::make(hw.cordic_n)));
  for (const auto& layer : net.layers()) {
    const OpCount ops = layer_ops(layer);
    LayerPerf p;
    p.name = layer.name;
    p.mac_ops = ops.mac_ops;
    p.af_ops = ops.af_ops;
    p.mac_cycles_exact = static_cast<double>(ops.mac_ops) / static_cast<double>(lanes * pes);
    p.mac_cycles = (ops.mac_ops + lanes * pes - 1) / (lanes * pes);
    p.af_cycles = ops.af_ops == 0 ? 0 : (ops.af_ops + pes - 1) / pes + fill;
    r.mac_ops += p.mac_ops;
    r.af_ops += p.af_ops;
    r.mac_cycles_exact += p.mac_cycles_exact;
    r.mac_cycles += p.mac_cycles;
    r.af_cycles += p.af_cycles;
    r.layers.push_back(std::move(p));
  }
  r.total_cycles = r.mac_cycles + r.af_cycles;
  r.fps = r.total_cycles == 0 ? 0.0 : hw.freq_mhz * 1e6 / static_cast<double>(r.total_cycles);
  r.gops = 2.0 * static_cast<double>(r.mac_ops) * r.fps / 1e9;
  return r;
}

PerfReport estimate(const qnet::NetworkSpec& net, const HwConfig& hw) { return estimate(net.topology, hw); }

std::vector<PerfReport> sweep(const qnet::Topology& net, std::span<const int> pe_range,
                              std::span<const Precision> precisions, double freq_mhz) {
  std::vector<PerfReport> rows;
  rows.reserve(pe_range.size() * precisions.size());
  for (int pes : pe_range) {
    for (Precision p : precisions) {
      HwConfig hw{pes, p, freq_mhz, vact::CordicConfig::for_precision(p).iterations};
      rows.push_back(estimate(net, hw));
    }
  }
  return rows;
}

}  // namespace qforce::perf
