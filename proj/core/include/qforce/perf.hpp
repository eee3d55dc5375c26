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

// Analytic, compute-bound cycle model of the accelerator. A layer's MACs are
// spread over lane_count(precision) lanes on each of num_pes Q-MACs; its
// activations go through one pipelined V-ACT per PE, paying the CORDIC fill
// latency once per layer. Memory traffic is not modelled.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qforce/fxp.hpp"
#include "qforce/qnet.hpp"

namespace qforce::perf {

using fxp::Precision;

struct HwConfig {
  int num_pes = 1;  // 1..8
  Precision precision = Precision::FxP16;
  double freq_mhz = 232.0;
  int cordic_n = 16;

  void validate() const;
};

struct OpCount {
  std::uint64_t mac_ops = 0;
  std::uint64_t af_ops = 0;
};

// conv: out_h*out_w*out_c*(k*k*in_c) MACs, one ReLU per output.
// fc: out*in MACs, one activation per output.
// lstm: per step 4*hidden*(input+hidden) MACs and 8*hidden activation or
// elementwise ops (3 sigmoid, 2 tanh, 3 products per unit); times steps.
OpCount layer_ops(const qnet::LayerDesc& layer);

struct LayerPerf {
  std::string name;
  std::uint64_t mac_ops = 0;
  std::uint64_t af_ops = 0;
  double mac_cycles_exact = 0.0;  // mac_ops / (lanes * pes), before ceiling
  std::uint64_t mac_cycles = 0;
  std::uint64_t af_cycles = 0;
};

struct PerfReport {
  HwConfig hw;
  std::string variant;
  std::vector<LayerPerf> layers;
  std::uint64_t mac_ops = 0;
  std::uint64_t af_ops = 0;
  double mac_cycles_exact = 0.0;
  std::uint64_t mac_cycles = 0;
  std::uint64_t af_cycles = 0;
  std::uint64_t total_cycles = 0;
  double fps = 0.0;
  double gops = 0.0;  // 2 ops per MAC
  bool compute_bound = true;
};

PerfReport estimate(const qnet::Topology& net, const HwConfig& hw);
PerfReport estimate(const qnet::NetworkSpec& net, const HwConfig& hw);

// One report per (pes, precision) pair, pes-major. CORDIC iterations follow
// the per-precision default (16, or 32 for FxP32).
std::vector<PerfReport> sweep(const qnet::Topology& net, std::span<const int> pe_range,
                              std::span<const Precision> precisions, double freq_mhz = 232.0);

}  // namespace qforce::perf
