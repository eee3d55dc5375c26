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

// Binary weight container. Layout, all integers little-endian:
//
//   "QFRL"  u16 version  u32 count
//   count x { u16 name_len, name bytes, u8 bits, f64 scale (IEEE-754 bits),
//             u8 ndims, u32 dims[ndims], codes packed at `bits` width }
//
// Tensors with a zero dimension carry only a format (activation scales).

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "qforce/fxp.hpp"
#include "qforce/qnet.hpp"

namespace qforce::harness {

inline constexpr std::uint16_t kWeightFileVersion = 1;

struct NamedTensor {
  std::string name;
  fxp::QTensor tensor;
  friend bool operator==(const NamedTensor&, const NamedTensor&) = default;
};

struct WeightFile {
  std::vector<NamedTensor> tensors;

  const fxp::QTensor& at(const std::string& name) const;
  bool contains(const std::string& name) const;
  friend bool operator==(const WeightFile&, const WeightFile&) = default;
};

std::vector<std::uint8_t> encode(const WeightFile& w);
// Throws IoError on truncated or malformed bytes.
WeightFile decode(const std::vector<std::uint8_t>& bytes);

void save_weights(const std::filesystem::path& path, const WeightFile& w);
WeightFile load_weights(const std::filesystem::path& path);

// The topology travels as its text form in the int8 tensor "meta.topology".
WeightFile to_weight_file(const qnet::NetworkSpec& net);
qnet::NetworkSpec to_network_spec(const WeightFile& w);

}  // namespace qforce::harness
