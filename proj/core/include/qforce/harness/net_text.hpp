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

// Plain-text network description, one layer per line:
//
//   input height=32 width=32 channels=3
//   conv out=8 kernel=3 precision=16
//   conv out=16 kernel=3 precision=16
//   conv out=16 kernel=3 precision=16
//   embed out=32 precision=16
//   subgoal variant=lstm hidden=16 unroll=4 precision=16
//   action out=4 precision=16
//
// The FC sub-goal form is `subgoal variant=fc out=16 precision=16`. Blank
// lines and text after '#' are ignored. Exactly three conv lines are
// required; omitted keys keep their defaults.

#include <filesystem>
#include <string>
#include <string_view>

#include "qforce/qnet.hpp"

namespace qforce::harness {

// Throws ContractViolation on unknown sections or keys, bad values, or a
// topology that fails validation.
qnet::Topology parse_topology(std::string_view text);
std::string format_topology(const qnet::Topology& t);

qnet::Topology load_topology(const std::filesystem::path& path);
void save_topology(const std::filesystem::path& path, const qnet::Topology& t);

}  // namespace qforce::harness
