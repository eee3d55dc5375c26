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

// CSV and JSON serialization of command outputs. Column names double as JSON
// keys; see the README for the column reference.

#include <string>
#include <vector>

#include "qforce/fxp.hpp"
#include "qforce/harness/diagnostics.hpp"
#include "qforce/harness/rollout.hpp"
#include "qforce/perf.hpp"

namespace qforce::harness {

enum class Format { Csv, Json };

// Throws ContractViolation for anything but "csv" or "json".
Format parse_format(const std::string& s);

std::string render(const std::vector<perf::PerfReport>& rows, Format f);
// Wall-clock columns are included only when `timing` is set, so that files
// written with it off are reproducible byte for byte.
std::string render(const RolloutReport& report, Format f, bool timing);
std::string render(const std::vector<VactDumpRow>& rows, Format f);
std::string render(const std::vector<MacVerifyResult>& rows, Format f);
// Action distribution: one row per action with code and probability.
std::string render_probs(const fxp::QTensor& probs, int chosen, Format f);

}  // namespace qforce::harness
