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

#include <stdexcept>
#include <string>

namespace qforce {

// Caller broke an operation's precondition (shape, mode or range mismatch).
class ContractViolation : public std::logic_error {
 public:
  explicit ContractViolation(const std::string& what) : std::logic_error(what) {}
};

class CalibrationError : public std::runtime_error {
 public:
  explicit CalibrationError(const std::string& what) : std::runtime_error(what) {}
};

// File or stream could not be read, written or parsed.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

class TrainingFailure : public std::runtime_error {
 public:
  explicit TrainingFailure(const std::string& what) : std::runtime_error(what) {}
};

#define QFORCE_REQUIRE(cond, msg)                                  \
  do {                                                             \
    if (!(cond)) throw ::qforce::ContractViolation(std::string(msg)); \
  } while (0)

}  // namespace qforce
