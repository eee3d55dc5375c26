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

// Key-and-door gridworld. The agent must step onto the key, then onto the
// door. Each step costs 1/max_steps; reaching the door with the key pays
// 1.0 and ends the episode.
//
// Observations are agent-centred 32x32x3 images: the 15x15 cells around the
// agent are rasterized as 2x2 pixel blocks (one pixel border). Channel 0
// marks cells inside the grid, channel 1 the key (until picked up) and
// channel 2 the door.

#include <cstdint>
#include <vector>

namespace qforce::harness {

struct Cell {
  int x = 0;
  int y = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

enum Action : int { kUp = 0, kDown = 1, kLeft = 2, kRight = 3 };
inline constexpr int kNumActions = 4;

struct GridConfig {
  int width = 8;
  int height = 8;
  int max_steps = 64;
  Cell key{3, 3};
  Cell door{4, 5};
};

inline constexpr int kObsHeight = 32;
inline constexpr int kObsWidth = 32;
inline constexpr int kObsChannels = 3;
inline constexpr int kObsSize = kObsHeight * kObsWidth * kObsChannels;

struct StepResult {
  double reward = 0.0;
  bool done = false;
};

class GridWorld {
 public:
  explicit GridWorld(GridConfig cfg = {});

  // Agent starts on a uniformly drawn cell that is neither key nor door.
  void reset(std::uint64_t seed);
  void reset_at(Cell agent);

  StepResult step(int action);

  // HWC pixels in {0, 1}.
  std::vector<double> observe() const;

  const GridConfig& config() const { return cfg_; }
  Cell agent() const { return agent_; }
  bool has_key() const { return has_key_; }
  int steps() const { return steps_; }
  bool done() const { return done_; }
  bool succeeded() const { return succeeded_; }

 private:
  GridConfig cfg_;
  Cell agent_;
  bool has_key_ = false;
  int steps_ = 0;
  bool done_ = false;
  bool succeeded_ = false;
};

}  // namespace qforce::harness
