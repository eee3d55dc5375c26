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

#include "qforce/harness/gridworld.hpp"

#include "qforce/error.hpp"
#include "qforce/harness/rng.hpp"

namespace qforce::harness {

namespace {

constexpr int kView = 7;  // cells visible on each side of the agent
constexpr int kCellPx = 2;

}  // namespace

GridWorld::GridWorld(GridConfig cfg) : cfg_(cfg) {
  QFORCE_REQUIRE(cfg_.width >= 2 && cfg_.height >= 2 && cfg_.width <= kView + 1 && cfg_.height <= kView + 1,
                 "grid must be between 2x2 and 8x8");
  QFORCE_REQUIRE(cfg_.max_steps > 0, "max_steps must be positive");
  QFORCE_REQUIRE(!(cfg_.key == cfg_.door), "key and door must differ");
  reset_at({0, 0});
}

void GridWorld::reset(std::uint64_t seed) {
  Rng rng(seed);
  const auto cells = static_cast<std::uint64_t>(cfg_.width * cfg_.height - 2);
  auto pick = static_cast<int>(rng.below(cells));
  for (int y = 0; y < cfg_.height; ++y) {
    for (int x = 0; x < cfg_.width; ++x) {
      const Cell c{x, y};
      if (c == cfg_.key || c == cfg_.door) continue;
      if (pick-- == 0) {
        reset_at(c);
        return;
      }
    }
  }
}

void GridWorld::reset_at(Cell agent) {
  QFORCE_REQUIRE(agent.x >= 0 && agent.x < cfg_.width && agent.y >= 0 && agent.y < cfg_.height,
                 "agent start outside the grid");
  agent_ = agent;
  has_key_ = agent == cfg_.key;
  steps_ = 0;
  done_ = false;
  succeeded_ = false;
}

StepResult GridWorld::step(int action) {
  QFORCE_REQUIRE(!done_, "step on a finished episode");
  QFORCE_REQUIRE(action >= 0 && action < kNumActions, "unknown action");
  static constexpr int dx[] = {0, 0, -1, 1};
  static constexpr int dy[] = {-1, 1, 0, 0};
  const int nx = agent_.x + dx[action];
  const int ny = agent_.y + dy[action];
  if (nx >= 0 && nx < cfg_.width && ny >= 0 && ny < cfg_.height) agent_ = {nx, ny};
  ++steps_;
  StepResult r{-1.0 / cfg_.max_steps, false};
  if (agent_ == cfg_.key) has_key_ = true;
  if (has_key_ && agent_ == cfg_.door) {
    r.reward += 1.0;
    succeeded_ = true;
    done_ = true;
  } else if (steps_ >= cfg_.max_steps) {
    done_ = true;
  }
  r.done = done_;
  return r;
}

std::vector<double> GridWorld::observe() const {
  std::vector<double> px(kObsSize, 0.0);
  auto paint = [&](int rel_x, int rel_y, int channel) {
    const int top = 1 + kCellPx * (rel_y + kView);
    const int left = 1 + kCellPx * (rel_x + kView);
    for (int py = top; py < top + kCellPx; ++py)
      for (int pxl = left; pxl < left + kCellPx; ++pxl)
        px[static_cast<std::size_t>((py * kObsWidth + pxl) * kObsChannels + channel)] = 1.0;
  };
  for (int y = 0; y < cfg_.height; ++y)
    for (int x = 0; x < cfg_.width; ++x) paint(x - agent_.x, y - agent_.y, 0);
  if (!has_key_) paint(cfg_.key.x - agent_.x, cfg_.key.y - agent_.y, 1);
  paint(cfg_.door.x - agent_.x, cfg_.door.y - agent_.y, 2);
  return px;
}

}  // namespace qforce::harness
