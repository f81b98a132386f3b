// Copyright 2026 The advpong Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ADVPONG_MINIPONG_H_
#define ADVPONG_MINIPONG_H_

// A small deterministic Pong. The agent controls the right paddle, a scripted
// opponent the left one. Court coordinates are x in [0, 1] (left to right)
// and y in [0, 1] (top to bottom), so "up" decreases y.
//
// The action interface has six ids with duplicated effects, following the
// Atari Pong layout:
//
//   id  name         effect
//   0   NOOP         noop
//   1   FIRE         noop
//   2   RIGHT        up
//   3   LEFT         down
//   4   RIGHTFIRE    up
//   5   LEFTFIRE     down

#include <array>
#include <cstdint>

#include "advpong/frame.h"

namespace advpong {

inline constexpr int kNumActions = 6;
inline constexpr int kNumSemanticActions = 3;

enum class SemanticAction { kNoop = 0, kUp = 1, kDown = 2 };

class Action {
 public:
  // Throws std::out_of_range unless 0 <= id < kNumActions.
  explicit Action(int id);

  int id() const { return id_; }
  bool operator==(const Action&) const = default;

 private:
  int id_;
};

SemanticAction SemanticMap(Action action);
const char* SemanticName(SemanticAction action);
const char* ActionName(Action action);

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Vec2&) const = default;
};

struct GameConfig {
  int width = 42;
  int height = 42;
  // Episode ends when either side reaches this many points.
  int game_point = 5;
  // Hard cap on episode length; a capped episode counts as finished.
  int max_steps = 5000;

  double paddle_height = 0.3;
  double paddle_width = 0.03;
  double paddle_margin = 0.03;
  double paddle_speed = 0.06;
  double ball_size = 0.08;
  double ball_speed = 0.04;
  // Return angle is hit_offset * max_bounce_angle, offset in [-1, 1].
  double max_bounce_angle = 1.0;
  double max_serve_angle = 0.5;
  double opponent_speed = 0.015;
  // Per-rally aim offset of the opponent, drawn from U(-e, e).
  double opponent_aim_error = 0.3;
  // Draws the previous ball position at half intensity.
  bool ball_trail = false;

  // Throws std::invalid_argument on inconsistent values.
  void Validate() const;

  static GameConfig Reference();
  static GameConfig Quick();
};

struct GameState {
  Vec2 ball_pos;
  Vec2 ball_vel;
  double agent_paddle_y = 0.5;
  double opponent_paddle_y = 0.5;
  double opponent_aim = 0.0;
  int agent_score = 0;
  int opponent_score = 0;
  int step_count = 0;
  bool done = false;
  std::uint64_t rng_state = 0;

  bool operator==(const GameState&) const = default;
};

struct StepResult {
  GameState state;
  int reward = 0;
  bool done = false;
};

// Canonical serve state; only the serve velocity and rng state depend on the
// seed.
GameState Reset(const GameConfig& config, std::uint64_t seed);

// Advances one tick. Reward is +1 when the opponent misses, -1 when the agent
// misses. Throws std::logic_error if the episode is already finished.
StepResult Step(const GameConfig& config, const GameState& state,
                Action action);

// Renders paddles and ball as bright rectangles using exact area coverage.
Frame Render(const GameConfig& config, const GameState& state);

// (agent - opponent) / game_point, in [-1, 1].
double RelativeScore(const GameConfig& config, const GameState& state);

// Thin stateful wrapper for rollouts.
class Environment {
 public:
  explicit Environment(GameConfig config);

  void Reset(std::uint64_t seed);
  StepResult Step(Action action);
  Frame Render() const { return advpong::Render(config_, state_); }

  const GameState& state() const { return state_; }
  const GameConfig& config() const { return config_; }

 private:
  GameConfig config_;
  GameState state_;
};

}  // namespace advpong

#endif  // ADVPONG_MINIPONG_H_
