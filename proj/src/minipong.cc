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

#include "advpong/minipong.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "advpong/rng.h"

namespace advpong {
namespace {

constexpr std::array<SemanticAction, kNumActions> kSemanticTable = {
    SemanticAction::kNoop, SemanticAction::kNoop, SemanticAction::kUp,
    SemanticAction::kDown, SemanticAction::kUp,   SemanticAction::kDown};

constexpr std::array<const char*, kNumActions> kActionNames = {
    "NOOP", "FIRE", "RIGHT", "LEFT", "RIGHTFIRE", "LEFTFIRE"};

double MoveToward(double from, double to, double max_step) {
  return from + std::clamp(to - from, -max_step, max_step);
}

void Serve(const GameConfig& config, Rng& rng, GameState& s) {
  const double angle =
      rng.Uniform(-config.max_serve_angle, config.max_serve_angle);
  const double dir = rng.Uniform() < 0.5 ? -1.0 : 1.0;
  s.ball_pos = {0.5, 0.5};
  s.ball_vel = {dir * config.ball_speed * std::cos(angle),
                config.ball_speed * std::sin(angle)};
}

// Adds intensity * covered-area-fraction for the court rectangle
// [x0, x1] x [y0, y1] to every pixel it overlaps.
void AddRect(Frame& frame, double x0, double x1, double y0, double y1,
             double intensity) {
  const double px0 = std::max(0.0, x0 * frame.width);
  const double px1 = std::min(double(frame.width), x1 * frame.width);
  const double py0 = std::max(0.0, y0 * frame.height);
  const double py1 = std::min(double(frame.height), y1 * frame.height);
  if (px1 <= px0 || py1 <= py0) return;
  const int c0 = static_cast<int>(std::floor(px0));
  const int c1 = static_cast<int>(std::ceil(px1));
  const int r0 = static_cast<int>(std::floor(py0));
  const int r1 = static_cast<int>(std::ceil(py1));
  for (int r = r0; r < r1; ++r) {
    const double oy = std::min(py1, r + 1.0) - std::max(py0, double(r));
    if (oy <= 0.0) continue;
    for (int c = c0; c < c1; ++c) {
      const double ox = std::min(px1, c + 1.0) - std::max(px0, double(c));
      if (ox <= 0.0) continue;
      frame.at(r, c) += intensity * ox * oy;
    }
  }
}

}  // namespace

Action::Action(int id) : id_(id) {
  if (id < 0 || id >= kNumActions) {
    throw std::out_of_range("action id " + std::to_string(id) +
                            " not in [0,6)");
  }
}

SemanticAction SemanticMap(Action action) {
  return kSemanticTable[action.id()];
}

const char* SemanticName(SemanticAction action) {
  switch (action) {
    case SemanticAction::kNoop:
      return "noop";
    case SemanticAction::kUp:
      return "up";
    case SemanticAction::kDown:
      return "down";
  }
  return "?";
}

const char* ActionName(Action action) { return kActionNames[action.id()]; }

void GameConfig::Validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("game config: ") + what);
  };
  require(width > 0 && height > 0, "resolution must be positive");
  require(game_point >= 1, "game_point must be >= 1");
  require(max_steps >= 1, "max_steps must be >= 1");
  require(paddle_height > 0 && paddle_height < 1, "paddle_height in (0,1)");
  require(paddle_width > 0 && paddle_margin >= 0 &&
              paddle_margin + paddle_width < 0.5,
          "paddle geometry");
  require(paddle_speed >= 0, "paddle_speed >= 0");
  require(ball_size > 0 && ball_size < 0.5, "ball_size in (0,0.5)");
  require(ball_speed > 0 && ball_speed < ball_size * 4, "ball_speed");
  require(max_bounce_angle >= 0 && max_bounce_angle < 1.5, "max_bounce_angle");
  require(max_serve_angle >= 0 && max_serve_angle < 1.5, "max_serve_angle");
  require(opponent_speed >= 0 && opponent_aim_error >= 0, "opponent");
}

GameConfig GameConfig::Reference() { return GameConfig{}; }

GameConfig GameConfig::Quick() {
  GameConfig config;
  config.width = 21;
  config.height = 21;
  return config;
}

GameState Reset(const GameConfig& config, std::uint64_t seed) {
  config.Validate();
  GameState s;
  Rng rng(seed);
  Serve(config, rng, s);
  s.rng_state = rng.state();
  return s;
}

StepResult Step(const GameConfig& config, const GameState& state,
                Action action) {
  if (state.done) throw std::logic_error("step called on a finished episode");
  GameState s = state;
  Rng rng(s.rng_state);
  const double half_paddle = 0.5 * config.paddle_height;
  const double r = 0.5 * config.ball_size;
  s.step_count += 1;

  switch (SemanticMap(action)) {
    case SemanticAction::kNoop:
      break;
    case SemanticAction::kUp:
      s.agent_paddle_y -= config.paddle_speed;
      break;
    case SemanticAction::kDown:
      s.agent_paddle_y += config.paddle_speed;
      break;
  }
  s.agent_paddle_y =
      std::clamp(s.agent_paddle_y, half_paddle, 1.0 - half_paddle);

  const double opponent_target =
      s.ball_vel.x < 0 ? s.ball_pos.y + s.opponent_aim : 0.5;
  s.opponent_paddle_y = std::clamp(
      MoveToward(s.opponent_paddle_y, opponent_target, config.opponent_speed),
      half_paddle, 1.0 - half_paddle);

  const Vec2 prev = s.ball_pos;
  s.ball_pos.x += s.ball_vel.x;
  s.ball_pos.y += s.ball_vel.y;
  if (s.ball_pos.y - r < 0.0) {
    s.ball_pos.y = 2.0 * r - s.ball_pos.y;
    s.ball_vel.y = -s.ball_vel.y;
  } else if (s.ball_pos.y + r > 1.0) {
    s.ball_pos.y = 2.0 * (1.0 - r) - s.ball_pos.y;
    s.ball_vel.y = -s.ball_vel.y;
  }

  auto bounce = [&](double paddle_y, double face_x, double dir) {
    const double offset =
        std::clamp((s.ball_pos.y - paddle_y) / (half_paddle + r), -1.0, 1.0);
    const double angle = offset * config.max_bounce_angle;
    s.ball_vel = {dir * config.ball_speed * std::cos(angle),
                  config.ball_speed * std::sin(angle)};
    s.ball_pos.x = face_x + dir * r;
  };

  const double agent_face = 1.0 - config.paddle_margin - config.paddle_width;
  const double opponent_face = config.paddle_margin + config.paddle_width;
  if (s.ball_vel.x > 0 && prev.x + r <= agent_face &&
      s.ball_pos.x + r > agent_face &&
      std::abs(s.ball_pos.y - s.agent_paddle_y) <= half_paddle + r) {
    bounce(s.agent_paddle_y, agent_face, -1.0);
    s.opponent_aim =
        rng.Uniform(-config.opponent_aim_error, config.opponent_aim_error);
  } else if (s.ball_vel.x < 0 && prev.x - r >= opponent_face &&
             s.ball_pos.x - r < opponent_face &&
             std::abs(s.ball_pos.y - s.opponent_paddle_y) <= half_paddle + r) {
    bounce(s.opponent_paddle_y, opponent_face, 1.0);
  }

  int reward = 0;
  if (s.ball_pos.x - r > 1.0) {
    reward = -1;
    s.opponent_score += 1;
  } else if (s.ball_pos.x + r < 0.0) {
    reward = 1;
    s.agent_score += 1;
  }
  if (reward != 0) {
    Serve(config, rng, s);
    if (s.ball_vel.x < 0) {
      s.opponent_aim =
          rng.Uniform(-config.opponent_aim_error, config.opponent_aim_error);
    }
  }

  s.done = s.agent_score >= config.game_point ||
           s.opponent_score >= config.game_point ||
           s.step_count >= config.max_steps;
  s.rng_state = rng.state();
  return {s, reward, s.done};
}

Frame Render(const GameConfig& config, const GameState& s) {
  Frame frame(config.width, config.height);
  const double half_paddle = 0.5 * config.paddle_height;
  const double r = 0.5 * config.ball_size;
  const double agent_x1 = 1.0 - config.paddle_margin;
  const double opp_x0 = config.paddle_margin;
  AddRect(frame, agent_x1 - config.paddle_width, agent_x1,
          s.agent_paddle_y - half_paddle, s.agent_paddle_y + half_paddle, 1.0);
  AddRect(frame, opp_x0, opp_x0 + config.paddle_width,
          s.opponent_paddle_y - half_paddle, s.opponent_paddle_y + half_paddle,
          1.0);
  if (config.ball_trail) {
    const double tx = s.ball_pos.x - s.ball_vel.x;
    const double ty = s.ball_pos.y - s.ball_vel.y;
    AddRect(frame, tx - r, tx + r, ty - r, ty + r, 0.5);
  }
  AddRect(frame, s.ball_pos.x - r, s.ball_pos.x + r, s.ball_pos.y - r,
          s.ball_pos.y + r, 1.0);
  for (double& p : frame.pixels) p = std::min(p, 1.0);
  return frame;
}

double RelativeScore(const GameConfig& config, const GameState& s) {
  return double(s.agent_score - s.opponent_score) / config.game_point;
}

Environment::Environment(GameConfig config) : config_(config) {
  config_.Validate();
  state_ = advpong::Reset(config_, 0);
}

void Environment::Reset(std::uint64_t seed) {
  state_ = advpong::Reset(config_, seed);
}

StepResult Environment::Step(Action action) {
  StepResult result = advpong::Step(config_, state_, action);
  state_ = result.state;
  return result;
}

}  // namespace advpong
