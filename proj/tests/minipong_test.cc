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

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "advpong/rng.h"

namespace advpong {
namespace {

GameState RandomState(const GameConfig& config, Rng& rng) {
  GameState s = Reset(config, rng());
  const double half = 0.5 * config.paddle_height;
  const double r = 0.5 * config.ball_size;
  s.ball_pos = {rng.Uniform(0.2, 0.8), rng.Uniform(r, 1.0 - r)};
  const double angle = rng.Uniform(-1.0, 1.0);
  const double dir = rng.Uniform() < 0.5 ? -1.0 : 1.0;
  s.ball_vel = {dir * config.ball_speed * std::cos(angle),
                config.ball_speed * std::sin(angle)};
  s.agent_paddle_y = rng.Uniform(half, 1.0 - half);
  s.opponent_paddle_y = rng.Uniform(half, 1.0 - half);
  return s;
}

TEST(MiniPongTest, ResetIsDeterministic) {
  const GameConfig config;
  EXPECT_EQ(Reset(config, 7), Reset(config, 7));
  EXPECT_EQ(Reset(config, 7).agent_score, 0);
  EXPECT_EQ(Reset(config, 7).opponent_score, 0);
}

TEST(MiniPongTest, SeedsDifferOnlyInServe) {
  const GameConfig config;
  GameState a = Reset(config, 1);
  GameState b = Reset(config, 2);
  EXPECT_NE(a.ball_vel, b.ball_vel);
  EXPECT_NE(a.rng_state, b.rng_state);
  // Every other field is the canonical serve state.
  b.ball_vel = a.ball_vel;
  b.rng_state = a.rng_state;
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.ball_pos, (Vec2{0.5, 0.5}));
  EXPECT_NEAR(std::hypot(a.ball_vel.x, a.ball_vel.y), config.ball_speed, 1e-15);
}

TEST(MiniPongTest, NoopLeavesPaddleInPlace) {
  const GameConfig config;
  const GameState s = Reset(config, 3);
  for (int id : {0, 1}) {
    EXPECT_EQ(Step(config, s, Action(id)).state.agent_paddle_y,
              s.agent_paddle_y);
  }
  EXPECT_LT(Step(config, s, Action(2)).state.agent_paddle_y, s.agent_paddle_y);
  EXPECT_GT(Step(config, s, Action(3)).state.agent_paddle_y, s.agent_paddle_y);
}

TEST(MiniPongTest, TopWallReflectsAndPreservesSpeed) {
  const GameConfig config;
  GameState s = Reset(config, 3);
  const double r = 0.5 * config.ball_size;
  s.ball_pos = {0.5, r + 0.01};
  s.ball_vel = {0.02, -0.03};
  const GameState next = Step(config, s, Action(0)).state;
  EXPECT_GT(next.ball_vel.y, 0.0);
  EXPECT_DOUBLE_EQ(std::hypot(next.ball_vel.x, next.ball_vel.y),
                   std::hypot(s.ball_vel.x, s.ball_vel.y));
  // Hand simulation: y goes to r - 0.02 and reflects about r.
  EXPECT_NEAR(next.ball_pos.y, r + 0.02, 1e-15);
  EXPECT_DOUBLE_EQ(next.ball_pos.x, 0.52);
}

TEST(MiniPongTest, AgentMissCostsAPoint) {
  const GameConfig config;
  GameState s = Reset(config, 3);
  // One tick before the ball fully leaves the court on the agent's side.
  s.ball_pos = {1.0 + 0.5 * config.ball_size - 0.01, 0.1};
  s.ball_vel = {0.04, 0.0};
  s.agent_paddle_y = 0.9;
  const StepResult r = Step(config, s, Action(0));
  EXPECT_EQ(r.reward, -1);
  EXPECT_EQ(r.state.opponent_score, 1);
  EXPECT_EQ(r.state.agent_score, 0);
  EXPECT_EQ(r.state.ball_pos, (Vec2{0.5, 0.5}));
}

TEST(MiniPongTest, OpponentMissScoresForAgent) {
  const GameConfig config;
  GameState s = Reset(config, 3);
  s.ball_pos = {-0.5 * config.ball_size + 0.01, 0.1};
  s.ball_vel = {-0.04, 0.0};
  s.opponent_paddle_y = 0.9;
  const StepResult r = Step(config, s, Action(0));
  EXPECT_EQ(r.reward, 1);
  EXPECT_EQ(r.state.agent_score, 1);
}

TEST(MiniPongTest, PaddleReturnsBall) {
  const GameConfig config;
  GameState s = Reset(config, 3);
  const double face = 1.0 - config.paddle_margin - config.paddle_width;
  s.ball_pos = {face - 0.5 * config.ball_size - 0.01, 0.5};
  s.ball_vel = {0.04, 0.0};
  s.agent_paddle_y = 0.5;
  const StepResult r = Step(config, s, Action(0));
  EXPECT_EQ(r.reward, 0);
  EXPECT_LT(r.state.ball_vel.x, 0.0);
  EXPECT_NEAR(r.state.ball_vel.y, 0.0, 1e-15);
}

TEST(MiniPongTest, SteppingFinishedEpisodeThrows) {
  GameConfig config;
  config.max_steps = 1;
  const StepResult r = Step(config, Reset(config, 1), Action(0));
  EXPECT_TRUE(r.done);
  EXPECT_THROW(Step(config, r.state, Action(0)), std::logic_error);
}

TEST(MiniPongTest, SemanticTable) {
  EXPECT_EQ(SemanticMap(Action(0)), SemanticAction::kNoop);
  std::set<SemanticAction> image;
  std::array<int, kNumSemanticActions> preimages{};
  for (int a = 0; a < kNumActions; ++a) {
    image.insert(SemanticMap(Action(a)));
    preimages[static_cast<int>(SemanticMap(Action(a)))] += 1;
  }
  EXPECT_EQ(image.size(), 3u);
  for (int n : preimages) EXPECT_EQ(n, 2);
  EXPECT_THROW(Action(6), std::out_of_range);
  EXPECT_THROW(Action(-1), std::out_of_range);
}

TEST(MiniPongTest, DuplicatedActionsAreEquivalent) {
  const GameConfig config;
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const GameState s = RandomState(config, rng);
    for (int a = 0; a < kNumActions; ++a) {
      for (int b = 0; b < kNumActions; ++b) {
        if (SemanticMap(Action(a)) != SemanticMap(Action(b))) continue;
        const StepResult ra = Step(config, s, Action(a));
        const StepResult rb = Step(config, s, Action(b));
        EXPECT_EQ(ra.state, rb.state);
        EXPECT_EQ(ra.reward, rb.reward);
      }
    }
  }
}

TEST(MiniPongTest, TrajectoryIsDeterministicAndConservesReward) {
  const GameConfig config = GameConfig::Quick();
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    Rng actions_a(seed), actions_b(seed);
    Environment a(config), b(config);
    a.Reset(seed);
    b.Reset(seed);
    int reward_sum = 0;
    while (!a.state().done) {
      const StepResult ra = a.Step(Action(actions_a.UniformInt(kNumActions)));
      const StepResult rb = b.Step(Action(actions_b.UniformInt(kNumActions)));
      ASSERT_EQ(ra.state, rb.state);
      ASSERT_EQ(a.Render(), b.Render());
      reward_sum += ra.reward;
      const GameState& s = ra.state;
      const double half = 0.5 * config.paddle_height;
      ASSERT_GE(s.agent_paddle_y, half);
      ASSERT_LE(s.agent_paddle_y, 1.0 - half);
      ASSERT_GE(s.ball_pos.y, 0.0);
      ASSERT_LE(s.ball_pos.y, 1.0);
    }
    EXPECT_EQ(reward_sum, a.state().agent_score - a.state().opponent_score);
  }
}

TEST(MiniPongTest, RenderIsPureAndInRange) {
  const GameConfig config;
  Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    const GameState s = RandomState(config, rng);
    const Frame f = Render(config, s);
    EXPECT_EQ(f, Render(config, s));
    EXPECT_NO_THROW(ValidateFrame(f));
    EXPECT_EQ(f.width, 42);
    EXPECT_EQ(f.height, 42);
  }
}

TEST(MiniPongTest, CenteredBallLightsCenterBlock) {
  GameConfig config;
  config.ball_trail = false;
  const GameState s = Reset(config, 1);
  const Frame f = Render(config, s);
  // Ball spans court [0.46, 0.54] -> pixels [19.32, 22.68] at 42 px:
  // rows/columns 20 and 21 fully covered, 19 and 22 covered by 0.68.
  EXPECT_DOUBLE_EQ(f.at(20, 20), 1.0);
  EXPECT_DOUBLE_EQ(f.at(21, 21), 1.0);
  EXPECT_DOUBLE_EQ(f.at(20, 21), 1.0);
  EXPECT_NEAR(f.at(19, 20), 0.68, 1e-9);
  EXPECT_NEAR(f.at(22, 21), 0.68, 1e-9);
  EXPECT_NEAR(f.at(19, 19), 0.68 * 0.68, 1e-9);
  EXPECT_DOUBLE_EQ(f.at(18, 20), 0.0);
  EXPECT_DOUBLE_EQ(f.at(20, 17), 0.0);
}

TEST(MiniPongTest, PgmDump) {
  const GameConfig config = GameConfig::Quick();
  const Frame f = Render(config, Reset(config, 1));
  const std::string path = ::testing::TempDir() + "frame.pgm";
  WritePgm(f, path);
  std::ifstream in(path, std::ios::binary);
  std::string magic;
  int w, h, maxval;
  in >> magic >> w >> h >> maxval;
  in.get();
  EXPECT_EQ(magic, "P5");
  EXPECT_EQ(w, 21);
  EXPECT_EQ(h, 21);
  EXPECT_EQ(maxval, 255);
  std::string data((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  EXPECT_EQ(data.size(), 21u * 21u);
}

}  // namespace
}  // namespace advpong
