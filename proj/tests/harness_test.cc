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

#include "advpong/harness.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

#include "advpong/checkpoint.h"

namespace advpong {
namespace {

GameConfig SmallGame() {
  GameConfig g = GameConfig::Quick();
  g.width = 8;
  g.height = 8;
  g.max_steps = 120;
  return g;
}

ParamSet SmallPolicy(std::uint64_t seed) {
  // Larger-than-default policy weights so that the policy is far from uniform
  // and attacks have something to flip.
  ParamSet p = ParamSet::Initialize(Architecture::Mlp(8, 8, {8}), seed);
  for (double& w : p.tensor("policy.weight")) w *= 100.0;
  Rng rng(seed);
  for (double& w : p.tensor("value.weight")) w = rng.Uniform(-1, 1);
  return p;
}

AttackConfig Attack(PerturbationKind kind, double magnitude,
                    InjectionStrategy s, int episodes = 4) {
  AttackConfig a;
  a.kind = kind;
  a.magnitude = magnitude;
  a.strategy = s;
  a.episodes = episodes;
  a.seed = 11;
  return a;
}

void ExpectSameMetrics(const std::vector<EpisodeMetrics>& a,
                       const std::vector<EpisodeMetrics>& b) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].total_reward, b[i].total_reward);
    EXPECT_EQ(a[i].frames, b[i].frames);
    EXPECT_EQ(a[i].score_agent, b[i].score_agent);
    EXPECT_EQ(a[i].score_opponent, b[i].score_opponent);
    EXPECT_EQ(a[i].mean_value, b[i].mean_value);
  }
}

TEST(HarnessTest, CleanEvaluationMatchesManualRollout) {
  const GameConfig game = SmallGame();
  const ParamSet p = SmallPolicy(1);
  const AttackConfig attack =
      Attack(PerturbationKind::kZero, 0.0, EveryFrame{});
  const std::vector<EpisodeMetrics> got = Evaluate(p, game, attack);
  for (int e = 0; e < attack.episodes; ++e) {
    Environment env(game);
    env.Reset(DeriveSeed(attack.seed, {kEvalEnvStream, std::uint64_t(e)}));
    Rng rng(DeriveSeed(attack.seed, {kEvalPolicyStream, std::uint64_t(e)}));
    double reward = 0;
    while (!env.state().done) {
      reward +=
          env.Step(SampleAction(Softmax(Forward(p, env.Render()).logits), rng))
              .reward;
    }
    EXPECT_EQ(got[e].total_reward, reward);
    EXPECT_EQ(got[e].frames, env.state().step_count);
    EXPECT_EQ(got[e].injections, 0);
    EXPECT_DOUBLE_EQ(got[e].relative_score, RelativeScore(game, env.state()));
  }
}

TEST(HarnessTest, ZeroMagnitudeAttacksEqualClean) {
  const GameConfig game = SmallGame();
  const ParamSet p = SmallPolicy(2);
  const auto clean =
      Evaluate(p, game, Attack(PerturbationKind::kZero, 0.0, EveryFrame{}));
  ExpectSameMetrics(
      clean,
      Evaluate(p, game, Attack(PerturbationKind::kFgsm, 0.0, EveryFrame{})));
  ExpectSameMetrics(
      clean,
      Evaluate(p, game, Attack(PerturbationKind::kUniform, 0.0, EveryFrame{})));
  // Kind none ignores the schedule entirely.
  ExpectSameMetrics(clean, Evaluate(p, game,
                                    Attack(PerturbationKind::kZero, 0.3,
                                           ValueThreshold{-1e9})));
}

TEST(HarnessTest, InjectionCountsFollowStrategy) {
  const GameConfig game = SmallGame();
  const ParamSet p = SmallPolicy(3);
  for (const auto& [strategy, expect] :
       std::vector<std::pair<InjectionStrategy, std::function<int(int)>>>{
           {EveryFrame{}, [](int f) { return f; }},
           {Periodic{10, PeriodicFill::kClean},
            [](int f) { return (f + 9) / 10; }},
           {Periodic{10, PeriodicFill::kReuse}, [](int f) { return f; }}}) {
    InjectionLog log;
    EvaluateOptions opts;
    opts.log = &log;
    const auto m = Evaluate(
        p, game, Attack(PerturbationKind::kFgsm, 0.05, strategy), opts);
    ASSERT_EQ(log.episodes(), 4);
    for (std::size_t e = 0; e < m.size(); ++e) {
      EXPECT_EQ(m[e].injections, expect(m[e].frames)) << StrategyName(strategy);
      EXPECT_EQ(log.InjectionCounts()[e], m[e].injections);
      EXPECT_LE(m[e].injections, m[e].frames);
      EXPECT_LE(std::abs(m[e].relative_score), 1.0);
    }
  }
}

TEST(HarnessTest, EvaluationNeverModifiesParameters) {
  const GameConfig game = SmallGame();
  const ParamSet p = SmallPolicy(4);
  const std::uint64_t before = ParamsHash(p);
  const ParamSet copy = p;
  Evaluate(p, game, Attack(PerturbationKind::kFgsm, 0.1, EveryFrame{}));
  Evaluate(p, game,
           Attack(PerturbationKind::kUniform, 0.1, ValueThreshold{0.0}));
  EXPECT_EQ(ParamsHash(p), before);
  EXPECT_EQ(p, copy);
}

TEST(HarnessTest, ValueGateReadsCleanFrame) {
  const GameConfig game = SmallGame();
  const ParamSet p = SmallPolicy(5);
  const double tau = CalibrateThreshold(CollectCleanValues(p, game, 2, 3), 0.5);
  std::mutex mu;
  int frames = 0, fresh = 0;
  EvaluateOptions opts;
  opts.observer = [&](const FrameRecord& r) {
    std::lock_guard<std::mutex> lock(mu);
    ++frames;
    EXPECT_EQ(r.clean_value, Forward(p, *r.clean).value);
    const bool inject = r.clean_value > tau;
    EXPECT_EQ(r.decision, inject ? InjectionDecision::kFreshInject
                                 : InjectionDecision::kClean);
    fresh += inject;
    if (!inject) EXPECT_EQ(*r.input, *r.clean);
  };
  opts.threads = 2;
  Evaluate(p, game, Attack(PerturbationKind::kFgsm, 0.2, ValueThreshold{tau}),
           opts);
  EXPECT_GT(frames, 0);
  EXPECT_GT(fresh, 0);
  EXPECT_LT(fresh, frames);
}

TEST(HarnessTest, ReuseAppliesTheCachedPerturbation) {
  const GameConfig game = SmallGame();
  const ParamSet p = SmallPolicy(6);
  const double eps = 0.07;
  Perturbation cached;
  int reused = 0;
  EvaluateOptions opts;
  opts.observer = [&](const FrameRecord& r) {
    if (r.decision == InjectionDecision::kFreshInject) {
      EXPECT_EQ(r.frame_index % 5, 0);
      cached = Fgsm(p, *r.clean, eps);
      EXPECT_EQ(*r.input, Apply(*r.clean, cached));
    } else {
      ASSERT_EQ(r.decision, InjectionDecision::kReuseCached);
      EXPECT_EQ(*r.input, Apply(*r.clean, cached));
      ++reused;
    }
  };
  Evaluate(p, game,
           Attack(PerturbationKind::kFgsm, eps,
                  Periodic{5, PeriodicFill::kReuse}, 2),
           opts);
  EXPECT_GT(reused, 0);
}

TEST(HarnessTest, ThreadCountDoesNotChangeResults) {
  const GameConfig game = SmallGame();
  const ParamSet p = SmallPolicy(7);
  const AttackConfig a =
      Attack(PerturbationKind::kUniform, 0.3, EveryFrame{}, 5);
  EvaluateOptions three;
  three.threads = 3;
  ExpectSameMetrics(Evaluate(p, game, a), Evaluate(p, game, a, three));
}

TEST(HarnessTest, RejectsMismatchedResolution) {
  GameConfig game = SmallGame();
  game.width = 9;
  EXPECT_THROW(Evaluate(SmallPolicy(1), game,
                        Attack(PerturbationKind::kZero, 0, EveryFrame{})),
               std::invalid_argument);
  AttackConfig bad = Attack(PerturbationKind::kFgsm, -1, EveryFrame{});
  EXPECT_THROW(bad.Validate(), std::invalid_argument);
}

TEST(HarnessTest, SummarizeMatchesDirectStatistics) {
  std::vector<EpisodeMetrics> m(3);
  m[0].relative_score = 1.0;
  m[1].relative_score = 0.2;
  m[2].relative_score = -0.6;
  m[0].injections = 3;
  m[0].frames = 10;
  m[1].frames = 20;
  m[2].frames = 30;
  const ScoreSummary s = Summarize(m);
  EXPECT_NEAR(s.mean, 0.2, 1e-15);
  // Sample standard deviation.
  EXPECT_NEAR(s.stddev, std::sqrt((0.64 + 0.0 + 0.64) / 2.0), 1e-12);
  EXPECT_DOUBLE_EQ(s.mean_injections, 1.0);
  EXPECT_DOUBLE_EQ(s.mean_frames, 20.0);
}

TrainConfig SmallTrain() {
  TrainConfig c;
  c.workers = 1;
  c.n_steps = 5;
  c.total_steps = 600;
  c.seed = 3;
  c.stop_on_plateau = false;
  return c;
}

TEST(RetrainTest, ZeroMagnitudeIsContinuedTraining) {
  const GameConfig game = SmallGame();
  Checkpoint base;
  base.params = SmallPolicy(8);
  base.train_steps = 1000;
  const TrainConfig c = SmallTrain();
  const RetrainOutcome r = Retrain(base, PerturbationKind::kFgsm, 0.0, c, game);
  ParamStore store(base.params, c.optimizer());
  const TrainResult plain = Train(c, game, store);
  EXPECT_EQ(r.checkpoint.params, plain.checkpoint.params);
  EXPECT_EQ(r.checkpoint.train_steps, 1000 + plain.steps);
  EXPECT_EQ(r.checkpoint.metadata["retrain"]["kind"], "fgsm");
}

TEST(RetrainTest, PerturbedTrainingDiffers) {
  const GameConfig game = SmallGame();
  Checkpoint base;
  base.params = SmallPolicy(9);
  const TrainConfig c = SmallTrain();
  const RetrainOutcome clean =
      Retrain(base, PerturbationKind::kZero, 0.0, c, game);
  const RetrainOutcome noisy =
      Retrain(base, PerturbationKind::kUniform, 0.3, c, game);
  EXPECT_NE(clean.checkpoint.params, noisy.checkpoint.params);
  EXPECT_TRUE(noisy.checkpoint.params.AllFinite());
}

TEST(ResilienceTest, MatrixIsPermutationInvariant) {
  const GameConfig game = SmallGame();
  const std::vector<LabeledParams> policies = {{"baseline", SmallPolicy(1)},
                                               {"fgsm@0.05", SmallPolicy(2)}};
  const std::vector<AttackConfig> grid = {
      Attack(PerturbationKind::kZero, 0, EveryFrame{}, 3),
      Attack(PerturbationKind::kFgsm, 0.05, EveryFrame{}, 3),
      Attack(PerturbationKind::kUniform, 0.2, EveryFrame{}, 3)};
  const auto cells = ResilienceMatrix(policies, grid, game);
  ASSERT_EQ(cells.size(), 6u);
  const auto swapped = ResilienceMatrix({policies[1], policies[0]},
                                        {grid[2], grid[0], grid[1]}, game);
  auto key = [](const ResilienceCell& c) {
    return c.retrain + "/" + PerturbationKindName(c.eval_kind) + "/" +
           std::to_string(c.eval_magnitude);
  };
  std::map<std::string, double> a, b;
  for (const auto& c : cells) a[key(c)] = c.score.mean;
  for (const auto& c : swapped) b[key(c)] = c.score.mean;
  EXPECT_EQ(a, b);
  const std::string csv = ResilienceCsv(cells);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "retrain,eval_kind,eval_magnitude,mean_score,std_score,episodes");
}

TEST(StrategyTest, CompareStrategiesTable) {
  const GameConfig game = SmallGame();
  const ParamSet p = SmallPolicy(10);
  const std::vector<InjectionStrategy> strategies = {
      EveryFrame{}, Periodic{10, PeriodicFill::kClean},
      Periodic{10, PeriodicFill::kReuse}, ValueThreshold{0.0}};
  std::vector<InjectionLog> logs;
  const auto rows = CompareStrategies(p, game, PerturbationKind::kFgsm, 0.05,
                                      strategies, 3, 5, &logs);
  ASSERT_EQ(rows.size(), 4u);
  ASSERT_EQ(logs.size(), 4u);
  EXPECT_EQ(rows[0].strategy, "every_frame");
  EXPECT_DOUBLE_EQ(rows[0].fraction_injected, 1.0);
  EXPECT_DOUBLE_EQ(rows[0].score.mean_injections, rows[0].score.mean_frames);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_DOUBLE_EQ(
        rows[i].score.mean_injections,
        ComputeInjectionStats(logs[i]).mean_injections_per_episode);
  }
  const std::string csv = StrategyCsv(rows);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
}

TEST(SweepTest, CalibratedMagnitudeIsSmallestHalvingEntry) {
  const GameConfig game = SmallGame();
  const ParamSet p = SmallPolicy(11);
  const MagnitudeSweep s =
      SweepMagnitude(p, game, PerturbationKind::kFgsm, {0.3, 0.01, 0.1}, 3, 2);
  ASSERT_EQ(s.rows.size(), 3u);
  EXPECT_EQ(s.rows[0].first, 0.01);
  EXPECT_EQ(s.rows[2].first, 0.3);
  bool found = false;
  double expected = 0;
  for (const auto& [mag, score] : s.rows) {
    if (!found && s.clean.mean > 0 && score.mean <= 0.5 * s.clean.mean) {
      found = true;
      expected = mag;
    }
  }
  EXPECT_EQ(s.found, found);
  if (found) EXPECT_EQ(s.calibrated, expected);
  const std::string csv = SweepCsv(s, PerturbationKind::kFgsm);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
}

TEST(CalibrationTest, ThresholdTracksTargetBudget) {
  const GameConfig game = SmallGame();
  const ParamSet p = SmallPolicy(12);
  const ThresholdCalibration c = CalibrateValueThreshold(
      p, game, PerturbationKind::kFgsm, 0.05, 12.0, 3, 4);
  EXPECT_EQ(c.target_per_episode, 12.0);
  EXPECT_GT(c.quantile, 0.0);
  EXPECT_LT(c.quantile, 1.0);
  EXPECT_GE(c.iterations, 1);
  // The reported budget is what the VF attack actually spends at tau.
  InjectionLog log;
  EvaluateOptions opts;
  opts.log = &log;
  AttackConfig a =
      Attack(PerturbationKind::kFgsm, 0.05, ValueThreshold{c.threshold}, 3);
  a.seed = 4;
  Evaluate(p, game, a, opts);
  EXPECT_DOUBLE_EQ(ComputeInjectionStats(log).mean_injections_per_episode,
                   c.injections_per_episode);
  EXPECT_EQ(c.within_tolerance,
            std::abs(c.injections_per_episode - 12.0) <= 0.1 * 12.0);
}

}  // namespace
}  // namespace advpong
