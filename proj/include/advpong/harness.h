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

#ifndef ADVPONG_HARNESS_H_
#define ADVPONG_HARNESS_H_

// Evaluation of frozen policies under attack, the re-training protocol, and
// the summary tables built on top of them.
//
// Random streams per evaluation episode e are derived from the attack seed:
// environment (kEvalEnvStream, e), action sampling (kEvalPolicyStream, e) and
// noise (kEvalNoiseStream, e). Attacks therefore never shift the action
// sampling stream, and an attack of kind none is bit-identical to a clean
// rollout with the same seed.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "advpong/actor_critic.h"
#include "advpong/checkpoint.h"
#include "advpong/minipong.h"
#include "advpong/nn.h"
#include "advpong/perturb.h"
#include "advpong/schedule.h"
#include "json.hpp"

namespace advpong {

struct AttackConfig {
  PerturbationKind kind = PerturbationKind::kZero;
  double magnitude = 0.0;
  InjectionStrategy strategy = EveryFrame{};
  int episodes = 30;
  std::uint64_t seed = 1;

  void Validate() const;
};

nlohmann::json ToJson(const AttackConfig& attack);

struct EpisodeMetrics {
  int episode = 0;
  double total_reward = 0.0;
  double relative_score = 0.0;
  int frames = 0;
  int injections = 0;
  double mean_value = 0.0;
  int score_agent = 0;
  int score_opponent = 0;
};

nlohmann::json ToJson(const EpisodeMetrics& m);

// Per-frame instrumentation hook for Evaluate.
struct FrameRecord {
  int episode = 0;
  int frame_index = 0;
  double clean_value = 0.0;
  InjectionDecision decision = InjectionDecision::kClean;
  const Frame* clean = nullptr;
  const Frame* input = nullptr;
};
using FrameObserver = std::function<void(const FrameRecord&)>;

struct EvaluateOptions {
  // Episodes run on this many threads; results are ordered by episode index.
  int threads = 1;
  InjectionLog* log = nullptr;
  // Called in frame order within each episode. Must be thread-safe when
  // threads > 1.
  FrameObserver observer;
};

// Plays attack.episodes episodes with stochastic action sampling. Parameters
// are never modified. Throws std::invalid_argument if the architecture does
// not match the game resolution.
std::vector<EpisodeMetrics> Evaluate(const ParamSet& params,
                                     const GameConfig& game,
                                     const AttackConfig& attack,
                                     const EvaluateOptions& options = {});

struct ScoreSummary {
  double mean = 0.0;
  double stddev = 0.0;
  int episodes = 0;
  double mean_injections = 0.0;
  double mean_frames = 0.0;
};

ScoreSummary Summarize(const std::vector<EpisodeMetrics>& episodes);

// Clean value estimates of every frame over `episodes` clean episodes.
std::vector<double> CollectCleanValues(const ParamSet& params,
                                       const GameConfig& game, int episodes,
                                       std::uint64_t seed);

// Frame transform used during re-training: a fresh perturbation on every
// frame, FGSM computed against the parameters the worker is acting with.
ObservationTransform PerturbEveryFrame(PerturbationKind kind, double magnitude);

struct RetrainOutcome {
  TrainResult train;
  // Baseline train_steps plus the re-training steps, with the retrain
  // condition recorded in metadata.
  Checkpoint checkpoint;
};

// Continues A3C training from `baseline` with every observed frame
// perturbed. The optimizer statistics start fresh.
RetrainOutcome Retrain(const Checkpoint& baseline, PerturbationKind kind,
                       double magnitude, const TrainConfig& config,
                       const GameConfig& game, const TrainHooks& hooks = {});

struct LabeledParams {
  std::string label;
  ParamSet params;
};

struct ResilienceCell {
  std::string retrain;
  PerturbationKind eval_kind = PerturbationKind::kZero;
  double eval_magnitude = 0.0;
  ScoreSummary score;
};

// Full cross product, rows ordered as policies x grid. Every cell uses the
// grid entry's own seed, so a cell does not depend on its position.
std::vector<ResilienceCell> ResilienceMatrix(
    const std::vector<LabeledParams>& policies,
    const std::vector<AttackConfig>& eval_grid, const GameConfig& game);

// Header: retrain,eval_kind,eval_magnitude,mean_score,std_score,episodes
std::string ResilienceCsv(const std::vector<ResilienceCell>& cells);

struct StrategyRow {
  std::string strategy;
  ScoreSummary score;
  double fraction_injected = 0.0;
};

// One row per strategy, same seed and episode count for all of them. The
// optional outputs receive one entry per strategy.
std::vector<StrategyRow> CompareStrategies(
    const ParamSet& params, const GameConfig& game, PerturbationKind kind,
    double magnitude, const std::vector<InjectionStrategy>& strategies,
    int episodes, std::uint64_t seed, std::vector<InjectionLog>* logs = nullptr,
    std::vector<std::vector<EpisodeMetrics>>* metrics = nullptr);

// Header: strategy,mean_score,std_score,mean_injections,fraction_injected,
// mean_frames,episodes
std::string StrategyCsv(const std::vector<StrategyRow>& rows);

struct MagnitudeSweep {
  ScoreSummary clean;
  std::vector<std::pair<double, ScoreSummary>> rows;
  // Smallest grid magnitude whose mean score is at most half the clean mean;
  // never found when the clean mean is not positive.
  double calibrated = 0.0;
  bool found = false;
};

// Every-frame attacks at each grid magnitude, in ascending order.
MagnitudeSweep SweepMagnitude(const ParamSet& params, const GameConfig& game,
                              PerturbationKind kind, std::vector<double> grid,
                              int episodes, std::uint64_t seed);

std::string SweepCsv(const MagnitudeSweep& sweep, PerturbationKind kind);

struct ThresholdCalibration {
  double quantile = 0.9;
  double threshold = 0.0;
  double injections_per_episode = 0.0;
  double target_per_episode = 0.0;
  int iterations = 0;
  bool within_tolerance = false;
};

// Picks tau as a quantile of clean value estimates (from episodes on the
// calibration stream), then bisects the quantile until the VF attack's
// measured injections per episode are within `tolerance` (relative) of
// `target_per_episode`.
ThresholdCalibration CalibrateValueThreshold(
    const ParamSet& params, const GameConfig& game, PerturbationKind kind,
    double magnitude, double target_per_episode, int episodes,
    std::uint64_t seed, double initial_quantile = 0.9, double tolerance = 0.1,
    int max_iterations = 12);

nlohmann::json ToJson(const ThresholdCalibration& c);

}  // namespace advpong

#endif  // ADVPONG_HARNESS_H_
