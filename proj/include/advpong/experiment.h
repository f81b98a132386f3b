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

#ifndef ADVPONG_EXPERIMENT_H_
#define ADVPONG_EXPERIMENT_H_

// Run configuration and the four pipelines behind the command-line tool:
// train, attack, retrain and boundary. Each pipeline writes its artifacts
// into a run directory (skipped when the directory is empty) and returns the
// numbers it computed.
//
// Seeds: everything derives from RunConfig::seed. Training uses it directly,
// evaluations use it as the attack seed, re-training runs use
// DeriveSeed(seed, {kRetrainStream, kind}) and boundary directions use
// DeriveSeed(seed, {kBoundaryDirectionStream, episode, frame}).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "advpong/actor_critic.h"
#include "advpong/boundary.h"
#include "advpong/checkpoint.h"
#include "advpong/harness.h"
#include "advpong/minipong.h"
#include "advpong/nn.h"
#include "json.hpp"

namespace advpong {

inline constexpr const char* kToolVersion = "1.0.0";

nlohmann::json ToJson(const GameConfig& game);
GameConfig GameConfigFromJson(const nlohmann::json& j, GameConfig base);

struct ModelConfig {
  // "conv" (the reference network) or "mlp".
  std::string kind = "conv";
  std::vector<int> hidden = {64};

  Architecture Build(const GameConfig& game) const;
};

struct AttackOptions {
  // Magnitude used by the strategy table; 0 means "calibrate": the smallest
  // sweep entry whose every-frame FGSM attack halves the clean score.
  double magnitude = 0.0;
  std::vector<double> sweep = {0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2};
  // Uniform noise is evaluated at these multiples of the FGSM magnitude,
  // unless noise_sweep lists absolute magnitudes.
  std::vector<double> noise_multipliers = {1, 2, 3, 4, 5, 10};
  std::vector<double> noise_sweep;
  int period = 10;
  double vf_quantile = 0.9;
  double vf_tolerance = 0.1;
  int episodes = 30;
};

struct RetrainOptions {
  // FGSM re-training magnitude; 0 means calibrate as in AttackOptions.
  double magnitude = 0.0;
  // Uniform-noise re-training at noise_magnitude, or when that is 0 at this
  // multiple of the FGSM magnitude.
  double noise_multiplier = 10.0;
  double noise_magnitude = 0.0;
  // FGSM evaluation magnitudes: eval_magnitudes if non-empty, else these
  // multiples of the FGSM magnitude.
  std::vector<double> eval_multipliers = {0.5, 1.0, 2.0};
  std::vector<double> eval_magnitudes;
  std::int64_t total_steps = 2'000'000;
  // Convergence bar for the perturbed training episodes; the score ceiling
  // under every-frame perturbation is below the clean one.
  double plateau_score = 0.8;
  // Off: both re-trainings use the full step budget, so they are compared at
  // equal cost.
  bool stop_on_plateau = false;
  int episodes = 30;
};

struct BoundaryOptions {
  // 0 means calibrate as in AttackOptions.
  double epsilon = 0.0;
  // "auto" or "index" (episode + frame below).
  std::string frame = "auto";
  int episode = 0;
  int frame_index = 0;
  // Episodes scanned by the auto selector.
  int scan_episodes = 5;
  int cells = 101;
  double range = 0.25;
  int samples = 7;
};

struct RunConfig {
  std::uint64_t seed = 1;
  bool quick = false;
  std::string out;
  GameConfig game;
  ModelConfig model;
  TrainConfig train;
  AttackOptions attack;
  RetrainOptions retrain;
  BoundaryOptions boundary;

  // Throws ConfigError.
  void Validate() const;
  // Reference mode: 42x42 frames, conv network, fixed attack magnitudes.
  // Quick mode: 21x21 frames, MLP, single worker, calibrated magnitudes.
  static RunConfig Defaults(bool quick);
};

nlohmann::json ToJson(const RunConfig& config);
// Overlays `j` onto RunConfig::Defaults(quick), where quick is read from the
// document itself unless `force_quick` is set. Unknown keys are rejected.
RunConfig RunConfigFromJson(const nlohmann::json& j, bool force_quick = false);

// Thrown by the pipelines when training ends without reaching the plateau.
class NonConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// --- train -----------------------------------------------------------------

// Artifacts: checkpoint.bin, metrics.jsonl, training_curve.svg and, with
// train.checkpoint_every > 0, checkpoints/step_<N>.bin.
TrainResult RunTrain(const RunConfig& config, const std::string& dir);

// --- attack ----------------------------------------------------------------

struct AttackReport {
  MagnitudeSweep fgsm;
  MagnitudeSweep noise;
  double epsilon = 0.0;
  std::vector<StrategyRow> strategies;  // every, periodic clean, reuse, VF
  ThresholdCalibration vf;
};

// Returns the configured magnitude, or calibrates it (filling `sweep`).
// Throws std::runtime_error if no sweep entry halves the clean score.
double ResolveMagnitude(const RunConfig& config, const ParamSet& params,
                        double configured, MagnitudeSweep* sweep);

// Artifacts: sweep_fgsm.csv, sweep_uniform.csv, strategies.csv,
// sweep.svg, strategies.svg, metrics.jsonl.
AttackReport RunAttackSuite(const RunConfig& config,
                            const Checkpoint& checkpoint,
                            const std::string& dir);

// Single evaluation. Artifacts: summary.csv (strategy table with one row),
// metrics.jsonl, episodes.svg.
StrategyRow RunSingleAttack(const RunConfig& config,
                            const Checkpoint& checkpoint,
                            const AttackConfig& attack, const std::string& dir);

// --- retrain ---------------------------------------------------------------

struct RetrainReport {
  double epsilon = 0.0;
  double noise_magnitude = 0.0;
  RetrainOutcome fgsm;
  RetrainOutcome noise;
  std::vector<ResilienceCell> cells;
};

// Re-trains the baseline on FGSM at epsilon and on uniform noise, then
// evaluates {baseline, fgsm, noise} x {clean, FGSM at each eval multiplier}.
// Artifacts: retrained_fgsm.bin, retrained_uniform.bin, resilience.csv,
// metrics_fgsm.jsonl, metrics_uniform.jsonl, resilience.svg.
RetrainReport RunRetrain(const RunConfig& config, const Checkpoint& baseline,
                         const std::string& dir);

// --- boundary --------------------------------------------------------------

struct FrameChoice {
  int episode = 0;
  int frame_index = 0;
  Frame frame;
  DirectionPair pair;
  GridAxes axes;
};

// First frame, scanning clean evaluation episodes in order, whose action
// grid would show different actions at the origin and adversarial cells.
std::optional<FrameChoice> SelectFlipFrame(const ParamSet& params,
                                           const GameConfig& game,
                                           const BoundaryOptions& options,
                                           double epsilon, std::uint64_t seed);

// The frame at (episode, frame_index) of the clean evaluation rollout.
// Throws std::out_of_range if the episode is shorter, ZeroGradientError if
// FGSM vanishes there.
FrameChoice SelectIndexedFrame(const ParamSet& params, const GameConfig& game,
                               const BoundaryOptions& options, double epsilon,
                               std::uint64_t seed);

struct BoundaryReport {
  FrameChoice choice;
  double epsilon = 0.0;
  ActionGrid raw;
  ActionGrid semantic;
};

// Artifacts: grid_raw.csv, grid_semantic.csv, grid_raw.ppm,
// grid_semantic.ppm, legend.csv.
BoundaryReport RunBoundary(const RunConfig& config,
                           const Checkpoint& checkpoint,
                           const std::string& dir);

}  // namespace advpong

#endif  // ADVPONG_EXPERIMENT_H_
