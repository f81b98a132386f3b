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

#ifndef ADVPONG_ACTOR_CRITIC_H_
#define ADVPONG_ACTOR_CRITIC_H_

// A3C: workers each own an environment and RNG streams, collect n-step
// rollouts against a snapshot of the shared parameters, and apply the
// resulting gradients to the shared store as one atomic batch.

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "advpong/checkpoint.h"
#include "advpong/minipong.h"
#include "advpong/nn.h"
#include "advpong/rng.h"
#include "json.hpp"

namespace advpong {

struct TrainConfig {
  double gamma = 0.99;
  int n_steps = 20;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  double learning_rate = 7e-4;
  double rms_decay = 0.99;
  double rms_epsilon = 1e-5;
  double max_grad_norm = 40.0;
  int workers = 4;
  // Environments stepped in lockstep by each worker; their rollouts form one
  // gradient batch.
  int envs_per_worker = 1;
  std::int64_t total_steps = 3'000'000;
  std::uint64_t seed = 1;
  // Stop once the mean relative score of the last `plateau_window` finished
  // episodes reaches `plateau_score`.
  int plateau_window = 20;
  double plateau_score = 0.9;
  bool stop_on_plateau = true;
  // Emit a periodic checkpoint every this many environment steps (0: never).
  std::int64_t checkpoint_every = 0;

  void Validate() const;
  RmsPropConfig optimizer() const {
    return {learning_rate, rms_decay, rms_epsilon, max_grad_norm};
  }
};

nlohmann::json ToJson(const TrainConfig& config);
// Rejects unknown keys; missing keys keep the values already in `base`.
TrainConfig TrainConfigFromJson(const nlohmann::json& j, TrainConfig base = {});

struct TrajectoryStep {
  std::vector<double> input;
  int action = 0;
  double reward = 0.0;
  double value = 0.0;
  double log_prob = 0.0;
};

struct Trajectory {
  std::vector<TrajectoryStep> steps;
  // Value of the state after the last step; 0 when terminal.
  double bootstrap = 0.0;
  bool terminal = false;
};

// R_t = r_t + gamma * R_{t+1}, with R_T = bootstrap. Throws on empty input or
// gamma outside [0, 1].
std::vector<double> NStepReturns(std::span<const double> rewards,
                                 double bootstrap, double gamma);

// loss = policy_loss + value_loss - entropy_coef * entropy; value_loss
// already carries value_coef.
struct A3cLossResult {
  double loss = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  ParamSet grads;
};

// Sum over steps of
//   -log pi(a_t|x_t) * A_t + value_coef * (R_t - V(x_t))^2 - entropy_coef * H_t
// with A_t = R_t - V(x_t) held constant in the policy term. Outputs are
// recomputed from `params`. Throws std::runtime_error on non-finite values.
A3cLossResult A3cLoss(const ParamSet& params, const Trajectory& trajectory,
                      const TrainConfig& config);

struct ActMode {
  // 1 draws a single sample; k > 1 returns the most frequent of k draws.
  int samples = 1;
  static ActMode Sample() { return {1}; }
  static ActMode ModeOf(int k) { return {k}; }
};

Action SampleAction(const Probabilities& probs, Rng& rng);
// Ties go to the lowest action id.
Action ModeOfK(const Probabilities& probs, int k, Rng& rng);
Action Act(const ParamSet& params, std::span<const double> input, Rng& rng,
           ActMode mode);

// Shared parameters. Readers take immutable snapshots; writers serialize.
class ParamStore {
 public:
  ParamStore(ParamSet initial, RmsPropConfig optimizer);

  std::shared_ptr<const ParamSet> Snapshot() const;
  void ApplyGradients(const ParamSet& grads);
  std::int64_t updates() const;

 private:
  mutable std::mutex mu_;
  std::shared_ptr<const ParamSet> current_;
  RmsProp optimizer_;
  std::int64_t updates_ = 0;
};

struct EpisodeRecord {
  std::int64_t episode = 0;
  int worker = 0;
  int steps = 0;
  double reward = 0.0;
  int score_agent = 0;
  int score_opponent = 0;
  double relative_score = 0.0;
  double wall_ms = 0.0;
};

// {episode, steps, reward, score_agent, score_opponent, wall_ms}
nlohmann::json ToJson(const EpisodeRecord& record);

// Rewrites an observed frame in place before the worker acts on it and
// learns from it. `snapshot` holds the parameters the worker is acting with.
using ObservationTransform =
    std::function<void(Frame& frame, const ParamSet& snapshot, Rng& rng)>;

struct TrainHooks {
  ObservationTransform transform;
  // Called under the training lock in completion order.
  std::function<void(const EpisodeRecord&)> on_episode;
  std::function<void(const Checkpoint&)> on_checkpoint;
};

struct TrainResult {
  Checkpoint checkpoint;
  bool plateau_reached = false;
  std::int64_t steps = 0;
  std::vector<EpisodeRecord> episodes;
  // Mean relative score over the last plateau_window episodes (or fewer).
  double recent_score = 0.0;
};

// Runs config.workers threads until total_steps or the plateau rule. With a
// single worker the run is bit-reproducible for a given seed. A failing
// worker stops all others and the error is rethrown as std::runtime_error.
TrainResult Train(const TrainConfig& config, const GameConfig& game,
                  ParamStore& store, const TrainHooks& hooks = {});

}  // namespace advpong

#endif  // ADVPONG_ACTOR_CRITIC_H_
