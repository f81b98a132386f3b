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

#include "advpong/actor_critic.h"

#include <chrono>
#include <cmath>
#include <deque>
#include <exception>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "advpong/json_util.h"

namespace advpong {
namespace {

// log softmax with max subtraction; finite for finite logits.
Logits LogSoftmax(const Logits& z) {
  const double m = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double v : z) sum += std::exp(v - m);
  const double lse = m + std::log(sum);
  Logits out{};
  for (int i = 0; i < kNumActions; ++i) out[i] = z[i] - lse;
  return out;
}

void RequireFinite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw std::runtime_error(std::string("a3c: non-finite ") + what);
  }
}

}  // namespace

void TrainConfig::Validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("train config: ") + what);
  };
  require(gamma > 0.0 && gamma <= 1.0, "gamma must be in (0, 1]");
  require(n_steps >= 1, "n_steps must be >= 1");
  require(entropy_coef >= 0.0 && value_coef >= 0.0,
          "coefficients must be >= 0");
  require(learning_rate > 0.0, "learning_rate must be > 0");
  require(rms_decay > 0.0 && rms_decay < 1.0, "rms_decay must be in (0, 1)");
  require(rms_epsilon > 0.0, "rms_epsilon must be > 0");
  require(workers >= 1, "workers must be >= 1");
  require(envs_per_worker >= 1, "envs_per_worker must be >= 1");
  require(total_steps >= 0, "total_steps must be >= 0");
  require(plateau_window >= 1, "plateau_window must be >= 1");
  require(checkpoint_every >= 0, "checkpoint_every must be >= 0");
}

nlohmann::json ToJson(const TrainConfig& c) {
  return {{"gamma", c.gamma},
          {"n_steps", c.n_steps},
          {"entropy_coef", c.entropy_coef},
          {"value_coef", c.value_coef},
          {"learning_rate", c.learning_rate},
          {"rms_decay", c.rms_decay},
          {"rms_epsilon", c.rms_epsilon},
          {"max_grad_norm", c.max_grad_norm},
          {"workers", c.workers},
          {"envs_per_worker", c.envs_per_worker},
          {"total_steps", c.total_steps},
          {"seed", c.seed},
          {"plateau_window", c.plateau_window},
          {"plateau_score", c.plateau_score},
          {"stop_on_plateau", c.stop_on_plateau},
          {"checkpoint_every", c.checkpoint_every}};
}

TrainConfig TrainConfigFromJson(const nlohmann::json& j, TrainConfig c) {
  const std::string s = "train";
  RejectUnknownKeys(
      j,
      {"gamma", "n_steps", "entropy_coef", "value_coef", "learning_rate",
       "rms_decay", "rms_epsilon", "max_grad_norm", "workers",
       "envs_per_worker", "total_steps", "seed", "plateau_window",
       "plateau_score", "stop_on_plateau", "checkpoint_every"},
      s);
  ReadKey(j, "gamma", c.gamma, s);
  ReadKey(j, "n_steps", c.n_steps, s);
  ReadKey(j, "entropy_coef", c.entropy_coef, s);
  ReadKey(j, "value_coef", c.value_coef, s);
  ReadKey(j, "learning_rate", c.learning_rate, s);
  ReadKey(j, "rms_decay", c.rms_decay, s);
  ReadKey(j, "rms_epsilon", c.rms_epsilon, s);
  ReadKey(j, "max_grad_norm", c.max_grad_norm, s);
  ReadKey(j, "workers", c.workers, s);
  ReadKey(j, "envs_per_worker", c.envs_per_worker, s);
  ReadKey(j, "total_steps", c.total_steps, s);
  ReadKey(j, "seed", c.seed, s);
  ReadKey(j, "plateau_window", c.plateau_window, s);
  ReadKey(j, "plateau_score", c.plateau_score, s);
  ReadKey(j, "stop_on_plateau", c.stop_on_plateau, s);
  ReadKey(j, "checkpoint_every", c.checkpoint_every, s);
  c.Validate();
  return c;
}

std::vector<double> NStepReturns(std::span<const double> rewards,
                                 double bootstrap, double gamma) {
  if (rewards.empty())
    throw std::invalid_argument("n-step returns: no rewards");
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("n-step returns: gamma outside [0, 1]");
  }
  std::vector<double> returns(rewards.size());
  double running = bootstrap;
  for (std::size_t t = rewards.size(); t-- > 0;) {
    running = rewards[t] + gamma * running;
    returns[t] = running;
  }
  return returns;
}

A3cLossResult A3cLoss(const ParamSet& params, const Trajectory& trajectory,
                      const TrainConfig& config) {
  if (trajectory.steps.empty())
    throw std::invalid_argument("a3c: empty trajectory");
  std::vector<double> rewards;
  rewards.reserve(trajectory.steps.size());
  for (const TrajectoryStep& s : trajectory.steps) rewards.push_back(s.reward);
  const double bootstrap = trajectory.terminal ? 0.0 : trajectory.bootstrap;
  const std::vector<double> returns =
      NStepReturns(rewards, bootstrap, config.gamma);

  A3cLossResult result;
  result.grads = ParamSet::Zeros(params.architecture());
  for (std::size_t t = 0; t < trajectory.steps.size(); ++t) {
    const TrajectoryStep& step = trajectory.steps[t];
    const double ret = returns[t];
    double policy_term = 0.0, value_term = 0.0, entropy = 0.0;
    auto loss = [&](const PolicyOutput& out) {
      const Logits logp = LogSoftmax(out.logits);
      const Probabilities p = Softmax(out.logits);
      const double advantage = ret - out.value;
      double h = 0.0;
      for (int a = 0; a < kNumActions; ++a) h -= p[a] * logp[a];
      policy_term = -logp[step.action] * advantage;
      value_term = config.value_coef * advantage * advantage;
      entropy = h;
      LossGrad lg;
      lg.loss = policy_term + value_term - config.entropy_coef * h;
      for (int a = 0; a < kNumActions; ++a) {
        const double onehot = a == step.action ? 1.0 : 0.0;
        lg.d_logits[a] = advantage * (p[a] - onehot) +
                         config.entropy_coef * p[a] * (logp[a] + h);
      }
      lg.d_value = -2.0 * config.value_coef * advantage;
      RequireFinite(lg.loss, "loss");
      return lg;
    };
    result.loss += Backward(params, step.input, loss, &result.grads, nullptr);
    result.policy_loss += policy_term;
    result.value_loss += value_term;
    result.entropy += entropy;
  }
  if (!result.grads.AllFinite())
    throw std::runtime_error("a3c: non-finite gradient");
  return result;
}

Action SampleAction(const Probabilities& probs, Rng& rng) {
  const double u = rng.Uniform();
  double cumulative = 0.0;
  for (int a = 0; a < kNumActions; ++a) {
    cumulative += probs[a];
    if (u < cumulative) return Action(a);
  }
  // Rounding left u above the total; take the last action with mass.
  for (int a = kNumActions - 1; a > 0; --a) {
    if (probs[a] > 0.0) return Action(a);
  }
  return Action(0);
}

Action ModeOfK(const Probabilities& probs, int k, Rng& rng) {
  if (k < 1) throw std::invalid_argument("mode of k: k must be >= 1");
  std::array<int, kNumActions> counts{};
  for (int i = 0; i < k; ++i) counts[SampleAction(probs, rng).id()] += 1;
  return Action(
      int(std::max_element(counts.begin(), counts.end()) - counts.begin()));
}

Action Act(const ParamSet& params, std::span<const double> input, Rng& rng,
           ActMode mode) {
  const Probabilities p = Softmax(Forward(params, input).logits);
  return mode.samples <= 1 ? SampleAction(p, rng)
                           : ModeOfK(p, mode.samples, rng);
}

ParamStore::ParamStore(ParamSet initial, RmsPropConfig optimizer)
    : current_(std::make_shared<const ParamSet>(std::move(initial))),
      optimizer_(optimizer) {}

std::shared_ptr<const ParamSet> ParamStore::Snapshot() const {
  std::lock_guard<std::mutex> lock(mu_);
  return current_;
}

void ParamStore::ApplyGradients(const ParamSet& grads) {
  std::lock_guard<std::mutex> lock(mu_);
  auto next = std::make_shared<ParamSet>(*current_);
  optimizer_.Step(*next, grads);
  current_ = std::move(next);
  ++updates_;
}

std::int64_t ParamStore::updates() const {
  std::lock_guard<std::mutex> lock(mu_);
  return updates_;
}

nlohmann::json ToJson(const EpisodeRecord& r) {
  return {{"episode", r.episode},
          {"steps", r.steps},
          {"reward", r.reward},
          {"score_agent", r.score_agent},
          {"score_opponent", r.score_opponent},
          {"wall_ms", r.wall_ms}};
}

TrainResult Train(const TrainConfig& config, const GameConfig& game,
                  ParamStore& store, const TrainHooks& hooks) {
  config.Validate();
  game.Validate();
  {
    const Architecture& arch = store.Snapshot()->architecture();
    if (arch.input_height != game.height || arch.input_width != game.width) {
      throw std::invalid_argument(
          "train: architecture input does not match game resolution");
    }
  }

  using Clock = std::chrono::steady_clock;
  std::mutex mu;  // guards everything below plus hook calls
  std::atomic<std::int64_t> steps{0};
  std::atomic<bool> stop{false};
  std::vector<EpisodeRecord> episodes;
  std::deque<double> recent;
  double recent_sum = 0.0;
  bool plateau = false;
  std::int64_t next_checkpoint = config.checkpoint_every;
  std::exception_ptr failure;

  auto make_checkpoint = [&](std::int64_t step_count) {
    Checkpoint c;
    c.params = *store.Snapshot();
    c.seed = config.seed;
    c.train_steps = step_count;
    c.episodes = static_cast<std::int64_t>(episodes.size());
    return c;
  };

  auto record_episode = [&](EpisodeRecord rec) {
    std::lock_guard<std::mutex> lock(mu);
    rec.episode = static_cast<std::int64_t>(episodes.size());
    episodes.push_back(rec);
    recent.push_back(rec.relative_score);
    recent_sum += rec.relative_score;
    if (int(recent.size()) > config.plateau_window) {
      recent_sum -= recent.front();
      recent.pop_front();
    }
    if (hooks.on_episode) hooks.on_episode(rec);
    if (int(recent.size()) == config.plateau_window &&
        recent_sum / config.plateau_window >= config.plateau_score) {
      plateau = true;
      if (config.stop_on_plateau) stop.store(true);
    }
  };

  struct Slot {
    Environment env;
    std::uint64_t episode = 0;
    double reward = 0.0;
    Clock::time_point start;
  };

  auto worker = [&](int worker_id) {
    try {
      const auto wid = std::uint64_t(worker_id);
      Rng policy_rng(DeriveSeed(config.seed, {kTrainPolicyStream, wid}));
      Rng noise_rng(DeriveSeed(config.seed, {kTrainNoiseStream, wid}));
      std::vector<Slot> slots;
      for (int k = 0; k < config.envs_per_worker; ++k) {
        slots.push_back({Environment(game), 0, 0.0, Clock::now()});
        slots.back().env.Reset(DeriveSeed(
            config.seed, {kTrainEnvStream, wid, std::uint64_t(k), 0}));
      }

      auto observe = [&](const Environment& env, const ParamSet& snapshot) {
        Frame f = env.Render();
        if (hooks.transform) hooks.transform(f, snapshot, noise_rng);
        return f;
      };

      while (!stop.load()) {
        std::shared_ptr<const ParamSet> snapshot = store.Snapshot();
        ParamSet grads = ParamSet::Zeros(snapshot->architecture());
        bool any = false;
        for (std::size_t k = 0; k < slots.size() && !stop.load(); ++k) {
          Slot& slot = slots[k];
          Trajectory traj;
          for (int t = 0; t < config.n_steps; ++t) {
            if (steps.fetch_add(1) >= config.total_steps) {
              steps.fetch_sub(1);
              stop.store(true);
              break;
            }
            Frame obs = observe(slot.env, *snapshot);
            const PolicyOutput out = Forward(*snapshot, obs);
            const Probabilities probs = Softmax(out.logits);
            const Action action = SampleAction(probs, policy_rng);
            const StepResult sr = slot.env.Step(action);
            slot.reward += sr.reward;
            traj.steps.push_back(
                {std::move(obs.pixels), action.id(), double(sr.reward),
                 out.value, std::log(std::max(probs[action.id()], 1e-12))});
            if (sr.done) {
              traj.terminal = true;
              EpisodeRecord rec;
              rec.worker = worker_id;
              rec.steps = sr.state.step_count;
              rec.reward = slot.reward;
              rec.score_agent = sr.state.agent_score;
              rec.score_opponent = sr.state.opponent_score;
              rec.relative_score = RelativeScore(game, sr.state);
              rec.wall_ms = std::chrono::duration<double, std::milli>(
                                Clock::now() - slot.start)
                                .count();
              record_episode(rec);
              ++slot.episode;
              slot.env.Reset(DeriveSeed(
                  config.seed,
                  {kTrainEnvStream, wid, std::uint64_t(k), slot.episode}));
              slot.reward = 0.0;
              slot.start = Clock::now();
              break;
            }
          }
          if (traj.steps.empty()) continue;
          if (!traj.terminal) {
            traj.bootstrap =
                Forward(*snapshot, observe(slot.env, *snapshot)).value;
          }
          const A3cLossResult loss = A3cLoss(*snapshot, traj, config);
          auto g = grads.values();
          auto lg = loss.grads.values();
          for (std::size_t i = 0; i < g.size(); ++i) g[i] += lg[i];
          any = true;
        }
        if (!any) break;
        store.ApplyGradients(grads);
        if (config.checkpoint_every > 0 && hooks.on_checkpoint) {
          std::lock_guard<std::mutex> lock(mu);
          const std::int64_t now = steps.load();
          if (now >= next_checkpoint) {
            hooks.on_checkpoint(make_checkpoint(now));
            while (next_checkpoint <= now)
              next_checkpoint += config.checkpoint_every;
          }
        }
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(mu);
      if (!failure) failure = std::current_exception();
      stop.store(true);
    }
  };

  if (config.workers == 1) {
    worker(0);
  } else {
    std::vector<std::thread> threads;
    for (int w = 0; w < config.workers; ++w) threads.emplace_back(worker, w);
    for (std::thread& t : threads) t.join();
  }
  if (failure) {
    try {
      std::rethrow_exception(failure);
    } catch (const std::exception& e) {
      throw std::runtime_error(std::string("training worker failed: ") +
                               e.what());
    }
  }

  TrainResult result;
  result.steps = steps.load();
  result.checkpoint = make_checkpoint(result.steps);
  result.plateau_reached = plateau;
  result.episodes = std::move(episodes);
  result.recent_score =
      recent.empty() ? 0.0 : recent_sum / double(recent.size());
  return result;
}

}  // namespace advpong
