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

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "advpong/report.h"
#include "advpong/rng.h"

namespace advpong {
namespace {

struct EpisodeOutcome {
  EpisodeMetrics metrics;
  std::vector<InjectionDecision> decisions;
};

Perturbation MakePerturbation(PerturbationKind kind, double magnitude,
                              const ParamSet& params, const Frame& clean,
                              Rng& noise) {
  switch (kind) {
    case PerturbationKind::kFgsm:
      return Fgsm(params, clean, magnitude);
    case PerturbationKind::kUniform:
      return UniformNoise(clean.width, clean.height, magnitude, noise);
    case PerturbationKind::kZero:
      break;
  }
  return ZeroPerturbation(clean.width, clean.height);
}

EpisodeOutcome RunEpisode(const ParamSet& params, const GameConfig& game,
                          const AttackConfig& attack, int episode,
                          const FrameObserver& observer) {
  const auto ep = std::uint64_t(episode);
  Environment env(game);
  env.Reset(DeriveSeed(attack.seed, {kEvalEnvStream, ep}));
  Rng policy_rng(DeriveSeed(attack.seed, {kEvalPolicyStream, ep}));
  Rng noise_rng(DeriveSeed(attack.seed, {kEvalNoiseStream, ep}));

  EpisodeOutcome outcome;
  EpisodeMetrics& m = outcome.metrics;
  m.episode = episode;
  std::optional<Perturbation> cache;
  double value_sum = 0.0;
  for (int t = 0; !env.state().done; ++t) {
    const Frame clean = env.Render();
    const PolicyOutput clean_out = Forward(params, clean);
    const InjectionDecision decision =
        attack.kind == PerturbationKind::kZero
            ? InjectionDecision::kClean
            : Decide(attack.strategy, t, clean_out.value, cache.has_value());
    if (decision == InjectionDecision::kFreshInject) {
      cache = MakePerturbation(attack.kind, attack.magnitude, params, clean,
                               noise_rng);
    }
    Frame input;
    PolicyOutput out = clean_out;
    if (decision != InjectionDecision::kClean) {
      input = Apply(clean, *cache);
      out = Forward(params, input);
      m.injections += 1;
    }
    if (observer) {
      observer({episode, t, clean_out.value, decision, &clean,
                decision == InjectionDecision::kClean ? &clean : &input});
    }
    outcome.decisions.push_back(decision);
    value_sum += clean_out.value;
    const StepResult sr =
        env.Step(SampleAction(Softmax(out.logits), policy_rng));
    m.total_reward += sr.reward;
  }
  const GameState& s = env.state();
  m.frames = s.step_count;
  m.score_agent = s.agent_score;
  m.score_opponent = s.opponent_score;
  m.relative_score = RelativeScore(game, s);
  m.mean_value = m.frames > 0 ? value_sum / m.frames : 0.0;
  return outcome;
}

void CheckCompatible(const ParamSet& params, const GameConfig& game) {
  const Architecture& arch = params.architecture();
  if (arch.input_height != game.height || arch.input_width != game.width) {
    throw std::invalid_argument(
        "checkpoint architecture expects " + std::to_string(arch.input_height) +
        "x" + std::to_string(arch.input_width) + " frames, game renders " +
        std::to_string(game.height) + "x" + std::to_string(game.width));
  }
}

}  // namespace

void AttackConfig::Validate() const {
  if (!(magnitude >= 0.0) || !std::isfinite(magnitude)) {
    throw std::invalid_argument("attack: magnitude must be finite and >= 0");
  }
  if (episodes < 1)
    throw std::invalid_argument("attack: episodes must be >= 1");
  ValidateStrategy(strategy);
}

nlohmann::json ToJson(const AttackConfig& a) {
  return {{"kind", PerturbationKindName(a.kind)},
          {"magnitude", a.magnitude},
          {"strategy", ToJson(a.strategy)},
          {"episodes", a.episodes},
          {"seed", a.seed}};
}

nlohmann::json ToJson(const EpisodeMetrics& m) {
  return {{"episode", m.episode},
          {"reward", m.total_reward},
          {"relative_score", m.relative_score},
          {"frames", m.frames},
          {"injections", m.injections},
          {"mean_value", m.mean_value},
          {"score_agent", m.score_agent},
          {"score_opponent", m.score_opponent}};
}

std::vector<EpisodeMetrics> Evaluate(const ParamSet& params,
                                     const GameConfig& game,
                                     const AttackConfig& attack,
                                     const EvaluateOptions& options) {
  attack.Validate();
  game.Validate();
  CheckCompatible(params, game);
  std::vector<EpisodeOutcome> outcomes(attack.episodes);
  const int threads = std::clamp(options.threads, 1, attack.episodes);
  if (threads == 1) {
    for (int e = 0; e < attack.episodes; ++e) {
      outcomes[e] = RunEpisode(params, game, attack, e, options.observer);
    }
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (int e = w; e < attack.episodes; e += threads) {
            outcomes[e] = RunEpisode(params, game, attack, e, options.observer);
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (std::thread& t : pool) t.join();
    for (auto& err : errors) {
      if (err) std::rethrow_exception(err);
    }
  }
  std::vector<EpisodeMetrics> metrics;
  metrics.reserve(outcomes.size());
  for (EpisodeOutcome& o : outcomes) {
    if (options.log != nullptr) {
      options.log->BeginEpisode();
      for (InjectionDecision d : o.decisions) options.log->Record(d);
    }
    metrics.push_back(o.metrics);
  }
  return metrics;
}

ScoreSummary Summarize(const std::vector<EpisodeMetrics>& episodes) {
  ScoreSummary s;
  s.episodes = static_cast<int>(episodes.size());
  if (episodes.empty()) return s;
  for (const EpisodeMetrics& m : episodes) {
    s.mean += m.relative_score;
    s.mean_injections += m.injections;
    s.mean_frames += m.frames;
  }
  s.mean /= s.episodes;
  s.mean_injections /= s.episodes;
  s.mean_frames /= s.episodes;
  double var = 0.0;
  for (const EpisodeMetrics& m : episodes) {
    var += (m.relative_score - s.mean) * (m.relative_score - s.mean);
  }
  s.stddev = s.episodes > 1 ? std::sqrt(var / (s.episodes - 1)) : 0.0;
  return s;
}

std::vector<double> CollectCleanValues(const ParamSet& params,
                                       const GameConfig& game, int episodes,
                                       std::uint64_t seed) {
  AttackConfig clean;
  clean.episodes = episodes;
  clean.seed = seed;
  std::vector<double> values;
  EvaluateOptions options;
  options.observer = [&](const FrameRecord& r) {
    values.push_back(r.clean_value);
  };
  Evaluate(params, game, clean, options);
  return values;
}

ObservationTransform PerturbEveryFrame(PerturbationKind kind,
                                       double magnitude) {
  if (!(magnitude >= 0.0))
    throw std::invalid_argument("retrain: magnitude must be >= 0");
  return [kind, magnitude](Frame& frame, const ParamSet& snapshot, Rng& rng) {
    if (kind == PerturbationKind::kZero || magnitude == 0.0) return;
    frame =
        Apply(frame, MakePerturbation(kind, magnitude, snapshot, frame, rng));
  };
}

RetrainOutcome Retrain(const Checkpoint& baseline, PerturbationKind kind,
                       double magnitude, const TrainConfig& config,
                       const GameConfig& game, const TrainHooks& hooks) {
  CheckCompatible(baseline.params, game);
  ParamStore store(baseline.params, config.optimizer());
  TrainHooks h = hooks;
  h.transform = PerturbEveryFrame(kind, magnitude);
  RetrainOutcome out;
  out.train = Train(config, game, store, h);
  out.checkpoint = out.train.checkpoint;
  out.checkpoint.train_steps = baseline.train_steps + out.train.steps;
  out.checkpoint.episodes = baseline.episodes + out.train.checkpoint.episodes;
  out.checkpoint.metadata = baseline.metadata;
  out.checkpoint.metadata["retrain"] = {
      {"kind", PerturbationKindName(kind)},
      {"magnitude", magnitude},
      {"steps", out.train.steps},
      {"seed", config.seed},
      {"plateau_reached", out.train.plateau_reached}};
  return out;
}

std::vector<ResilienceCell> ResilienceMatrix(
    const std::vector<LabeledParams>& policies,
    const std::vector<AttackConfig>& eval_grid, const GameConfig& game) {
  for (std::size_t i = 1; i < policies.size(); ++i) {
    if (policies[i].params.architecture() !=
        policies[0].params.architecture()) {
      throw std::invalid_argument("resilience matrix: architectures differ");
    }
  }
  std::vector<ResilienceCell> cells;
  for (const LabeledParams& p : policies) {
    for (const AttackConfig& attack : eval_grid) {
      ResilienceCell cell;
      cell.retrain = p.label;
      cell.eval_kind = attack.kind;
      cell.eval_magnitude = attack.magnitude;
      cell.score = Summarize(Evaluate(p.params, game, attack));
      cells.push_back(cell);
    }
  }
  return cells;
}

std::string ResilienceCsv(const std::vector<ResilienceCell>& cells) {
  std::ostringstream out;
  out << "retrain,eval_kind,eval_magnitude,mean_score,std_score,episodes\n";
  for (const ResilienceCell& c : cells) {
    out << c.retrain << ',' << PerturbationKindName(c.eval_kind) << ','
        << FormatDouble(c.eval_magnitude) << ',' << FormatDouble(c.score.mean)
        << ',' << FormatDouble(c.score.stddev) << ',' << c.score.episodes
        << '\n';
  }
  return out.str();
}

std::vector<StrategyRow> CompareStrategies(
    const ParamSet& params, const GameConfig& game, PerturbationKind kind,
    double magnitude, const std::vector<InjectionStrategy>& strategies,
    int episodes, std::uint64_t seed, std::vector<InjectionLog>* logs,
    std::vector<std::vector<EpisodeMetrics>>* metrics) {
  std::vector<StrategyRow> rows;
  for (const InjectionStrategy& strategy : strategies) {
    AttackConfig attack{kind, magnitude, strategy, episodes, seed};
    InjectionLog log;
    EvaluateOptions options;
    options.log = &log;
    StrategyRow row;
    row.strategy = StrategyName(strategy);
    std::vector<EpisodeMetrics> m = Evaluate(params, game, attack, options);
    row.score = Summarize(m);
    row.fraction_injected = ComputeInjectionStats(log).fraction_injected;
    rows.push_back(row);
    if (logs != nullptr) logs->push_back(std::move(log));
    if (metrics != nullptr) metrics->push_back(std::move(m));
  }
  return rows;
}

std::string StrategyCsv(const std::vector<StrategyRow>& rows) {
  std::ostringstream out;
  out << "strategy,mean_score,std_score,mean_injections,fraction_injected,"
         "mean_frames,episodes\n";
  for (const StrategyRow& r : rows) {
    out << r.strategy << ',' << FormatDouble(r.score.mean) << ','
        << FormatDouble(r.score.stddev) << ','
        << FormatDouble(r.score.mean_injections) << ','
        << FormatDouble(r.fraction_injected) << ','
        << FormatDouble(r.score.mean_frames) << ',' << r.score.episodes << '\n';
  }
  return out.str();
}

MagnitudeSweep SweepMagnitude(const ParamSet& params, const GameConfig& game,
                              PerturbationKind kind, std::vector<double> grid,
                              int episodes, std::uint64_t seed) {
  std::sort(grid.begin(), grid.end());
  MagnitudeSweep sweep;
  AttackConfig clean;
  clean.episodes = episodes;
  clean.seed = seed;
  sweep.clean = Summarize(Evaluate(params, game, clean));
  for (double magnitude : grid) {
    AttackConfig attack{kind, magnitude, EveryFrame{}, episodes, seed};
    const ScoreSummary s = Summarize(Evaluate(params, game, attack));
    sweep.rows.emplace_back(magnitude, s);
    if (!sweep.found && sweep.clean.mean > 0.0 &&
        s.mean <= 0.5 * sweep.clean.mean) {
      sweep.found = true;
      sweep.calibrated = magnitude;
    }
  }
  return sweep;
}

std::string SweepCsv(const MagnitudeSweep& sweep, PerturbationKind kind) {
  std::ostringstream out;
  out << "kind,magnitude,mean_score,std_score,episodes\n";
  out << "none,0," << FormatDouble(sweep.clean.mean) << ','
      << FormatDouble(sweep.clean.stddev) << ',' << sweep.clean.episodes
      << '\n';
  for (const auto& [magnitude, s] : sweep.rows) {
    out << PerturbationKindName(kind) << ',' << FormatDouble(magnitude) << ','
        << FormatDouble(s.mean) << ',' << FormatDouble(s.stddev) << ','
        << s.episodes << '\n';
  }
  return out.str();
}

ThresholdCalibration CalibrateValueThreshold(
    const ParamSet& params, const GameConfig& game, PerturbationKind kind,
    double magnitude, double target_per_episode, int episodes,
    std::uint64_t seed, double initial_quantile, double tolerance,
    int max_iterations) {
  // Quantiles come from separate clean episodes; the budget is then matched on
  // the evaluation episodes themselves.
  const std::vector<double> values = CollectCleanValues(
      params, game, episodes, DeriveSeed(seed, {kCalibrationStream}));
  ThresholdCalibration best;
  best.target_per_episode = target_per_episode;
  double lo = 0.0, hi = 1.0;  // bracket on the quantile
  double q = initial_quantile;
  double best_error = INFINITY;
  for (int it = 1; it <= max_iterations; ++it) {
    const double tau = CalibrateThreshold(values, q);
    AttackConfig attack{kind, magnitude, ValueThreshold{tau}, episodes, seed};
    const ScoreSummary s = Summarize(Evaluate(params, game, attack));
    const double error = std::abs(s.mean_injections - target_per_episode) /
                         std::max(target_per_episode, 1e-12);
    if (error < best_error) {
      best_error = error;
      best.quantile = q;
      best.threshold = tau;
      best.injections_per_episode = s.mean_injections;
      best.within_tolerance = error <= tolerance;
    }
    best.iterations = it;
    if (error <= tolerance) break;
    if (s.mean_injections > target_per_episode) {
      lo = q;  // too many injections: raise the threshold
    } else {
      hi = q;
    }
    q = 0.5 * (lo + hi);
    if (q <= 0.0 || q >= 1.0) break;
  }
  return best;
}

nlohmann::json ToJson(const ThresholdCalibration& c) {
  return {{"quantile", c.quantile},
          {"threshold", c.threshold},
          {"injections_per_episode", c.injections_per_episode},
          {"target_per_episode", c.target_per_episode},
          {"iterations", c.iterations},
          {"within_tolerance", c.within_tolerance}};
}

}  // namespace advpong
