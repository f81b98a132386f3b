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

#include "advpong/experiment.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>

#include "advpong/json_util.h"
#include "advpong/perturb.h"
#include "advpong/report.h"
#include "advpong/schedule.h"

namespace advpong {
namespace {

namespace fs = std::filesystem;

std::string Join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void Require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

// Moving average over the trailing `window` entries.
std::vector<double> Trailing(const std::vector<double>& y, int window) {
  std::vector<double> out(y.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    sum += y[i];
    if (i >= std::size_t(window)) sum -= y[i - window];
    out[i] = sum / double(std::min<std::size_t>(i + 1, window));
  }
  return out;
}

Series EpisodeSeries(const std::string& label,
                     const std::vector<EpisodeMetrics>& m) {
  Series s{label, {}, {}};
  for (const EpisodeMetrics& e : m) s.y.push_back(e.relative_score);
  return s;
}

void WriteMetrics(JsonlWriter& out, const std::string& condition,
                  const std::vector<EpisodeMetrics>& metrics) {
  for (const EpisodeMetrics& m : metrics) {
    nlohmann::json j = ToJson(m);
    j["condition"] = condition;
    out.Write(j);
  }
}

std::string Label(PerturbationKind kind, double magnitude) {
  if (kind == PerturbationKind::kZero) return "none";
  return std::string(PerturbationKindName(kind)) + "@" +
         FormatDouble(magnitude);
}

}  // namespace

nlohmann::json ToJson(const GameConfig& g) {
  return {{"width", g.width},
          {"height", g.height},
          {"game_point", g.game_point},
          {"max_steps", g.max_steps},
          {"paddle_height", g.paddle_height},
          {"paddle_width", g.paddle_width},
          {"paddle_margin", g.paddle_margin},
          {"paddle_speed", g.paddle_speed},
          {"ball_size", g.ball_size},
          {"ball_speed", g.ball_speed},
          {"max_bounce_angle", g.max_bounce_angle},
          {"max_serve_angle", g.max_serve_angle},
          {"opponent_speed", g.opponent_speed},
          {"opponent_aim_error", g.opponent_aim_error},
          {"ball_trail", g.ball_trail}};
}

GameConfig GameConfigFromJson(const nlohmann::json& j, GameConfig g) {
  const std::string s = "game";
  RejectUnknownKeys(
      j,
      {"width", "height", "game_point", "max_steps", "paddle_height",
       "paddle_width", "paddle_margin", "paddle_speed", "ball_size",
       "ball_speed", "max_bounce_angle", "max_serve_angle", "opponent_speed",
       "opponent_aim_error", "ball_trail"},
      s);
  ReadKey(j, "width", g.width, s);
  ReadKey(j, "height", g.height, s);
  ReadKey(j, "game_point", g.game_point, s);
  ReadKey(j, "max_steps", g.max_steps, s);
  ReadKey(j, "paddle_height", g.paddle_height, s);
  ReadKey(j, "paddle_width", g.paddle_width, s);
  ReadKey(j, "paddle_margin", g.paddle_margin, s);
  ReadKey(j, "paddle_speed", g.paddle_speed, s);
  ReadKey(j, "ball_size", g.ball_size, s);
  ReadKey(j, "ball_speed", g.ball_speed, s);
  ReadKey(j, "max_bounce_angle", g.max_bounce_angle, s);
  ReadKey(j, "max_serve_angle", g.max_serve_angle, s);
  ReadKey(j, "opponent_speed", g.opponent_speed, s);
  ReadKey(j, "opponent_aim_error", g.opponent_aim_error, s);
  ReadKey(j, "ball_trail", g.ball_trail, s);
  try {
    g.Validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return g;
}

Architecture ModelConfig::Build(const GameConfig& game) const {
  if (kind == "conv") {
    Architecture a = Architecture::Reference(game.height, game.width);
    a.hidden = hidden;
    return a;
  }
  if (kind == "mlp") return Architecture::Mlp(game.height, game.width, hidden);
  throw ConfigError("model.kind must be \"conv\" or \"mlp\", got \"" + kind +
                    "\"");
}

void RunConfig::Validate() const {
  try {
    game.Validate();
    model.Build(game);
    train.Validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  Require(attack.magnitude >= 0, "attack.magnitude must be >= 0");
  Require(!attack.sweep.empty(), "attack.sweep must not be empty");
  for (double m : attack.sweep)
    Require(m > 0, "attack.sweep entries must be > 0");
  for (double m : attack.noise_multipliers) {
    Require(m > 0, "attack.noise_multipliers entries must be > 0");
  }
  for (double m : attack.noise_sweep)
    Require(m > 0, "attack.noise_sweep entries must be > 0");
  Require(!attack.noise_multipliers.empty() || !attack.noise_sweep.empty(),
          "attack.noise_multipliers and attack.noise_sweep are both empty");
  Require(attack.period >= 1, "attack.period must be >= 1");
  Require(attack.vf_quantile > 0 && attack.vf_quantile < 1,
          "attack.vf_quantile must be in (0, 1)");
  Require(attack.vf_tolerance > 0, "attack.vf_tolerance must be > 0");
  Require(attack.episodes >= 1, "attack.episodes must be >= 1");
  Require(retrain.magnitude >= 0, "retrain.magnitude must be >= 0");
  Require(retrain.noise_multiplier > 0, "retrain.noise_multiplier must be > 0");
  Require(retrain.noise_magnitude >= 0, "retrain.noise_magnitude must be >= 0");
  for (double m : retrain.eval_multipliers) {
    Require(m > 0, "retrain.eval_multipliers entries must be > 0");
  }
  for (double m : retrain.eval_magnitudes) {
    Require(m > 0, "retrain.eval_magnitudes entries must be > 0");
  }
  Require(
      !retrain.eval_multipliers.empty() || !retrain.eval_magnitudes.empty(),
      "retrain.eval_multipliers and retrain.eval_magnitudes are both empty");
  Require(retrain.total_steps >= 0, "retrain.total_steps must be >= 0");
  Require(retrain.plateau_score >= -1 && retrain.plateau_score <= 1,
          "retrain.plateau_score must be in [-1, 1]");
  Require(retrain.episodes >= 1, "retrain.episodes must be >= 1");
  Require(boundary.epsilon >= 0, "boundary.epsilon must be >= 0");
  Require(boundary.frame == "auto" || boundary.frame == "index",
          "boundary.frame must be \"auto\" or \"index\"");
  Require(boundary.episode >= 0 && boundary.frame_index >= 0,
          "boundary.episode and boundary.frame_index must be >= 0");
  Require(boundary.scan_episodes >= 1, "boundary.scan_episodes must be >= 1");
  Require(boundary.cells >= 1, "boundary.cells must be >= 1");
  Require(boundary.range > 0, "boundary.range must be > 0");
  Require(boundary.samples >= 1, "boundary.samples must be >= 1");
}

RunConfig RunConfig::Defaults(bool quick) {
  RunConfig c;
  c.quick = quick;
  c.train.n_steps = 10;
  c.train.learning_rate = 3e-3;
  c.train.plateau_score = 0.9;
  if (quick) {
    c.game = GameConfig::Quick();
    c.model.kind = "mlp";
    c.train.workers = 1;
    c.train.envs_per_worker = 8;
    c.train.total_steps = 3'000'000;
    c.retrain.total_steps = 1'500'000;
  } else {
    c.game = GameConfig::Reference();
    c.model.kind = "conv";
    c.train.workers = 4;
    c.train.envs_per_worker = 2;
    c.train.total_steps = 40'000'000;
    c.retrain.total_steps = 10'000'000;
    // Absolute magnitudes sized for 42x42 frames.
    c.attack.magnitude = 0.001;
    c.attack.sweep = {0.001, 0.005};
    c.attack.noise_sweep = {0.02, 0.05};
    c.retrain.magnitude = 0.005;
    c.retrain.noise_magnitude = 0.1;
    c.retrain.eval_magnitudes = {0.001, 0.005, 0.01};
    c.boundary.epsilon = 0.001;
  }
  return c;
}

nlohmann::json ToJson(const RunConfig& c) {
  nlohmann::json train = ToJson(c.train);
  train.erase("seed");
  return {
      {"seed", c.seed},
      {"quick", c.quick},
      {"out", c.out},
      {"game", ToJson(c.game)},
      {"model", {{"kind", c.model.kind}, {"hidden", c.model.hidden}}},
      {"train", train},
      {"attack",
       {{"magnitude", c.attack.magnitude},
        {"sweep", c.attack.sweep},
        {"noise_multipliers", c.attack.noise_multipliers},
        {"noise_sweep", c.attack.noise_sweep},
        {"period", c.attack.period},
        {"vf_quantile", c.attack.vf_quantile},
        {"vf_tolerance", c.attack.vf_tolerance},
        {"episodes", c.attack.episodes}}},
      {"retrain",
       {{"magnitude", c.retrain.magnitude},
        {"noise_multiplier", c.retrain.noise_multiplier},
        {"noise_magnitude", c.retrain.noise_magnitude},
        {"eval_multipliers", c.retrain.eval_multipliers},
        {"eval_magnitudes", c.retrain.eval_magnitudes},
        {"total_steps", c.retrain.total_steps},
        {"plateau_score", c.retrain.plateau_score},
        {"stop_on_plateau", c.retrain.stop_on_plateau},
        {"episodes", c.retrain.episodes}}},
      {"boundary",
       {{"epsilon", c.boundary.epsilon},
        {"frame", c.boundary.frame},
        {"episode", c.boundary.episode},
        {"frame_index", c.boundary.frame_index},
        {"scan_episodes", c.boundary.scan_episodes},
        {"cells", c.boundary.cells},
        {"range", c.boundary.range},
        {"samples", c.boundary.samples}}},
  };
}

RunConfig RunConfigFromJson(const nlohmann::json& j, bool force_quick) {
  RejectUnknownKeys(j,
                    {"seed", "quick", "out", "game", "model", "train", "attack",
                     "retrain", "boundary"},
                    "config");
  bool quick = false;
  ReadKey(j, "quick", quick, "config");
  RunConfig c = RunConfig::Defaults(force_quick || quick);
  ReadKey(j, "seed", c.seed, "config");
  ReadKey(j, "out", c.out, "config");
  if (j.contains("game")) c.game = GameConfigFromJson(j["game"], c.game);
  if (j.contains("model")) {
    const auto& m = j["model"];
    RejectUnknownKeys(m, {"kind", "hidden"}, "model");
    ReadKey(m, "kind", c.model.kind, "model");
    ReadKey(m, "hidden", c.model.hidden, "model");
  }
  if (j.contains("train")) {
    if (j["train"].is_object() && j["train"].contains("seed")) {
      throw ConfigError("unknown key 'train.seed' (use the top-level seed)");
    }
    c.train = TrainConfigFromJson(j["train"], c.train);
  }
  if (j.contains("attack")) {
    const auto& a = j["attack"];
    const std::string s = "attack";
    RejectUnknownKeys(a,
                      {"magnitude", "sweep", "noise_multipliers", "noise_sweep",
                       "period", "vf_quantile", "vf_tolerance", "episodes"},
                      s);
    ReadKey(a, "magnitude", c.attack.magnitude, s);
    ReadKey(a, "sweep", c.attack.sweep, s);
    ReadKey(a, "noise_multipliers", c.attack.noise_multipliers, s);
    ReadKey(a, "noise_sweep", c.attack.noise_sweep, s);
    ReadKey(a, "period", c.attack.period, s);
    ReadKey(a, "vf_quantile", c.attack.vf_quantile, s);
    ReadKey(a, "vf_tolerance", c.attack.vf_tolerance, s);
    ReadKey(a, "episodes", c.attack.episodes, s);
  }
  if (j.contains("retrain")) {
    const auto& r = j["retrain"];
    const std::string s = "retrain";
    RejectUnknownKeys(r,
                      {"magnitude", "noise_multiplier", "noise_magnitude",
                       "eval_multipliers", "eval_magnitudes", "total_steps",
                       "plateau_score", "stop_on_plateau", "episodes"},
                      s);
    ReadKey(r, "magnitude", c.retrain.magnitude, s);
    ReadKey(r, "noise_multiplier", c.retrain.noise_multiplier, s);
    ReadKey(r, "noise_magnitude", c.retrain.noise_magnitude, s);
    ReadKey(r, "eval_multipliers", c.retrain.eval_multipliers, s);
    ReadKey(r, "eval_magnitudes", c.retrain.eval_magnitudes, s);
    ReadKey(r, "total_steps", c.retrain.total_steps, s);
    ReadKey(r, "plateau_score", c.retrain.plateau_score, s);
    ReadKey(r, "stop_on_plateau", c.retrain.stop_on_plateau, s);
    ReadKey(r, "episodes", c.retrain.episodes, s);
  }
  if (j.contains("boundary")) {
    const auto& b = j["boundary"];
    const std::string s = "boundary";
    RejectUnknownKeys(b,
                      {"epsilon", "frame", "episode", "frame_index",
                       "scan_episodes", "cells", "range", "samples"},
                      s);
    ReadKey(b, "epsilon", c.boundary.epsilon, s);
    ReadKey(b, "frame", c.boundary.frame, s);
    ReadKey(b, "episode", c.boundary.episode, s);
    ReadKey(b, "frame_index", c.boundary.frame_index, s);
    ReadKey(b, "scan_episodes", c.boundary.scan_episodes, s);
    ReadKey(b, "cells", c.boundary.cells, s);
    ReadKey(b, "range", c.boundary.range, s);
    ReadKey(b, "samples", c.boundary.samples, s);
  }
  c.train.seed = c.seed;
  c.Validate();
  return c;
}

TrainResult RunTrain(const RunConfig& config, const std::string& dir) {
  config.Validate();
  TrainConfig tc = config.train;
  tc.seed = config.seed;
  const Architecture arch = config.model.Build(config.game);
  ParamStore store(ParamSet::Initialize(arch, tc.seed), tc.optimizer());

  std::optional<JsonlWriter> metrics;
  if (!dir.empty()) {
    fs::create_directories(dir);
    metrics.emplace(Join(dir, "metrics.jsonl"));
  }
  nlohmann::json meta = {
      {"tool_version", kToolVersion},
      {"game", ToJson(config.game)},
      {"model",
       {{"kind", config.model.kind}, {"hidden", config.model.hidden}}}};
  TrainHooks hooks;
  hooks.on_episode = [&](const EpisodeRecord& r) {
    if (metrics) metrics->Write(ToJson(r));
  };
  if (!dir.empty() && tc.checkpoint_every > 0) {
    fs::create_directories(Join(dir, "checkpoints"));
    hooks.on_checkpoint = [&](const Checkpoint& c) {
      Checkpoint copy = c;
      copy.metadata = meta;
      SaveCheckpoint(
          copy, Join(dir, "checkpoints/step_" + std::to_string(c.train_steps) +
                              ".bin"));
    };
  }
  TrainResult result = Train(tc, config.game, store, hooks);
  meta["plateau_reached"] = result.plateau_reached;
  meta["recent_score"] = result.recent_score;
  result.checkpoint.metadata = meta;
  if (!dir.empty()) {
    SaveCheckpoint(result.checkpoint, Join(dir, "checkpoint.bin"));
    std::vector<double> scores;
    for (const EpisodeRecord& r : result.episodes)
      scores.push_back(r.relative_score);
    WriteTextFile(
        Join(dir, "training_curve.svg"),
        LinePlotSvg(
            "training", "episode", "relative score",
            {{"episode", scores, {}},
             {"trailing mean", Trailing(scores, tc.plateau_window), {}}}));
  }
  return result;
}

double ResolveMagnitude(const RunConfig& config, const ParamSet& params,
                        double configured, MagnitudeSweep* sweep) {
  MagnitudeSweep local;
  MagnitudeSweep& s = sweep != nullptr ? *sweep : local;
  if (configured > 0.0 && sweep == nullptr) return configured;
  s = SweepMagnitude(params, config.game, PerturbationKind::kFgsm,
                     config.attack.sweep, config.attack.episodes, config.seed);
  if (configured > 0.0) return configured;
  if (!s.found) {
    throw std::runtime_error(
        "no FGSM magnitude in attack.sweep halves the clean score (clean "
        "mean " +
        FormatDouble(s.clean.mean) + "); extend the sweep or set a magnitude");
  }
  return s.calibrated;
}

AttackReport RunAttackSuite(const RunConfig& config,
                            const Checkpoint& checkpoint,
                            const std::string& dir) {
  config.Validate();
  const ParamSet& params = checkpoint.params;
  const int episodes = config.attack.episodes;
  AttackReport report;
  report.epsilon =
      ResolveMagnitude(config, params, config.attack.magnitude, &report.fgsm);
  std::vector<double> noise_grid = config.attack.noise_sweep;
  if (noise_grid.empty()) {
    for (double m : config.attack.noise_multipliers)
      noise_grid.push_back(m * report.epsilon);
  }
  report.noise = SweepMagnitude(params, config.game, PerturbationKind::kUniform,
                                noise_grid, episodes, config.seed);

  const int n = config.attack.period;
  std::vector<std::vector<EpisodeMetrics>> metrics;
  report.strategies = CompareStrategies(
      params, config.game, PerturbationKind::kFgsm, report.epsilon,
      {EveryFrame{}, Periodic{n, PeriodicFill::kClean},
       Periodic{n, PeriodicFill::kReuse}},
      episodes, config.seed, nullptr, &metrics);
  report.vf = CalibrateValueThreshold(
      params, config.game, PerturbationKind::kFgsm, report.epsilon,
      report.strategies[1].score.mean_injections, episodes, config.seed,
      config.attack.vf_quantile, config.attack.vf_tolerance);
  const auto vf_rows =
      CompareStrategies(params, config.game, PerturbationKind::kFgsm,
                        report.epsilon, {ValueThreshold{report.vf.threshold}},
                        episodes, config.seed, nullptr, &metrics);
  report.strategies.push_back(vf_rows[0]);

  if (!dir.empty()) {
    fs::create_directories(dir);
    WriteTextFile(Join(dir, "sweep_fgsm.csv"),
                  SweepCsv(report.fgsm, PerturbationKind::kFgsm));
    WriteTextFile(Join(dir, "sweep_uniform.csv"),
                  SweepCsv(report.noise, PerturbationKind::kUniform));
    WriteTextFile(Join(dir, "strategies.csv"), StrategyCsv(report.strategies));
    JsonlWriter out(Join(dir, "metrics.jsonl"));
    std::vector<Series> curves;
    for (std::size_t i = 0; i < report.strategies.size(); ++i) {
      WriteMetrics(out, report.strategies[i].strategy, metrics[i]);
      curves.push_back(
          EpisodeSeries(report.strategies[i].strategy, metrics[i]));
    }
    WriteTextFile(
        Join(dir, "strategies.svg"),
        LinePlotSvg("FGSM eps=" + FormatDouble(report.epsilon) + " by strategy",
                    "episode", "relative score", curves));
    Series fgsm{"fgsm", {}, {}}, noise{"uniform", {}, {}};
    for (const auto& [m, s] : report.fgsm.rows) {
      fgsm.x.push_back(std::log10(m));
      fgsm.y.push_back(s.mean);
    }
    for (const auto& [m, s] : report.noise.rows) {
      noise.x.push_back(std::log10(m));
      noise.y.push_back(s.mean);
    }
    WriteTextFile(Join(dir, "sweep.svg"),
                  LinePlotSvg("every-frame attack", "log10 magnitude",
                              "mean relative score", {fgsm, noise}));
  }
  return report;
}

StrategyRow RunSingleAttack(const RunConfig& config,
                            const Checkpoint& checkpoint,
                            const AttackConfig& attack,
                            const std::string& dir) {
  config.Validate();
  attack.Validate();
  InjectionLog log;
  EvaluateOptions options;
  options.log = &log;
  const std::vector<EpisodeMetrics> m =
      Evaluate(checkpoint.params, config.game, attack, options);
  StrategyRow row;
  row.strategy = attack.kind == PerturbationKind::kZero
                     ? "none"
                     : StrategyName(attack.strategy);
  row.score = Summarize(m);
  row.fraction_injected = ComputeInjectionStats(log).fraction_injected;
  if (!dir.empty()) {
    fs::create_directories(dir);
    WriteTextFile(Join(dir, "summary.csv"), StrategyCsv({row}));
    JsonlWriter out(Join(dir, "metrics.jsonl"));
    WriteMetrics(out, Label(attack.kind, attack.magnitude) + "/" + row.strategy,
                 m);
    WriteTextFile(Join(dir, "episodes.svg"),
                  LinePlotSvg(row.strategy, "episode", "relative score",
                              {EpisodeSeries(row.strategy, m)}));
  }
  return row;
}

RetrainReport RunRetrain(const RunConfig& config, const Checkpoint& baseline,
                         const std::string& dir) {
  config.Validate();
  RetrainReport report;
  report.epsilon = ResolveMagnitude(config, baseline.params,
                                    config.retrain.magnitude, nullptr);
  report.noise_magnitude =
      config.retrain.noise_magnitude > 0.0
          ? config.retrain.noise_magnitude
          : config.retrain.noise_multiplier * report.epsilon;
  if (!dir.empty()) fs::create_directories(dir);

  auto run = [&](PerturbationKind kind, double magnitude,
                 const std::string& name) {
    TrainConfig tc = config.train;
    tc.total_steps = config.retrain.total_steps;
    tc.plateau_score = config.retrain.plateau_score;
    tc.stop_on_plateau = config.retrain.stop_on_plateau;
    tc.seed = DeriveSeed(config.seed, {kRetrainStream, std::uint64_t(kind)});
    std::optional<JsonlWriter> metrics;
    if (!dir.empty()) metrics.emplace(Join(dir, "metrics_" + name + ".jsonl"));
    TrainHooks hooks;
    hooks.on_episode = [&](const EpisodeRecord& r) {
      if (metrics) metrics->Write(ToJson(r));
    };
    RetrainOutcome out =
        Retrain(baseline, kind, magnitude, tc, config.game, hooks);
    if (!dir.empty())
      SaveCheckpoint(out.checkpoint, Join(dir, "retrained_" + name + ".bin"));
    return out;
  };
  report.fgsm = run(PerturbationKind::kFgsm, report.epsilon, "fgsm");
  report.noise =
      run(PerturbationKind::kUniform, report.noise_magnitude, "uniform");

  std::vector<AttackConfig> grid;
  grid.push_back({PerturbationKind::kZero, 0.0, EveryFrame{},
                  config.retrain.episodes, config.seed});
  std::vector<double> eval = config.retrain.eval_magnitudes;
  if (eval.empty()) {
    for (double m : config.retrain.eval_multipliers)
      eval.push_back(m * report.epsilon);
  }
  for (double m : eval) {
    grid.push_back({PerturbationKind::kFgsm, m, EveryFrame{},
                    config.retrain.episodes, config.seed});
  }
  report.cells = ResilienceMatrix(
      {{"baseline", baseline.params},
       {Label(PerturbationKind::kFgsm, report.epsilon),
        report.fgsm.checkpoint.params},
       {Label(PerturbationKind::kUniform, report.noise_magnitude),
        report.noise.checkpoint.params}},
      grid, config.game);
  if (!dir.empty()) {
    WriteTextFile(Join(dir, "resilience.csv"), ResilienceCsv(report.cells));
    std::map<std::string, Series> by_policy;
    std::vector<std::string> order;
    for (const ResilienceCell& c : report.cells) {
      if (c.eval_kind != PerturbationKind::kFgsm) continue;
      if (!by_policy.count(c.retrain)) order.push_back(c.retrain);
      Series& s = by_policy[c.retrain];
      s.label = c.retrain;
      s.x.push_back(c.eval_magnitude);
      s.y.push_back(c.score.mean);
    }
    std::vector<Series> series;
    for (const std::string& k : order) series.push_back(by_policy[k]);
    WriteTextFile(Join(dir, "resilience.svg"),
                  LinePlotSvg("FGSM resilience", "eval epsilon",
                              "mean relative score", series));
  }
  return report;
}

namespace {

// Clean frames of the first `episodes` evaluation episodes, by episode.
std::vector<std::vector<Frame>> CleanFrames(const ParamSet& params,
                                            const GameConfig& game,
                                            int episodes, std::uint64_t seed) {
  std::vector<std::vector<Frame>> frames(episodes);
  AttackConfig clean;
  clean.episodes = episodes;
  clean.seed = seed;
  EvaluateOptions options;
  options.observer = [&](const FrameRecord& r) {
    frames[r.episode].push_back(*r.clean);
  };
  Evaluate(params, game, clean, options);
  return frames;
}

GridAxes BaseAxes(const BoundaryOptions& o) {
  GridAxes axes;
  axes.u_min = axes.v_min = -o.range;
  axes.u_max = axes.v_max = o.range;
  axes.u_cells = axes.v_cells = o.cells;
  return axes;
}

FrameChoice MakeChoice(const ParamSet& params, const BoundaryOptions& o,
                       const Frame& frame, int episode, int index,
                       double epsilon, std::uint64_t seed) {
  Rng rng(DeriveSeed(seed, {kBoundaryDirectionStream, std::uint64_t(episode),
                            std::uint64_t(index)}));
  FrameChoice c;
  c.episode = episode;
  c.frame_index = index;
  c.frame = frame;
  c.pair = Directions(params, frame, epsilon, rng);
  c.axes = FitAxes(BaseAxes(o), c.pair.adversarial_u);
  return c;
}

}  // namespace

std::optional<FrameChoice> SelectFlipFrame(const ParamSet& params,
                                           const GameConfig& game,
                                           const BoundaryOptions& o,
                                           double epsilon, std::uint64_t seed) {
  const auto frames = CleanFrames(params, game, o.scan_episodes, seed);
  for (int e = 0; e < int(frames.size()); ++e) {
    for (int t = 0; t < int(frames[e].size()); ++t) {
      FrameChoice c;
      try {
        c = MakeChoice(params, o, frames[e][t], e, t, epsilon, seed);
      } catch (const ZeroGradientError&) {
        continue;
      }
      const std::vector<double> u = c.axes.UValues(), v = c.axes.VValues();
      const GridMarker origin = LocateMarker(u, v, 0.0, 0.0);
      const GridMarker adv = LocateMarker(u, v, c.pair.adversarial_u, 0.0);
      const Action a0 = GridCellAction(
          params, c.frame, c.pair, u[origin.u_index], v[origin.v_index],
          origin.u_index, origin.v_index, o.samples, seed);
      const Action a1 = GridCellAction(params, c.frame, c.pair, u[adv.u_index],
                                       v[adv.v_index], adv.u_index, adv.v_index,
                                       o.samples, seed);
      if (a0 != a1) return c;
    }
  }
  return std::nullopt;
}

FrameChoice SelectIndexedFrame(const ParamSet& params, const GameConfig& game,
                               const BoundaryOptions& o, double epsilon,
                               std::uint64_t seed) {
  const auto frames = CleanFrames(params, game, o.episode + 1, seed);
  const auto& episode = frames[o.episode];
  if (o.frame_index >= int(episode.size())) {
    throw std::out_of_range("episode " + std::to_string(o.episode) +
                            " has only " + std::to_string(episode.size()) +
                            " frames");
  }
  try {
    return MakeChoice(params, o, episode[o.frame_index], o.episode,
                      o.frame_index, epsilon, seed);
  } catch (const ZeroGradientError& e) {
    throw ZeroGradientError("frame " + std::to_string(o.frame_index) +
                            " of episode " + std::to_string(o.episode) + ": " +
                            e.what());
  }
}

BoundaryReport RunBoundary(const RunConfig& config,
                           const Checkpoint& checkpoint,
                           const std::string& dir) {
  config.Validate();
  const ParamSet& params = checkpoint.params;
  const BoundaryOptions& o = config.boundary;
  BoundaryReport report;
  report.epsilon = ResolveMagnitude(config, params, o.epsilon, nullptr);
  if (o.frame == "auto") {
    std::optional<FrameChoice> c =
        SelectFlipFrame(params, config.game, o, report.epsilon, config.seed);
    if (!c) {
      throw std::runtime_error("no frame in the first " +
                               std::to_string(o.scan_episodes) +
                               " episodes flips the action at epsilon " +
                               FormatDouble(report.epsilon));
    }
    report.choice = std::move(*c);
  } else {
    report.choice =
        SelectIndexedFrame(params, config.game, o, report.epsilon, config.seed);
  }
  report.raw =
      ComputeActionGrid(params, report.choice.frame, report.choice.pair,
                        report.choice.axes, o.samples, config.seed);
  report.semantic = SemanticGrid(report.raw);
  if (!dir.empty()) {
    fs::create_directories(dir);
    WriteTextFile(Join(dir, "grid_raw.csv"), GridCsv(report.raw));
    WriteTextFile(Join(dir, "grid_semantic.csv"), GridCsv(report.semantic));
    WriteTextFile(Join(dir, "grid_raw.ppm"), GridPpm(report.raw));
    WriteTextFile(Join(dir, "grid_semantic.ppm"), GridPpm(report.semantic));
    WriteTextFile(Join(dir, "legend.csv"), LegendCsv());
  }
  return report;
}

}  // namespace advpong
