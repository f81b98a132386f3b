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

// advpong: train, attack, re-train and boundary-map subcommands.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "advpong/experiment.h"
#include "advpong/json_util.h"
#include "advpong/report.h"

namespace fs = std::filesystem;
using namespace advpong;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitNonConvergence = 3;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GlobalFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool quick = false;
};

struct AttackFlags {
  std::string checkpoint;
  std::string kind = "fgsm";
  std::optional<double> magnitude;
  std::string strategy = "all";
  std::string calibrate;
  std::optional<int> episodes;
};

struct BoundaryFlags {
  std::string checkpoint;
  std::string frame;
  std::optional<double> epsilon;
};

RunConfig ResolveConfig(const GlobalFlags& g) {
  nlohmann::json j = nlohmann::json::object();
  if (!g.config.empty()) {
    std::ifstream in(g.config);
    if (!in) throw UsageError("cannot read config file '" + g.config + "'");
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw UsageError("config file '" + g.config + "': " + e.what());
    }
    if (!j.is_object()) throw UsageError("config file must hold a JSON object");
  }
  if (g.seed) j["seed"] = *g.seed;
  if (!g.out.empty()) j["out"] = g.out;
  try {
    return RunConfigFromJson(j, g.quick);
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
}

// Creates the run directory; an existing non-empty directory is refused so a
// run never mixes with (or overwrites) another run's artifacts.
std::string PrepareRunDir(const RunConfig& config) {
  if (config.out.empty())
    throw UsageError("no output directory (--out or \"out\")");
  const fs::path dir(config.out);
  if (fs::exists(dir) && !(fs::is_directory(dir) && fs::is_empty(dir))) {
    throw UsageError("output directory '" + config.out +
                     "' exists and is not empty");
  }
  fs::create_directories(dir);
  // The frozen copy omits "out": it is where the run lives, not what it is.
  nlohmann::json frozen = ToJson(config);
  frozen.erase("out");
  WriteTextFile((dir / "config.json").string(), frozen.dump(2) + "\n");
  return dir.string();
}

void WriteRunJson(const std::string& dir, nlohmann::json run) {
  WriteTextFile((fs::path(dir) / "run.json").string(), run.dump(2) + "\n");
}

nlohmann::json RunHeader(const std::string& command, const RunConfig& config) {
  return {{"command", command},
          {"tool_version", kToolVersion},
          {"seed", config.seed},
          {"quick", config.quick}};
}

Checkpoint LoadInput(const std::string& path) {
  if (path.empty()) throw UsageError("--checkpoint is required");
  return LoadCheckpoint(path);
}

std::string HashHex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

nlohmann::json CheckpointInfo(const std::string& path, const Checkpoint& c) {
  return {{"path", path},
          {"params_hash", HashHex(ParamsHash(c.params))},
          {"train_steps", c.train_steps}};
}

double ParseQuantile(const std::string& s) {
  if (s.rfind("q=", 0) != 0)
    throw UsageError("--calibrate expects q=<quantile>");
  try {
    std::size_t used = 0;
    const double q = std::stod(s.substr(2), &used);
    if (used != s.size() - 2 || !(q > 0 && q < 1))
      throw std::invalid_argument(s);
    return q;
  } catch (const std::exception&) {
    throw UsageError("--calibrate quantile must be in (0, 1), got '" + s + "'");
  }
}

int CmdTrain(const GlobalFlags& g) {
  const RunConfig config = ResolveConfig(g);
  const std::string dir = PrepareRunDir(config);
  nlohmann::json run = RunHeader("train", config);
  run["train_seed"] = config.seed;
  const TrainResult r = RunTrain(config, dir);
  run["plateau_reached"] = r.plateau_reached;
  run["recent_score"] = r.recent_score;
  run["steps"] = r.steps;
  run["params_hash"] = HashHex(ParamsHash(r.checkpoint.params));
  WriteRunJson(dir, run);
  std::cout << "steps " << r.steps << " recent score " << r.recent_score
            << (r.plateau_reached ? " (plateau reached)" : " (no plateau)")
            << "\n";
  if (!r.plateau_reached) {
    std::cerr << "training did not reach the plateau score "
              << FormatDouble(config.train.plateau_score) << "\n";
    return kExitNonConvergence;
  }
  return kExitOk;
}

int CmdAttack(const GlobalFlags& g, const AttackFlags& a) {
  RunConfig config = ResolveConfig(g);
  if (a.episodes) config.attack.episodes = *a.episodes;
  if (a.magnitude) config.attack.magnitude = *a.magnitude;
  if (!a.calibrate.empty())
    config.attack.vf_quantile = ParseQuantile(a.calibrate);
  PerturbationKind kind;
  try {
    kind = ParsePerturbationKind(a.kind);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (a.strategy == "all" && kind != PerturbationKind::kFgsm) {
    throw UsageError(
        "--strategy all runs the FGSM suite; pick one strategy for --kind " +
        a.kind);
  }
  try {
    config.Validate();
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  const Checkpoint checkpoint = LoadInput(a.checkpoint);
  const std::string dir = PrepareRunDir(config);
  nlohmann::json run = RunHeader("attack", config);
  run["checkpoint"] = CheckpointInfo(a.checkpoint, checkpoint);
  run["kind"] = a.kind;
  run["strategy"] = a.strategy;

  if (a.strategy == "all") {
    const AttackReport r = RunAttackSuite(config, checkpoint, dir);
    run["epsilon"] = r.epsilon;
    run["epsilon_calibrated"] = config.attack.magnitude == 0.0;
    run["clean_mean"] = r.fgsm.clean.mean;
    run["vf"] = ToJson(r.vf);
    run["tau"] = r.vf.threshold;
    run["q"] = r.vf.quantile;
    WriteRunJson(dir, run);
    std::cout << "epsilon " << FormatDouble(r.epsilon) << "\n"
              << StrategyCsv(r.strategies);
    return kExitOk;
  }

  AttackConfig attack;
  attack.kind = kind;
  attack.episodes = config.attack.episodes;
  attack.seed = config.seed;
  const int n = config.attack.period;
  if (kind != PerturbationKind::kZero) {
    attack.magnitude = ResolveMagnitude(config, checkpoint.params,
                                        config.attack.magnitude, nullptr);
  }
  run["magnitude"] = attack.magnitude;
  if (a.strategy == "every_frame") {
    attack.strategy = EveryFrame{};
  } else if (a.strategy == "periodic_clean") {
    attack.strategy = Periodic{n, PeriodicFill::kClean};
  } else if (a.strategy == "periodic_reuse") {
    attack.strategy = Periodic{n, PeriodicFill::kReuse};
  } else if (a.strategy == "vf") {
    // Budget: the injections per episode of Periodic{n, Clean}.
    const auto blind = CompareStrategies(
        checkpoint.params, config.game, attack.kind, attack.magnitude,
        {Periodic{n, PeriodicFill::kClean}}, attack.episodes, attack.seed);
    const ThresholdCalibration c = CalibrateValueThreshold(
        checkpoint.params, config.game, attack.kind, attack.magnitude,
        blind[0].score.mean_injections, attack.episodes, attack.seed,
        config.attack.vf_quantile, config.attack.vf_tolerance);
    attack.strategy = ValueThreshold{c.threshold};
    run["vf"] = ToJson(c);
    run["tau"] = c.threshold;
    run["q"] = c.quantile;
  } else {
    throw UsageError("unknown --strategy '" + a.strategy + "'");
  }
  const StrategyRow row = RunSingleAttack(config, checkpoint, attack, dir);
  WriteRunJson(dir, run);
  std::cout << StrategyCsv({row});
  return kExitOk;
}

int CmdRetrain(const GlobalFlags& g, const std::string& checkpoint_path,
               std::optional<double> magnitude) {
  RunConfig config = ResolveConfig(g);
  if (magnitude) config.retrain.magnitude = *magnitude;
  try {
    config.Validate();
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  const Checkpoint baseline = LoadInput(checkpoint_path);
  const std::string dir = PrepareRunDir(config);
  nlohmann::json run = RunHeader("retrain", config);
  run["checkpoint"] = CheckpointInfo(checkpoint_path, baseline);
  const RetrainReport r = RunRetrain(config, baseline, dir);
  run["epsilon"] = r.epsilon;
  run["noise_magnitude"] = r.noise_magnitude;
  run["seeds"] = {
      {"fgsm",
       DeriveSeed(config.seed,
                  {kRetrainStream, std::uint64_t(PerturbationKind::kFgsm)})},
      {"uniform",
       DeriveSeed(config.seed, {kRetrainStream,
                                std::uint64_t(PerturbationKind::kUniform)})}};
  run["plateau_reached"] = {{"fgsm", r.fgsm.train.plateau_reached},
                            {"uniform", r.noise.train.plateau_reached}};
  run["params_hash"] = {
      {"fgsm", HashHex(ParamsHash(r.fgsm.checkpoint.params))},
      {"uniform", HashHex(ParamsHash(r.noise.checkpoint.params))}};
  WriteRunJson(dir, run);
  std::cout << ResilienceCsv(r.cells);
  if (!r.fgsm.train.plateau_reached || !r.noise.train.plateau_reached) {
    std::cerr << "re-training did not reach the plateau score "
              << FormatDouble(config.retrain.plateau_score) << "\n";
    return kExitNonConvergence;
  }
  return kExitOk;
}

int CmdBoundary(const GlobalFlags& g, const BoundaryFlags& b) {
  RunConfig config = ResolveConfig(g);
  if (b.epsilon) config.boundary.epsilon = *b.epsilon;
  if (!b.frame.empty()) {
    if (b.frame == "auto") {
      config.boundary.frame = "auto";
    } else {
      int e = 0, t = 0;
      char colon = 0;
      std::istringstream in(b.frame);
      if (!(in >> e >> colon >> t) || colon != ':' || !in.eof()) {
        throw UsageError("--frame expects auto or EPISODE:FRAME, got '" +
                         b.frame + "'");
      }
      config.boundary.frame = "index";
      config.boundary.episode = e;
      config.boundary.frame_index = t;
    }
  }
  try {
    config.Validate();
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  const Checkpoint checkpoint = LoadInput(b.checkpoint);
  const std::string dir = PrepareRunDir(config);
  const BoundaryReport r = RunBoundary(config, checkpoint, dir);
  nlohmann::json run = RunHeader("boundary", config);
  run["checkpoint"] = CheckpointInfo(b.checkpoint, checkpoint);
  run["epsilon"] = r.epsilon;
  run["episode"] = r.choice.episode;
  run["frame_index"] = r.choice.frame_index;
  run["adversarial_u"] = r.choice.pair.adversarial_u;
  run["origin_action"] = r.raw.at(r.raw.origin.u_index, r.raw.origin.v_index);
  run["adversarial_action"] =
      r.raw.at(r.raw.adversarial.u_index, r.raw.adversarial.v_index);
  WriteRunJson(dir, run);
  std::cout << "episode " << r.choice.episode << " frame "
            << r.choice.frame_index << " epsilon " << FormatDouble(r.epsilon)
            << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adversarial attacks on an actor-critic Mini-Pong agent"};
  app.require_subcommand(1);
  GlobalFlags g;
  auto add_global = [&](CLI::App* sub) {
    sub->add_option("--config", g.config, "JSON config file");
    sub->add_option("--seed", g.seed, "Root seed (overrides the config)");
    sub->add_option("--out", g.out, "Run directory (must be new or empty)");
    sub->add_flag("--quick", g.quick, "Quick mode: 21x21 frames, MLP policy");
  };
  CLI::App* train = app.add_subcommand("train", "Train a baseline agent");
  add_global(train);

  AttackFlags a;
  CLI::App* attack =
      app.add_subcommand("attack", "Evaluate a checkpoint under attack");
  add_global(attack);
  attack->add_option("--checkpoint", a.checkpoint, "Checkpoint to attack")
      ->required();
  attack->add_option("--kind", a.kind, "none | fgsm | uniform")
      ->check(CLI::IsMember({"none", "fgsm", "uniform"}));
  attack->add_option("--magnitude", a.magnitude,
                     "Perturbation magnitude (0: calibrate)");
  attack
      ->add_option("--strategy", a.strategy,
                   "every_frame | periodic_clean | periodic_reuse | vf | all")
      ->check(CLI::IsMember(
          {"every_frame", "periodic_clean", "periodic_reuse", "vf", "all"}));
  attack->add_option("--calibrate", a.calibrate,
                     "VF threshold start quantile, q=<value>");
  attack->add_option("--episodes", a.episodes, "Evaluation episodes")
      ->check(CLI::PositiveNumber);

  std::string retrain_checkpoint;
  std::optional<double> retrain_magnitude;
  CLI::App* retrain =
      app.add_subcommand("retrain", "Re-train under FGSM and noise");
  add_global(retrain);
  retrain->add_option("--checkpoint", retrain_checkpoint, "Baseline checkpoint")
      ->required();
  retrain->add_option("--magnitude", retrain_magnitude,
                      "FGSM magnitude (0: calibrate)");

  BoundaryFlags b;
  CLI::App* boundary =
      app.add_subcommand("boundary", "Action-boundary map of one frame");
  add_global(boundary);
  boundary->add_option("--checkpoint", b.checkpoint, "Checkpoint")->required();
  boundary->add_option("--frame", b.frame, "auto | EPISODE:FRAME");
  boundary->add_option("--epsilon", b.epsilon,
                       "FGSM magnitude (0: calibrate)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }
  try {
    if (*train) return CmdTrain(g);
    if (*attack) return CmdAttack(g, a);
    if (*retrain) return CmdRetrain(g, retrain_checkpoint, retrain_magnitude);
    return CmdBoundary(g, b);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
