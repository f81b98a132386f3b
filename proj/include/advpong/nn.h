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

#ifndef ADVPONG_NN_H_
#define ADVPONG_NN_H_

// Small dense/convolutional actor-critic network: an optional conv stack, an
// optional dense stack (ELU activations), then two linear heads producing
// kNumActions logits and one value. Computation is float64 throughout;
// parameters are rounded to float32 after each optimizer step so that
// checkpoints (float32 payloads) round-trip exactly.

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "advpong/frame.h"
#include "advpong/minipong.h"
#include "json.hpp"

namespace advpong {

using Logits = std::array<double, kNumActions>;
using Probabilities = std::array<double, kNumActions>;

struct ConvSpec {
  int filters = 8;
  int kernel = 4;
  int stride = 2;
  bool operator==(const ConvSpec&) const = default;
};

struct Architecture {
  int input_height = 42;
  int input_width = 42;
  std::vector<ConvSpec> conv;
  std::vector<int> hidden;

  int input_size() const { return input_height * input_width; }
  bool operator==(const Architecture&) const = default;

  // Throws std::invalid_argument if a conv layer does not fit its input.
  void Validate() const;

  nlohmann::json ToJson() const;
  static Architecture FromJson(const nlohmann::json& j);

  // conv(8,4x4,s2) -> conv(8,4x4,s2) -> dense(64) -> heads.
  static Architecture Reference(int height, int width);
  static Architecture Mlp(int height, int width,
                          std::vector<int> hidden = {64});
};

struct TensorInfo {
  std::string name;
  std::vector<int> shape;
  std::size_t offset = 0;
  std::size_t size = 0;
  bool operator==(const TensorInfo&) const = default;
};

// All network weights in one flat buffer, plus the layout that names them.
// Gradients use the same type.
class ParamSet {
 public:
  ParamSet() = default;

  // All-zero parameters laid out for `arch`.
  static ParamSet Zeros(const Architecture& arch);

  // Glorot-uniform weights, zero biases, policy head scaled by 0.01 so the
  // initial policy is close to uniform. Values are float32-representable.
  static ParamSet Initialize(const Architecture& arch, std::uint64_t seed);

  const Architecture& architecture() const { return arch_; }
  const std::vector<TensorInfo>& tensors() const { return tensors_; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }

  std::span<double> tensor(const std::string& name);
  std::span<const double> tensor(const std::string& name) const;

  // Same architecture and layout.
  bool SameLayout(const ParamSet& other) const;
  bool AllFinite() const;

  // Rounds every value to the nearest float32.
  void RoundToFloat();

  bool operator==(const ParamSet& other) const = default;

 private:
  explicit ParamSet(const Architecture& arch);
  const TensorInfo& Find(const std::string& name) const;

  Architecture arch_;
  std::vector<TensorInfo> tensors_;
  std::vector<double> values_;
};

struct PolicyOutput {
  Logits logits{};
  double value = 0.0;
};

// Throws std::invalid_argument if input.size() != arch.input_size().
PolicyOutput Forward(const ParamSet& params, std::span<const double> input);
inline PolicyOutput Forward(const ParamSet& params, const Frame& frame) {
  return Forward(params, std::span<const double>(frame.pixels));
}

// Max-subtracted softmax.
Probabilities Softmax(const Logits& logits);

// Lowest index among maximal entries.
int Argmax(std::span<const double> values);

// -log(max(p[target], 1e-12)).
double CrossEntropy(const Probabilities& probs, int target);

// A scalar loss of the network outputs together with its derivatives.
struct LossGrad {
  double loss = 0.0;
  Logits d_logits{};
  double d_value = 0.0;
};
using LossSpec = std::function<LossGrad(const PolicyOutput&)>;

// J = CE(softmax(logits), onehot(argmax logits)), the target held constant.
LossGrad FgsmLoss(const PolicyOutput& out);

// Runs forward and backward once. Parameter gradients are accumulated into
// `param_grad` and the input gradient written into `input_grad`; either may
// be null. Returns the loss.
double Backward(const ParamSet& params, std::span<const double> input,
                const LossSpec& loss, ParamSet* param_grad,
                std::vector<double>* input_grad);

ParamSet ParamGradients(const ParamSet& params, std::span<const double> input,
                        const LossSpec& loss);

// Same shape as the input. The result may hold values outside [0, 1].
std::vector<double> InputGradient(const ParamSet& params,
                                  std::span<const double> input,
                                  const LossSpec& loss);

struct RmsPropConfig {
  double learning_rate = 7e-4;
  double decay = 0.99;
  double epsilon = 1e-5;
  // Global L2 norm clip applied before the update; <= 0 disables.
  double max_grad_norm = 40.0;
};

// RMSProp with one set of running statistics shared by every writer.
//   s <- decay * s + (1 - decay) * g^2
//   w <- w - lr * g / sqrt(s + epsilon)
class RmsProp {
 public:
  explicit RmsProp(RmsPropConfig config = {}) : config_(config) {}

  // Throws std::invalid_argument on layout mismatch or non-finite gradients;
  // params are left untouched in that case.
  void Step(ParamSet& params, const ParamSet& grads);

  const RmsPropConfig& config() const { return config_; }
  std::span<const double> square_average() const { return square_avg_; }

 private:
  RmsPropConfig config_;
  std::vector<double> square_avg_;
};

}  // namespace advpong

#endif  // ADVPONG_NN_H_
