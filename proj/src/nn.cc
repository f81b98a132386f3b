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

#include "advpong/nn.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "advpong/rng.h"

namespace advpong {
namespace {

constexpr double kLogFloor = 1e-12;

enum class LayerKind { kConv, kDense };

struct Layer {
  LayerKind kind;
  int in_c, in_h, in_w;
  int out_c, out_h, out_w;
  int kernel = 1, stride = 1;
  std::size_t in_size, out_size;
  std::size_t weight, bias;  // offsets into the flat buffer
};

// Hidden layers in order; the two heads read the last hidden output.
struct Plan {
  std::vector<Layer> hidden;
  std::size_t feature_size;
  std::size_t policy_weight, policy_bias, value_weight, value_bias;
};

Plan MakePlan(const ParamSet& params) {
  const Architecture& arch = params.architecture();
  const auto& t = params.tensors();
  Plan plan;
  std::size_t ti = 0;
  int c = 1, h = arch.input_height, w = arch.input_width;
  for (const ConvSpec& spec : arch.conv) {
    Layer l{LayerKind::kConv,
            c,
            h,
            w,
            spec.filters,
            (h - spec.kernel) / spec.stride + 1,
            (w - spec.kernel) / spec.stride + 1,
            spec.kernel,
            spec.stride,
            0,
            0,
            0,
            0};
    l.in_size = std::size_t(c) * h * w;
    l.out_size = std::size_t(l.out_c) * l.out_h * l.out_w;
    l.weight = t[ti++].offset;
    l.bias = t[ti++].offset;
    plan.hidden.push_back(l);
    c = l.out_c;
    h = l.out_h;
    w = l.out_w;
  }
  std::size_t features = std::size_t(c) * h * w;
  for (int units : arch.hidden) {
    Layer l{LayerKind::kDense,
            1,
            1,
            int(features),
            units,
            1,
            units,
            1,
            1,
            features,
            std::size_t(units),
            0,
            0};
    l.weight = t[ti++].offset;
    l.bias = t[ti++].offset;
    plan.hidden.push_back(l);
    features = std::size_t(units);
  }
  plan.feature_size = features;
  plan.policy_weight = t[ti++].offset;
  plan.policy_bias = t[ti++].offset;
  plan.value_weight = t[ti++].offset;
  plan.value_bias = t[ti++].offset;
  return plan;
}

double Elu(double z) { return z > 0.0 ? z : std::expm1(z); }

void LayerForward(const Layer& l, const double* p, const double* in,
                  double* out) {
  const double* wgt = p + l.weight;
  const double* bias = p + l.bias;
  if (l.kind == LayerKind::kDense) {
    for (std::size_t o = 0; o < l.out_size; ++o) {
      const double* row = wgt + o * l.in_size;
      double acc = bias[o];
      for (std::size_t i = 0; i < l.in_size; ++i) acc += row[i] * in[i];
      out[o] = acc;
    }
    return;
  }
  const int k = l.kernel;
  for (int f = 0; f < l.out_c; ++f) {
    for (int oy = 0; oy < l.out_h; ++oy) {
      for (int ox = 0; ox < l.out_w; ++ox) {
        double acc = bias[f];
        for (int ch = 0; ch < l.in_c; ++ch) {
          const double* kw = wgt + ((std::size_t(f) * l.in_c + ch) * k) * k;
          const double* src =
              in + (std::size_t(ch) * l.in_h + oy * l.stride) * l.in_w +
              ox * l.stride;
          for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
              acc += kw[ky * k + kx] * src[ky * l.in_w + kx];
            }
          }
        }
        out[(std::size_t(f) * l.out_h + oy) * l.out_w + ox] = acc;
      }
    }
  }
}

// Accumulates parameter gradients (if g != nullptr) and writes the input
// gradient (if d_in != nullptr) for one layer given d_out.
void LayerBackward(const Layer& l, const double* p, const double* in,
                   const double* d_out, double* g, double* d_in) {
  const double* wgt = p + l.weight;
  if (d_in != nullptr) std::fill(d_in, d_in + l.in_size, 0.0);
  if (l.kind == LayerKind::kDense) {
    for (std::size_t o = 0; o < l.out_size; ++o) {
      const double d = d_out[o];
      if (d == 0.0) continue;
      if (g != nullptr) {
        double* grow = g + l.weight + o * l.in_size;
        for (std::size_t i = 0; i < l.in_size; ++i) grow[i] += d * in[i];
        g[l.bias + o] += d;
      }
      if (d_in != nullptr) {
        const double* row = wgt + o * l.in_size;
        for (std::size_t i = 0; i < l.in_size; ++i) d_in[i] += d * row[i];
      }
    }
    return;
  }
  const int k = l.kernel;
  for (int f = 0; f < l.out_c; ++f) {
    for (int oy = 0; oy < l.out_h; ++oy) {
      for (int ox = 0; ox < l.out_w; ++ox) {
        const double d = d_out[(std::size_t(f) * l.out_h + oy) * l.out_w + ox];
        if (d == 0.0) continue;
        if (g != nullptr) g[l.bias + f] += d;
        for (int ch = 0; ch < l.in_c; ++ch) {
          const std::size_t kofs = ((std::size_t(f) * l.in_c + ch) * k) * k;
          const std::size_t sofs =
              (std::size_t(ch) * l.in_h + oy * l.stride) * l.in_w +
              ox * l.stride;
          for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
              const std::size_t si = sofs + ky * l.in_w + kx;
              const std::size_t ki = kofs + ky * k + kx;
              if (g != nullptr) g[l.weight + ki] += d * in[si];
              if (d_in != nullptr) d_in[si] += d * wgt[ki];
            }
          }
        }
      }
    }
  }
}

struct Trace {
  // acts[0] is the input; acts[i + 1] the ELU output of hidden layer i.
  std::vector<std::vector<double>> acts;
  std::vector<std::vector<double>> pre;
  PolicyOutput out;
};

void RunForward(const ParamSet& params, const Plan& plan,
                std::span<const double> input, Trace& trace) {
  const double* p = params.values().data();
  trace.acts.resize(plan.hidden.size() + 1);
  trace.pre.resize(plan.hidden.size());
  trace.acts[0].assign(input.begin(), input.end());
  for (std::size_t i = 0; i < plan.hidden.size(); ++i) {
    const Layer& l = plan.hidden[i];
    trace.pre[i].resize(l.out_size);
    LayerForward(l, p, trace.acts[i].data(), trace.pre[i].data());
    trace.acts[i + 1].resize(l.out_size);
    for (std::size_t j = 0; j < l.out_size; ++j) {
      trace.acts[i + 1][j] = Elu(trace.pre[i][j]);
    }
  }
  const std::vector<double>& feat = trace.acts.back();
  for (int a = 0; a < kNumActions; ++a) {
    const double* row =
        p + plan.policy_weight + std::size_t(a) * plan.feature_size;
    double acc = p[plan.policy_bias + a];
    for (std::size_t i = 0; i < plan.feature_size; ++i) acc += row[i] * feat[i];
    trace.out.logits[a] = acc;
  }
  double v = p[plan.value_bias];
  for (std::size_t i = 0; i < plan.feature_size; ++i) {
    v += p[plan.value_weight + i] * feat[i];
  }
  trace.out.value = v;
}

void CheckInput(const ParamSet& params, std::span<const double> input) {
  if (input.size() != std::size_t(params.architecture().input_size())) {
    throw std::invalid_argument(
        "input size " + std::to_string(input.size()) +
        " does not match architecture input " +
        std::to_string(params.architecture().input_size()));
  }
}

void AddTensor(std::vector<TensorInfo>& tensors, std::size_t& offset,
               std::string name, std::vector<int> shape) {
  std::size_t n = 1;
  for (int d : shape) n *= std::size_t(d);
  tensors.push_back({std::move(name), std::move(shape), offset, n});
  offset += n;
}

}  // namespace

void Architecture::Validate() const {
  if (input_height <= 0 || input_width <= 0) {
    throw std::invalid_argument("architecture: input shape must be positive");
  }
  int h = input_height, w = input_width;
  for (const ConvSpec& c : conv) {
    if (c.filters <= 0 || c.kernel <= 0 || c.stride <= 0 || c.kernel > h ||
        c.kernel > w) {
      throw std::invalid_argument(
          "architecture: conv layer does not fit input");
    }
    h = (h - c.kernel) / c.stride + 1;
    w = (w - c.kernel) / c.stride + 1;
  }
  for (int units : hidden) {
    if (units <= 0)
      throw std::invalid_argument("architecture: empty dense layer");
  }
}

nlohmann::json Architecture::ToJson() const {
  nlohmann::json convs = nlohmann::json::array();
  for (const ConvSpec& c : conv) {
    convs.push_back(
        {{"filters", c.filters}, {"kernel", c.kernel}, {"stride", c.stride}});
  }
  return {{"input_height", input_height},
          {"input_width", input_width},
          {"conv", convs},
          {"hidden", hidden},
          {"activation", "elu"},
          {"num_actions", kNumActions}};
}

Architecture Architecture::FromJson(const nlohmann::json& j) {
  Architecture a;
  a.input_height = j.at("input_height").get<int>();
  a.input_width = j.at("input_width").get<int>();
  for (const auto& c : j.at("conv")) {
    a.conv.push_back({c.at("filters").get<int>(), c.at("kernel").get<int>(),
                      c.at("stride").get<int>()});
  }
  a.hidden = j.at("hidden").get<std::vector<int>>();
  if (j.value("num_actions", kNumActions) != kNumActions ||
      j.value("activation", std::string("elu")) != "elu") {
    throw std::invalid_argument("architecture: unsupported head or activation");
  }
  a.Validate();
  return a;
}

Architecture Architecture::Reference(int height, int width) {
  Architecture a;
  a.input_height = height;
  a.input_width = width;
  a.conv = {{8, 4, 2}, {8, 4, 2}};
  a.hidden = {64};
  a.Validate();
  return a;
}

Architecture Architecture::Mlp(int height, int width, std::vector<int> hidden) {
  Architecture a;
  a.input_height = height;
  a.input_width = width;
  a.hidden = std::move(hidden);
  a.Validate();
  return a;
}

ParamSet::ParamSet(const Architecture& arch) : arch_(arch) {
  arch_.Validate();
  std::size_t offset = 0;
  int c = 1, h = arch.input_height, w = arch.input_width;
  for (std::size_t i = 0; i < arch.conv.size(); ++i) {
    const ConvSpec& s = arch.conv[i];
    const std::string name = "conv" + std::to_string(i);
    AddTensor(tensors_, offset, name + ".weight",
              {s.filters, c, s.kernel, s.kernel});
    AddTensor(tensors_, offset, name + ".bias", {s.filters});
    c = s.filters;
    h = (h - s.kernel) / s.stride + 1;
    w = (w - s.kernel) / s.stride + 1;
  }
  int features = c * h * w;
  for (std::size_t i = 0; i < arch.hidden.size(); ++i) {
    const std::string name = "dense" + std::to_string(i);
    AddTensor(tensors_, offset, name + ".weight", {arch.hidden[i], features});
    AddTensor(tensors_, offset, name + ".bias", {arch.hidden[i]});
    features = arch.hidden[i];
  }
  AddTensor(tensors_, offset, "policy.weight", {kNumActions, features});
  AddTensor(tensors_, offset, "policy.bias", {kNumActions});
  AddTensor(tensors_, offset, "value.weight", {1, features});
  AddTensor(tensors_, offset, "value.bias", {1});
  values_.assign(offset, 0.0);
}

ParamSet ParamSet::Zeros(const Architecture& arch) { return ParamSet(arch); }

ParamSet ParamSet::Initialize(const Architecture& arch, std::uint64_t seed) {
  ParamSet p(arch);
  Rng rng(DeriveSeed(seed, {kInitStream}));
  for (const TensorInfo& t : p.tensors_) {
    if (t.shape.size() == 1) continue;  // biases stay zero
    int fan_in = 1;
    for (std::size_t d = 1; d < t.shape.size(); ++d) fan_in *= t.shape[d];
    int fan_out = t.shape[0];
    if (t.shape.size() == 4) fan_out *= t.shape[2] * t.shape[3];
    double limit = std::sqrt(6.0 / (fan_in + fan_out));
    if (t.name == "policy.weight") limit *= 0.01;
    for (std::size_t i = 0; i < t.size; ++i) {
      p.values_[t.offset + i] = rng.Uniform(-limit, limit);
    }
  }
  p.RoundToFloat();
  return p;
}

const TensorInfo& ParamSet::Find(const std::string& name) const {
  for (const TensorInfo& t : tensors_) {
    if (t.name == name) return t;
  }
  throw std::out_of_range("no tensor named " + name);
}

std::span<double> ParamSet::tensor(const std::string& name) {
  const TensorInfo& t = Find(name);
  return std::span<double>(values_).subspan(t.offset, t.size);
}

std::span<const double> ParamSet::tensor(const std::string& name) const {
  const TensorInfo& t = Find(name);
  return std::span<const double>(values_).subspan(t.offset, t.size);
}

bool ParamSet::SameLayout(const ParamSet& other) const {
  return arch_ == other.arch_ && tensors_ == other.tensors_;
}

bool ParamSet::AllFinite() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return std::isfinite(v); });
}

void ParamSet::RoundToFloat() {
  for (double& v : values_) v = static_cast<double>(static_cast<float>(v));
}

PolicyOutput Forward(const ParamSet& params, std::span<const double> input) {
  CheckInput(params, input);
  const Plan plan = MakePlan(params);
  Trace trace;
  RunForward(params, plan, input, trace);
  return trace.out;
}

Probabilities Softmax(const Logits& logits) {
  const double m = *std::max_element(logits.begin(), logits.end());
  Probabilities p{};
  double sum = 0.0;
  for (int i = 0; i < kNumActions; ++i) {
    p[i] = std::exp(logits[i] - m);
    sum += p[i];
  }
  for (double& x : p) x /= sum;
  return p;
}

int Argmax(std::span<const double> values) {
  return int(std::max_element(values.begin(), values.end()) - values.begin());
}

double CrossEntropy(const Probabilities& probs, int target) {
  return -std::log(std::max(probs.at(target), kLogFloor));
}

LossGrad FgsmLoss(const PolicyOutput& out) {
  const int target = Argmax(out.logits);
  const Probabilities p = Softmax(out.logits);
  LossGrad lg;
  lg.loss = CrossEntropy(p, target);
  for (int a = 0; a < kNumActions; ++a) {
    lg.d_logits[a] = p[a] - (a == target ? 1.0 : 0.0);
  }
  return lg;
}

double Backward(const ParamSet& params, std::span<const double> input,
                const LossSpec& loss, ParamSet* param_grad,
                std::vector<double>* input_grad) {
  CheckInput(params, input);
  if (param_grad != nullptr && !param_grad->SameLayout(params)) {
    throw std::invalid_argument("gradient buffer layout mismatch");
  }
  const Plan plan = MakePlan(params);
  Trace trace;
  RunForward(params, plan, input, trace);
  const LossGrad lg = loss(trace.out);

  const double* p = params.values().data();
  double* g = param_grad != nullptr ? param_grad->values().data() : nullptr;
  const std::vector<double>& feat = trace.acts.back();
  std::vector<double> d_feat(plan.feature_size, 0.0);
  for (int a = 0; a < kNumActions; ++a) {
    const double d = lg.d_logits[a];
    if (d == 0.0) continue;
    const std::size_t row =
        plan.policy_weight + std::size_t(a) * plan.feature_size;
    for (std::size_t i = 0; i < plan.feature_size; ++i) {
      d_feat[i] += d * p[row + i];
      if (g != nullptr) g[row + i] += d * feat[i];
    }
    if (g != nullptr) g[plan.policy_bias + a] += d;
  }
  if (lg.d_value != 0.0) {
    for (std::size_t i = 0; i < plan.feature_size; ++i) {
      d_feat[i] += lg.d_value * p[plan.value_weight + i];
      if (g != nullptr) g[plan.value_weight + i] += lg.d_value * feat[i];
    }
    if (g != nullptr) g[plan.value_bias] += lg.d_value;
  }

  std::vector<double> d_out = std::move(d_feat);
  std::vector<double> d_in;
  for (std::size_t li = plan.hidden.size(); li-- > 0;) {
    const Layer& l = plan.hidden[li];
    // ELU'(z) = 1 for z > 0, else exp(z) = elu(z) + 1.
    for (std::size_t j = 0; j < l.out_size; ++j) {
      const double z = trace.pre[li][j];
      d_out[j] *= z > 0.0 ? 1.0 : trace.acts[li + 1][j] + 1.0;
    }
    const bool need_input = li > 0 || input_grad != nullptr;
    if (need_input) d_in.assign(l.in_size, 0.0);
    LayerBackward(l, p, trace.acts[li].data(), d_out.data(), g,
                  need_input ? d_in.data() : nullptr);
    if (!need_input) break;
    std::swap(d_out, d_in);
  }
  if (input_grad != nullptr) {
    // With no hidden layers d_out is still the feature (== input) gradient.
    *input_grad = std::move(d_out);
  }
  return lg.loss;
}

ParamSet ParamGradients(const ParamSet& params, std::span<const double> input,
                        const LossSpec& loss) {
  ParamSet grad = ParamSet::Zeros(params.architecture());
  Backward(params, input, loss, &grad, nullptr);
  return grad;
}

std::vector<double> InputGradient(const ParamSet& params,
                                  std::span<const double> input,
                                  const LossSpec& loss) {
  std::vector<double> grad;
  Backward(params, input, loss, nullptr, &grad);
  return grad;
}

void RmsProp::Step(ParamSet& params, const ParamSet& grads) {
  if (!params.SameLayout(grads)) {
    throw std::invalid_argument("optimizer: gradient layout mismatch");
  }
  double norm2 = 0.0;
  for (double g : grads.values()) norm2 += g * g;
  if (!std::isfinite(norm2)) {
    throw std::invalid_argument("optimizer: non-finite gradient rejected");
  }
  double scale = 1.0;
  const double norm = std::sqrt(norm2);
  if (config_.max_grad_norm > 0.0 && norm > config_.max_grad_norm) {
    scale = config_.max_grad_norm / norm;
  }
  if (square_avg_.size() != params.size())
    square_avg_.assign(params.size(), 0.0);
  auto w = params.values();
  auto gv = grads.values();
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double g = gv[i] * scale;
    square_avg_[i] =
        config_.decay * square_avg_[i] + (1.0 - config_.decay) * g * g;
    w[i] -=
        config_.learning_rate * g / std::sqrt(square_avg_[i] + config_.epsilon);
  }
  params.RoundToFloat();
}

}  // namespace advpong
