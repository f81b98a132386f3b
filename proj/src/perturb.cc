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

#include "advpong/perturb.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace advpong {

const char* PerturbationKindName(PerturbationKind kind) {
  switch (kind) {
    case PerturbationKind::kZero:
      return "none";
    case PerturbationKind::kFgsm:
      return "fgsm";
    case PerturbationKind::kUniform:
      return "uniform";
  }
  return "?";
}

PerturbationKind ParsePerturbationKind(const std::string& name) {
  if (name == "none" || name == "zero") return PerturbationKind::kZero;
  if (name == "fgsm") return PerturbationKind::kFgsm;
  if (name == "uniform" || name == "noise") return PerturbationKind::kUniform;
  throw std::invalid_argument("unknown perturbation kind '" + name + "'");
}

Perturbation ZeroPerturbation(int width, int height) {
  Perturbation p;
  p.width = width;
  p.height = height;
  p.delta.assign(std::size_t(width) * height, 0.0);
  return p;
}

Perturbation Fgsm(const ParamSet& params, const Frame& frame, double epsilon) {
  if (!(epsilon >= 0.0))
    throw std::invalid_argument("fgsm: epsilon must be >= 0");
  Perturbation p = ZeroPerturbation(frame.width, frame.height);
  p.kind = PerturbationKind::kFgsm;
  p.magnitude = epsilon;
  if (epsilon == 0.0) return p;
  const std::vector<double> grad =
      InputGradient(params, frame.pixels, FgsmLoss);
  for (std::size_t i = 0; i < grad.size(); ++i) {
    const double g = grad[i];
    if (!std::isfinite(g))
      throw std::runtime_error("fgsm: non-finite input gradient");
    p.delta[i] = g > 0.0 ? epsilon : (g < 0.0 ? -epsilon : 0.0);
  }
  return p;
}

Perturbation UniformNoise(int width, int height, double beta, Rng& rng) {
  if (!(beta >= 0.0))
    throw std::invalid_argument("uniform noise: beta must be >= 0");
  Perturbation p = ZeroPerturbation(width, height);
  p.kind = PerturbationKind::kUniform;
  p.magnitude = beta;
  if (beta == 0.0) return p;
  for (double& d : p.delta) d = beta * rng.Uniform();
  return p;
}

Frame Apply(const Frame& frame, const Perturbation& perturbation) {
  if (frame.width != perturbation.width ||
      frame.height != perturbation.height ||
      frame.pixels.size() != perturbation.delta.size()) {
    throw std::invalid_argument(
        "apply: perturbation shape does not match frame");
  }
  Frame out = frame;
  for (std::size_t i = 0; i < out.pixels.size(); ++i) {
    out.pixels[i] = std::clamp(out.pixels[i] + perturbation.delta[i], 0.0, 1.0);
  }
  return out;
}

}  // namespace advpong
