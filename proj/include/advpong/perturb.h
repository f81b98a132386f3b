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

#ifndef ADVPONG_PERTURB_H_
#define ADVPONG_PERTURB_H_

#include <string>
#include <vector>

#include "advpong/frame.h"
#include "advpong/nn.h"
#include "advpong/rng.h"

namespace advpong {

enum class PerturbationKind { kZero, kFgsm, kUniform };

const char* PerturbationKindName(PerturbationKind kind);
// Accepts "none"/"zero", "fgsm", "uniform"/"noise".
PerturbationKind ParsePerturbationKind(const std::string& name);

// Additive change to a frame. For kFgsm every component is in
// {-magnitude, 0, +magnitude}; for kUniform every component is in
// [0, magnitude].
struct Perturbation {
  int width = 0;
  int height = 0;
  std::vector<double> delta;
  PerturbationKind kind = PerturbationKind::kZero;
  double magnitude = 0.0;
};

Perturbation ZeroPerturbation(int width, int height);

// epsilon * sign(grad_x J) with J the cross-entropy between softmax(logits)
// and onehot(argmax logits); sign(0) = 0. Throws std::invalid_argument for
// epsilon < 0 and std::runtime_error for a non-finite gradient.
Perturbation Fgsm(const ParamSet& params, const Frame& frame, double epsilon);

// i.i.d. Unif(0, beta) per pixel. Throws std::invalid_argument for beta < 0.
Perturbation UniformNoise(int width, int height, double beta, Rng& rng);

// frame + delta, clipped to [0, 1]. Throws on shape mismatch.
Frame Apply(const Frame& frame, const Perturbation& perturbation);

}  // namespace advpong

#endif  // ADVPONG_PERTURB_H_
