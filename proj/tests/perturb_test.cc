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

#include <gtest/gtest.h>

#include <cmath>

namespace advpong {
namespace {

Frame RandomFrame(int w, int h, Rng& rng, double lo = 0.0, double hi = 1.0) {
  Frame f(w, h);
  for (double& p : f.pixels) p = rng.Uniform(lo, hi);
  return f;
}

ParamSet RandomParams(const Architecture& arch, Rng& rng) {
  ParamSet p = ParamSet::Zeros(arch);
  for (double& v : p.values()) v = rng.Uniform(-0.5, 0.5);
  return p;
}

// Cross-entropy against a fixed target.
double FrozenLoss(const ParamSet& p, const Frame& f, int target) {
  return CrossEntropy(Softmax(Forward(p, f).logits), target);
}

TEST(PerturbTest, KindNames) {
  EXPECT_EQ(ParsePerturbationKind("none"), PerturbationKind::kZero);
  EXPECT_EQ(ParsePerturbationKind("zero"), PerturbationKind::kZero);
  EXPECT_EQ(ParsePerturbationKind("fgsm"), PerturbationKind::kFgsm);
  EXPECT_EQ(ParsePerturbationKind("uniform"), PerturbationKind::kUniform);
  EXPECT_EQ(ParsePerturbationKind("noise"), PerturbationKind::kUniform);
  EXPECT_THROW(ParsePerturbationKind("pgd"), std::invalid_argument);
  for (auto k : {PerturbationKind::kZero, PerturbationKind::kFgsm,
                 PerturbationKind::kUniform}) {
    EXPECT_EQ(ParsePerturbationKind(PerturbationKindName(k)), k);
  }
}

TEST(PerturbTest, ZeroEpsilonIsIdentity) {
  Rng rng(1);
  const ParamSet p = RandomParams(Architecture::Mlp(4, 4, {5}), rng);
  const Frame f = RandomFrame(4, 4, rng);
  const Perturbation d = Fgsm(p, f, 0.0);
  for (double v : d.delta) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(Apply(f, d), f);
  EXPECT_EQ(Apply(f, ZeroPerturbation(4, 4)), f);
  EXPECT_THROW(Fgsm(p, f, -0.1), std::invalid_argument);
}

TEST(PerturbTest, FgsmComponentsAreSignedEpsilon) {
  Rng rng(2);
  for (int t = 0; t < 20; ++t) {
    const ParamSet p = RandomParams(Architecture::Mlp(5, 5, {6}), rng);
    const Frame f = RandomFrame(5, 5, rng);
    const double eps = rng.Uniform(0.001, 0.1);
    const Perturbation d = Fgsm(p, f, eps);
    EXPECT_EQ(d.kind, PerturbationKind::kFgsm);
    EXPECT_EQ(d.magnitude, eps);
    for (double v : d.delta) EXPECT_TRUE(v == eps || v == -eps || v == 0.0);
    const Frame adv = Apply(f, d);
    for (std::size_t i = 0; i < f.pixels.size(); ++i) {
      EXPECT_LE(std::abs(adv.pixels[i] - f.pixels[i]), eps + 1e-15);
      EXPECT_GE(adv.pixels[i], 0.0);
      EXPECT_LE(adv.pixels[i], 1.0);
    }
  }
}

TEST(PerturbTest, LinearPolicySignClosedForm) {
  // logits = W x + b: grad_x J = sum_a (p_a - onehot_a) W[a, :].
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    const ParamSet p = RandomParams(Architecture::Mlp(3, 4, {}), rng);
    const Frame f = RandomFrame(4, 3, rng);
    const Logits z = Forward(p, f).logits;
    const Probabilities prob = Softmax(z);
    const int target = Argmax(z);
    const auto w = p.tensor("policy.weight");
    const Perturbation d = Fgsm(p, f, 0.01);
    for (int i = 0; i < 12; ++i) {
      double g = 0;
      for (int a = 0; a < kNumActions; ++a) {
        g += (prob[a] - (a == target ? 1.0 : 0.0)) * w[a * 12 + i];
      }
      EXPECT_EQ(d.delta[i], g > 0 ? 0.01 : -0.01);
    }
  }
}

TEST(PerturbTest, ZeroGradientPixelsAreUntouched) {
  // A linear policy whose weights ignore pixel 0 has zero gradient there.
  Rng rng(4);
  ParamSet p = RandomParams(Architecture::Mlp(1, 3, {}), rng);
  auto w = p.tensor("policy.weight");
  for (int a = 0; a < kNumActions; ++a) w[a * 3] = 0.0;
  const Perturbation d = Fgsm(p, RandomFrame(3, 1, rng), 0.2);
  EXPECT_EQ(d.delta[0], 0.0);
  EXPECT_NE(d.delta[1], 0.0);
}

TEST(PerturbTest, InvariantToLogitScale) {
  // Scaling the loss by a positive constant does not change the signs; the
  // linear head is the simplest place to check that end to end.
  Rng rng(5);
  const Architecture arch = Architecture::Mlp(4, 4, {});
  ParamSet p = RandomParams(arch, rng);
  const Frame f = RandomFrame(4, 4, rng);
  const std::vector<double> g = InputGradient(p, f.pixels, FgsmLoss);
  const LossSpec scaled = [](const PolicyOutput& out) {
    LossGrad lg = FgsmLoss(out);
    lg.loss *= 3.5;
    for (double& d : lg.d_logits) d *= 3.5;
    return lg;
  };
  const std::vector<double> gs = InputGradient(p, f.pixels, scaled);
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_EQ(g[i] > 0, gs[i] > 0);
    EXPECT_EQ(g[i] < 0, gs[i] < 0);
  }
}

TEST(PerturbTest, FirstOrderAscent) {
  // For small eps the frozen-target loss rises by about eps * ||grad||_1.
  Rng rng(6);
  int checked = 0;
  for (int t = 0; t < 120; ++t) {
    const ParamSet p = RandomParams(Architecture::Mlp(4, 5, {6}), rng);
    const Frame f = RandomFrame(5, 4, rng, 0.1, 0.9);  // away from the clip
    const int target = Argmax(Forward(p, f).logits);
    const std::vector<double> g = InputGradient(p, f.pixels, FgsmLoss);
    double l1 = 0;
    for (double v : g) l1 += std::abs(v);
    if (l1 < 1e-6) continue;
    const double eps = 1e-4;
    const double rise = FrozenLoss(p, Apply(f, Fgsm(p, f, eps)), target) -
                        FrozenLoss(p, f, target);
    EXPECT_GT(rise, 0.0);
    EXPECT_NEAR(rise, eps * l1, 0.05 * eps * l1);
    ++checked;
  }
  EXPECT_GE(checked, 100);
}

TEST(PerturbTest, UniformNoiseRangeAndMean) {
  Rng rng(7);
  const double beta = 0.3;
  const Perturbation d = UniformNoise(100, 100, beta, rng);
  double sum = 0;
  for (double v : d.delta) {
    EXPECT_GE(v, 0.0);
    EXPECT_LT(v, beta);
    sum += v;
  }
  const double n = double(d.delta.size());
  const double se = beta / std::sqrt(12.0 * n);
  EXPECT_NEAR(sum / n, beta / 2, 5 * se);
  for (double v : UniformNoise(3, 3, 0.0, rng).delta) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(UniformNoise(3, 3, -1.0, rng), std::invalid_argument);
}

TEST(PerturbTest, UniformNoiseIsSeeded) {
  Rng a(8), b(8);
  EXPECT_EQ(UniformNoise(6, 6, 0.1, a).delta, UniformNoise(6, 6, 0.1, b).delta);
}

TEST(PerturbTest, ApplyClipsAndChecksShape) {
  Frame f(2, 1);
  f.pixels = {0.9995, 0.0005};
  Perturbation d = ZeroPerturbation(2, 1);
  d.delta = {0.001, -0.001};
  const Frame out = Apply(f, d);
  EXPECT_EQ(out.pixels[0], 1.0);
  EXPECT_EQ(out.pixels[1], 0.0);
  EXPECT_THROW(Apply(f, ZeroPerturbation(1, 2)), std::invalid_argument);
}

}  // namespace
}  // namespace advpong
