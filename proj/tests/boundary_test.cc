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

#include "advpong/boundary.h"

#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "advpong/perturb.h"

namespace advpong {
namespace {

double Dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

ParamSet RandomPolicy(int h, int w, std::uint64_t seed) {
  Rng rng(seed);
  ParamSet p = ParamSet::Zeros(Architecture::Mlp(h, w, {6}));
  for (double& v : p.values()) v = rng.Uniform(-1, 1);
  return p;
}

Frame RandomFrame(int h, int w, std::uint64_t seed) {
  Rng rng(seed);
  Frame f(w, h);
  for (double& p : f.pixels) p = rng.Uniform();
  return f;
}

ActionGrid HandGrid(int nu, int nv, std::vector<int> cells) {
  ActionGrid g;
  for (int i = 0; i < nu; ++i) g.u.push_back(i);
  for (int i = 0; i < nv; ++i) g.v.push_back(i);
  g.cells = std::move(cells);
  return g;
}

TEST(BoundaryTest, DirectionsAreOrthonormal) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const ParamSet p = RandomPolicy(5, 6, seed);
    const Frame f = RandomFrame(5, 6, seed);
    Rng rng(seed);
    const DirectionPair d = Directions(p, f, 0.01, rng);
    EXPECT_NEAR(Dot(d.d1, d.d1), 1.0, 1e-9);
    EXPECT_NEAR(Dot(d.d2, d.d2), 1.0, 1e-9);
    EXPECT_NEAR(Dot(d.d1, d.d2), 0.0, 1e-9);
  }
}

TEST(BoundaryTest, AdversarialCoordinateIsFgsmNorm) {
  const ParamSet p = RandomPolicy(4, 4, 3);
  const Frame f = RandomFrame(4, 4, 3);
  const double eps = 0.02;
  const Perturbation fgsm = Fgsm(p, f, eps);
  int nonzero = 0;
  for (double v : fgsm.delta) nonzero += v != 0.0;
  Rng rng(1);
  const DirectionPair d = Directions(p, f, eps, rng);
  EXPECT_NEAR(d.adversarial_u, eps * std::sqrt(double(nonzero)), 1e-12);
  // Generic dense weights: every pixel has a nonzero gradient.
  EXPECT_EQ(nonzero, 16);
  EXPECT_NEAR(d.adversarial_u, eps * 4.0, 1e-12);
  // d1 points along the FGSM step.
  for (std::size_t i = 0; i < d.d1.size(); ++i) {
    EXPECT_NEAR(d.d1[i] * d.adversarial_u, fgsm.delta[i], 1e-12);
  }
}

TEST(BoundaryTest, SameRngSameSecondDirection) {
  const ParamSet p = RandomPolicy(4, 4, 4);
  const Frame f = RandomFrame(4, 4, 4);
  Rng a(9), b(9), c(10);
  const auto da = Directions(p, f, 0.01, a);
  EXPECT_EQ(da.d2, Directions(p, f, 0.01, b).d2);
  EXPECT_NE(da.d2, Directions(p, f, 0.01, c).d2);
}

TEST(BoundaryTest, ZeroGradientIsReported) {
  const ParamSet p = ParamSet::Zeros(Architecture::Mlp(3, 3, {4}));
  Rng rng(1);
  EXPECT_THROW(Directions(p, RandomFrame(3, 3, 1), 0.01, rng),
               ZeroGradientError);
}

TEST(BoundaryTest, AxesContainZeroAndWiden) {
  const GridAxes axes;
  const std::vector<double> u = axes.UValues();
  ASSERT_EQ(u.size(), 101u);
  EXPECT_EQ(u[50], 0.0);
  EXPECT_DOUBLE_EQ(u.front(), -0.25);
  EXPECT_DOUBLE_EQ(u.back(), 0.25);
  EXPECT_EQ(FitAxes(axes, 0.1).u_max, 0.25);
  const GridAxes wide = FitAxes(axes, 0.4);
  EXPECT_DOUBLE_EQ(wide.u_max, 0.5);
  EXPECT_DOUBLE_EQ(wide.u_min, -0.5);
  GridAxes bad;
  bad.u_cells = 0;
  EXPECT_THROW(bad.Validate(), std::invalid_argument);
}

TEST(BoundaryTest, GridMarkersAndOriginCell) {
  const ParamSet p = RandomPolicy(4, 5, 5);
  const Frame f = RandomFrame(4, 5, 5);
  Rng rng(2);
  const DirectionPair d = Directions(p, f, 0.01, rng);
  GridAxes axes;
  axes.u_cells = axes.v_cells = 11;
  const ActionGrid g = ComputeActionGrid(p, f, d, axes, 7, 3);
  ASSERT_EQ(g.cells.size(), 121u);
  EXPECT_EQ(g.origin.u_index, 5);
  EXPECT_EQ(g.origin.v_index, 5);
  EXPECT_EQ(g.at(5, 5), CellAction(p, f.pixels, 3, 5, 5, 7).id());
  EXPECT_DOUBLE_EQ(g.adversarial.u, d.adversarial_u);
  // 0.01 * sqrt(20) ~ 0.045 lies closest to u = 0.05, index 6.
  EXPECT_EQ(g.adversarial.u_index, 6);
  // Cells are the policy evaluated on unclipped inputs.
  const int iu = 2, iv = 9;
  std::vector<double> x(f.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = f.pixels[i] + g.u[iu] * d.d1[i] + g.v[iv] * d.d2[i];
  }
  EXPECT_EQ(g.at(iu, iv), CellAction(p, x, 3, iu, iv, 7).id());
  EXPECT_EQ(ComputeActionGrid(p, f, d, axes, 7, 3).cells, g.cells);
}

TEST(BoundaryTest, ConstantPolicyGivesUniformGrid) {
  ParamSet p = ParamSet::Zeros(Architecture::Mlp(3, 3, {}));
  p.tensor("policy.bias")[3] = 50.0;
  Rng rng(1);
  DirectionPair d;
  d.d1.assign(9, 0.0);
  d.d2.assign(9, 0.0);
  d.d1[0] = 1.0;
  d.d2[1] = 1.0;
  GridAxes axes;
  axes.u_cells = axes.v_cells = 9;
  const ActionGrid g =
      ComputeActionGrid(p, RandomFrame(3, 3, 1), d, axes, 3, 1);
  for (int c : g.cells) EXPECT_EQ(c, 3);
  EXPECT_EQ(CountRegions(g), 1);
  EXPECT_EQ(DistinctValues(g), 1);
}

TEST(BoundaryTest, SemanticGridCoarsens) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const ParamSet p = RandomPolicy(4, 4, seed);
    const Frame f = RandomFrame(4, 4, seed);
    Rng rng(seed);
    GridAxes axes;
    axes.u_cells = axes.v_cells = 21;
    axes.u_min = axes.v_min = -3;
    axes.u_max = axes.v_max = 3;
    const ActionGrid raw =
        ComputeActionGrid(p, f, Directions(p, f, 0.01, rng), axes, 1, seed);
    const ActionGrid sem = SemanticGrid(raw);
    EXPECT_TRUE(sem.semantic);
    EXPECT_LE(DistinctValues(sem), 3);
    EXPECT_LE(DistinctValues(sem), DistinctValues(raw));
    EXPECT_LE(CountRegions(sem), CountRegions(raw));
    for (std::size_t i = 0; i < raw.cells.size(); ++i) {
      EXPECT_EQ(sem.cells[i], int(SemanticMap(Action(raw.cells[i]))));
    }
  }
}

TEST(BoundaryTest, CountRegionsHandCases) {
  EXPECT_EQ(CountRegions(HandGrid(3, 3, {0, 1, 0, 1, 0, 1, 0, 1, 0})), 9);
  EXPECT_EQ(CountRegions(HandGrid(3, 3, {0, 0, 0, 1, 1, 1, 0, 0, 0})), 3);
  // Diagonal neighbours do not connect.
  EXPECT_EQ(CountRegions(HandGrid(2, 2, {2, 5, 5, 2})), 4);
  EXPECT_EQ(CountRegions(HandGrid(4, 1, {1, 1, 2, 1})), 3);
  EXPECT_EQ(DistinctValues(HandGrid(4, 1, {1, 1, 2, 1})), 2);
}

TEST(BoundaryTest, CsvRoundTrip) {
  ActionGrid g = HandGrid(3, 2, {0, 1, 2, 3, 4, 5});
  g.u = {-0.1, 0.0, 0.1};
  g.v = {-0.05, 0.05};
  const std::string csv = GridCsv(g);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "u,v,action");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
  const ActionGrid back = ParseGridCsv(csv);
  EXPECT_EQ(back.u, g.u);
  EXPECT_EQ(back.v, g.v);
  EXPECT_EQ(back.cells, g.cells);
  EXPECT_THROW(ParseGridCsv("u,v,action\n0,0\n"), std::invalid_argument);
}

TEST(BoundaryTest, SingleCellGrid) {
  GridAxes axes;
  axes.u_cells = axes.v_cells = 1;
  axes.u_min = axes.u_max = axes.v_min = axes.v_max = 0.0;
  const ParamSet p = RandomPolicy(2, 2, 1);
  const Frame f = RandomFrame(2, 2, 1);
  Rng rng(1);
  const ActionGrid g =
      ComputeActionGrid(p, f, Directions(p, f, 0.1, rng), axes, 7, 1);
  const std::string csv = GridCsv(g);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
  EXPECT_EQ(ParseGridCsv(csv).cells, g.cells);
}

TEST(BoundaryTest, ColorsAndLegend) {
  std::set<std::string> colors;
  for (const Rgb& c : ActionColors()) colors.insert(HexColor(c));
  EXPECT_EQ(colors.size(), 6u);
  EXPECT_EQ(HexColor({255, 0, 16}), "#ff0010");
  const std::string legend = LegendCsv();
  EXPECT_EQ(legend.substr(0, legend.find('\n')), "action,color,semantic");
  EXPECT_EQ(std::count(legend.begin(), legend.end(), '\n'), 7);
  // A semantic class takes the color of its lowest raw id.
  ActionGrid sem = SemanticGrid(HandGrid(1, 1, {4}));
  EXPECT_EQ(CellColor(sem, sem.cells[0]), ActionColors()[2]);
}

TEST(BoundaryTest, PpmHeaderAndSize) {
  ActionGrid g = HandGrid(5, 3, std::vector<int>(15, 1));
  const std::string ppm = GridPpm(g, 4);
  std::istringstream in(ppm);
  std::string magic;
  int w, h, maxval;
  in >> magic >> w >> h >> maxval;
  in.get();
  EXPECT_EQ(magic, "P6");
  EXPECT_GE(w, 5 * 4);
  EXPECT_GE(h, 3 * 4);
  EXPECT_EQ(maxval, 255);
  EXPECT_EQ(ppm.size() - std::size_t(in.tellg()), std::size_t(w) * h * 3);
  const std::string svg = GridSvg(g, "t");
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
}

}  // namespace
}  // namespace advpong
