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

#ifndef ADVPONG_BOUNDARY_H_
#define ADVPONG_BOUNDARY_H_

// Action maps over the plane x + u * d1 + v * d2, with d1 the normalized FGSM
// perturbation of frame x and d2 a random direction orthogonal to it. Grid
// inputs are fed to the network unclipped.
//
// Cell (iu, iv) samples its actions from the stream
// DeriveSeed(seed, {kBoundaryCellStream, iu, iv}).

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "advpong/frame.h"
#include "advpong/minipong.h"
#include "advpong/nn.h"
#include "advpong/rng.h"

namespace advpong {

// FGSM produced an all-zero perturbation, so there is no adversarial
// direction for this frame.
class ZeroGradientError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DirectionPair {
  std::vector<double> d1;
  std::vector<double> d2;
  // L2 norm of the (unclipped) FGSM perturbation, i.e. the u coordinate of
  // the adversarial example.
  double adversarial_u = 0.0;
};

// Throws ZeroGradientError when the FGSM perturbation at epsilon vanishes.
DirectionPair Directions(const ParamSet& params, const Frame& frame,
                         double epsilon, Rng& rng);

struct GridAxes {
  double u_min = -0.25;
  double u_max = 0.25;
  int u_cells = 101;
  double v_min = -0.25;
  double v_max = 0.25;
  int v_cells = 101;

  void Validate() const;
  // Evenly spaced, computed about the midpoint so a symmetric axis with an
  // odd cell count contains 0 exactly.
  std::vector<double> UValues() const;
  std::vector<double> VValues() const;
};

// Widens a symmetric u range to 1.25 * adversarial_u when the adversarial
// point would fall outside it.
GridAxes FitAxes(GridAxes axes, double adversarial_u);

struct GridMarker {
  double u = 0.0;
  double v = 0.0;
  int u_index = 0;
  int v_index = 0;
};

struct ActionGrid {
  std::vector<double> u;
  std::vector<double> v;
  // cells[iv * u.size() + iu]: raw action ids, or SemanticAction values when
  // `semantic` is set.
  std::vector<int> cells;
  bool semantic = false;
  GridMarker origin;
  GridMarker adversarial;

  int at(std::size_t iu, std::size_t iv) const {
    return cells[iv * u.size() + iu];
  }
};

// Mode of `samples` draws from the policy at `input` using the cell stream.
Action CellAction(const ParamSet& params, std::span<const double> input,
                  std::uint64_t seed, int u_index, int v_index, int samples);

// The entry ComputeActionGrid stores for cell (u_index, v_index) at
// coordinates (u, v).
Action GridCellAction(const ParamSet& params, const Frame& frame,
                      const DirectionPair& pair, double u, double v,
                      int u_index, int v_index, int samples,
                      std::uint64_t seed);

// Marker at (mu, mv) snapped to the nearest grid cell.
GridMarker LocateMarker(const std::vector<double>& u,
                        const std::vector<double>& v, double mu, double mv);

ActionGrid ComputeActionGrid(const ParamSet& params, const Frame& frame,
                             const DirectionPair& pair, const GridAxes& axes,
                             int samples, std::uint64_t seed);

// Cellwise SemanticMap; markers preserved.
ActionGrid SemanticGrid(const ActionGrid& grid);

// Number of 4-connected regions of equal cell value.
int CountRegions(const ActionGrid& grid);
int DistinctValues(const ActionGrid& grid);

using Rgb = std::array<std::uint8_t, 3>;
// Fixed colors for raw actions 0..5. A semantic class is drawn with the
// color of its lowest raw id.
const std::array<Rgb, kNumActions>& ActionColors();
Rgb CellColor(const ActionGrid& grid, int value);
std::string HexColor(const Rgb& c);

// "u,v,action" rows in (iv, iu) order.
std::string GridCsv(const ActionGrid& grid);
// Inverse of GridCsv for axes and cells; markers are not stored.
ActionGrid ParseGridCsv(const std::string& csv);

// "action,color,semantic" for the six raw actions.
std::string LegendCsv();

// Binary P6 image, cell_pixels per cell, u to the right and v upward, origin
// drawn as an "x" and the adversarial point as a square, followed by a legend
// row of color swatches.
std::string GridPpm(const ActionGrid& grid, int cell_pixels = 4);
std::string GridSvg(const ActionGrid& grid, const std::string& title);

}  // namespace advpong

#endif  // ADVPONG_BOUNDARY_H_
