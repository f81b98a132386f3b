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

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <set>
#include <sstream>

#include "advpong/actor_critic.h"
#include "advpong/perturb.h"
#include "advpong/report.h"

namespace advpong {
namespace {

constexpr Rgb kMarkerColor = {0, 0, 255};

double Dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::vector<double> AxisValues(double lo, double hi, int n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = 0.5 * (lo + hi);
    return out;
  }
  const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  for (int i = 0; i < n; ++i) {
    out[i] = mid + half * double(2 * i - (n - 1)) / double(n - 1);
  }
  return out;
}

int Nearest(const std::vector<double>& axis, double x) {
  int best = 0;
  for (int i = 1; i < int(axis.size()); ++i) {
    if (std::abs(axis[i] - x) < std::abs(axis[best] - x)) best = i;
  }
  return best;
}

}  // namespace

GridMarker LocateMarker(const std::vector<double>& u,
                        const std::vector<double>& v, double mu, double mv) {
  return {mu, mv, Nearest(u, mu), Nearest(v, mv)};
}

DirectionPair Directions(const ParamSet& params, const Frame& frame,
                         double epsilon, Rng& rng) {
  const Perturbation p = Fgsm(params, frame, epsilon);
  const double norm = std::sqrt(Dot(p.delta, p.delta));
  if (norm == 0.0) {
    throw ZeroGradientError(
        "FGSM perturbation is zero for this frame; pick another frame");
  }
  DirectionPair pair;
  pair.adversarial_u = norm;
  pair.d1 = p.delta;
  for (double& x : pair.d1) x /= norm;
  const std::size_t n = pair.d1.size();
  for (int attempt = 0; attempt < 8; ++attempt) {
    std::vector<double> d2(n);
    for (double& x : d2) x = rng.Normal();
    // Two Gram-Schmidt passes for orthogonality at round-off level.
    for (int pass = 0; pass < 2; ++pass) {
      const double proj = Dot(d2, pair.d1);
      for (std::size_t i = 0; i < n; ++i) d2[i] -= proj * pair.d1[i];
    }
    const double n2 = std::sqrt(Dot(d2, d2));
    if (n2 < 1e-6) continue;
    for (double& x : d2) x /= n2;
    pair.d2 = std::move(d2);
    return pair;
  }
  throw std::runtime_error("cannot draw a direction orthogonal to d1");
}

void GridAxes::Validate() const {
  if (u_cells < 1 || v_cells < 1 || !(u_max >= u_min) || !(v_max >= v_min)) {
    throw std::invalid_argument("grid axes: need >= 1 cell and min <= max");
  }
}

std::vector<double> GridAxes::UValues() const {
  return AxisValues(u_min, u_max, u_cells);
}
std::vector<double> GridAxes::VValues() const {
  return AxisValues(v_min, v_max, v_cells);
}

GridAxes FitAxes(GridAxes axes, double adversarial_u) {
  if (adversarial_u > axes.u_max || -adversarial_u < axes.u_min) {
    const double half = 1.25 * adversarial_u;
    axes.u_min = -half;
    axes.u_max = half;
  }
  return axes;
}

Action CellAction(const ParamSet& params, std::span<const double> input,
                  std::uint64_t seed, int u_index, int v_index, int samples) {
  Rng rng(DeriveSeed(seed, {kBoundaryCellStream, std::uint64_t(u_index),
                            std::uint64_t(v_index)}));
  return Act(params, input, rng, ActMode::ModeOf(samples));
}

Action GridCellAction(const ParamSet& params, const Frame& frame,
                      const DirectionPair& pair, double u, double v,
                      int u_index, int v_index, int samples,
                      std::uint64_t seed) {
  std::vector<double> input(frame.size());
  for (std::size_t i = 0; i < input.size(); ++i) {
    input[i] = frame.pixels[i] + u * pair.d1[i] + v * pair.d2[i];
  }
  return CellAction(params, input, seed, u_index, v_index, samples);
}

ActionGrid ComputeActionGrid(const ParamSet& params, const Frame& frame,
                             const DirectionPair& pair, const GridAxes& axes,
                             int samples, std::uint64_t seed) {
  axes.Validate();
  if (samples < 1)
    throw std::invalid_argument("action grid: samples must be >= 1");
  if (pair.d1.size() != frame.size() || pair.d2.size() != frame.size()) {
    throw std::invalid_argument("action grid: directions do not match frame");
  }
  ActionGrid grid;
  grid.u = axes.UValues();
  grid.v = axes.VValues();
  grid.cells.resize(grid.u.size() * grid.v.size());
  for (std::size_t iv = 0; iv < grid.v.size(); ++iv) {
    for (std::size_t iu = 0; iu < grid.u.size(); ++iu) {
      grid.cells[iv * grid.u.size() + iu] =
          GridCellAction(params, frame, pair, grid.u[iu], grid.v[iv], int(iu),
                         int(iv), samples, seed)
              .id();
    }
  }
  grid.origin = LocateMarker(grid.u, grid.v, 0.0, 0.0);
  grid.adversarial = LocateMarker(grid.u, grid.v, pair.adversarial_u, 0.0);
  return grid;
}

ActionGrid SemanticGrid(const ActionGrid& grid) {
  if (grid.semantic) return grid;
  ActionGrid out = grid;
  out.semantic = true;
  for (int& c : out.cells) c = static_cast<int>(SemanticMap(Action(c)));
  return out;
}

int CountRegions(const ActionGrid& grid) {
  const int nu = int(grid.u.size()), nv = int(grid.v.size());
  std::vector<char> seen(grid.cells.size(), 0);
  std::vector<int> stack;
  int regions = 0;
  for (int start = 0; start < int(grid.cells.size()); ++start) {
    if (seen[start]) continue;
    ++regions;
    seen[start] = 1;
    stack.push_back(start);
    while (!stack.empty()) {
      const int idx = stack.back();
      stack.pop_back();
      const int iu = idx % nu, iv = idx / nu;
      const int nbrs[4][2] = {
          {iu - 1, iv}, {iu + 1, iv}, {iu, iv - 1}, {iu, iv + 1}};
      for (const auto& nb : nbrs) {
        if (nb[0] < 0 || nb[0] >= nu || nb[1] < 0 || nb[1] >= nv) continue;
        const int j = nb[1] * nu + nb[0];
        if (!seen[j] && grid.cells[j] == grid.cells[idx]) {
          seen[j] = 1;
          stack.push_back(j);
        }
      }
    }
  }
  return regions;
}

int DistinctValues(const ActionGrid& grid) {
  return int(std::set<int>(grid.cells.begin(), grid.cells.end()).size());
}

const std::array<Rgb, kNumActions>& ActionColors() {
  static const std::array<Rgb, kNumActions> colors = {{
      {228, 26, 28},    // 0 NOOP
      {255, 127, 0},    // 1 FIRE
      {77, 175, 74},    // 2 RIGHT (up)
      {152, 78, 163},   // 3 LEFT (down)
      {166, 216, 84},   // 4 RIGHTFIRE (up)
      {247, 129, 191},  // 5 LEFTFIRE (down)
  }};
  return colors;
}

Rgb CellColor(const ActionGrid& grid, int value) {
  if (!grid.semantic) return ActionColors().at(value);
  for (int a = 0; a < kNumActions; ++a) {
    if (static_cast<int>(SemanticMap(Action(a))) == value)
      return ActionColors()[a];
  }
  throw std::out_of_range("semantic value without a raw action");
}

std::string HexColor(const Rgb& c) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", c[0], c[1], c[2]);
  return buf;
}

std::string GridCsv(const ActionGrid& grid) {
  std::ostringstream out;
  out << "u,v,action\n";
  for (std::size_t iv = 0; iv < grid.v.size(); ++iv) {
    for (std::size_t iu = 0; iu < grid.u.size(); ++iu) {
      out << FormatDouble(grid.u[iu]) << ',' << FormatDouble(grid.v[iv]) << ','
          << grid.at(iu, iv) << '\n';
    }
  }
  return out.str();
}

ActionGrid ParseGridCsv(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line) || line != "u,v,action") {
    throw std::invalid_argument("grid csv: bad header");
  }
  ActionGrid grid;
  std::vector<double> us, vs;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::size_t a = line.find(','), b = line.find(',', a + 1);
    if (a == std::string::npos || b == std::string::npos) {
      throw std::invalid_argument("grid csv: malformed row '" + line + "'");
    }
    us.push_back(std::strtod(line.substr(0, a).c_str(), nullptr));
    vs.push_back(std::strtod(line.substr(a + 1, b - a - 1).c_str(), nullptr));
    grid.cells.push_back(std::stoi(line.substr(b + 1)));
  }
  if (grid.cells.empty()) throw std::invalid_argument("grid csv: no rows");
  std::size_t nu = 1;
  while (nu < vs.size() && vs[nu] == vs[0]) ++nu;
  if (grid.cells.size() % nu != 0)
    throw std::invalid_argument("grid csv: ragged grid");
  grid.u.assign(us.begin(), us.begin() + nu);
  for (std::size_t i = 0; i < vs.size(); i += nu) grid.v.push_back(vs[i]);
  grid.origin = LocateMarker(grid.u, grid.v, 0.0, 0.0);
  grid.adversarial = grid.origin;
  return grid;
}

std::string LegendCsv() {
  std::ostringstream out;
  out << "action,color,semantic\n";
  for (int a = 0; a < kNumActions; ++a) {
    out << a << ',' << HexColor(ActionColors()[a]) << ','
        << SemanticName(SemanticMap(Action(a))) << '\n';
  }
  return out.str();
}

std::string GridPpm(const ActionGrid& grid, int cell_pixels) {
  const int s = std::max(cell_pixels, 1);
  const int nu = int(grid.u.size()), nv = int(grid.v.size());
  const int legend_entries = grid.semantic ? kNumSemanticActions : kNumActions;
  const int swatch = std::max(3 * s, 8);
  const int width = std::max(nu * s, legend_entries * swatch);
  const int height = nv * s + swatch + s;
  std::vector<Rgb> img(std::size_t(width) * height, Rgb{255, 255, 255});
  auto put = [&](int x, int y, Rgb c) {
    if (x >= 0 && x < width && y >= 0 && y < height)
      img[std::size_t(y) * width + x] = c;
  };
  for (int iv = 0; iv < nv; ++iv) {
    for (int iu = 0; iu < nu; ++iu) {
      const Rgb c = CellColor(grid, grid.at(iu, iv));
      const int y0 = (nv - 1 - iv) * s;
      for (int dy = 0; dy < s; ++dy) {
        for (int dx = 0; dx < s; ++dx) put(iu * s + dx, y0 + dy, c);
      }
    }
  }
  // Markers span three cells so they stay visible at small cell sizes.
  const int r = 3 * s / 2;
  {
    const int cx = grid.origin.u_index * s + s / 2;
    const int cy = (nv - 1 - grid.origin.v_index) * s + s / 2;
    for (int d = -r; d <= r; ++d) {
      put(cx + d, cy + d, kMarkerColor);
      put(cx + d, cy - d, kMarkerColor);
    }
  }
  {
    const int cx = grid.adversarial.u_index * s + s / 2;
    const int cy = (nv - 1 - grid.adversarial.v_index) * s + s / 2;
    for (int d = -r; d <= r; ++d) {
      put(cx + d, cy - r, kMarkerColor);
      put(cx + d, cy + r, kMarkerColor);
      put(cx - r, cy + d, kMarkerColor);
      put(cx + r, cy + d, kMarkerColor);
    }
  }
  // Legend: one swatch per action (or semantic class) in id order.
  const int ly = nv * s + s;
  for (int k = 0; k < legend_entries; ++k) {
    const Rgb c = CellColor(grid, k);
    for (int dy = 0; dy < swatch; ++dy) {
      for (int dx = 1; dx < swatch - 1; ++dx) put(k * swatch + dx, ly + dy, c);
    }
  }
  std::string out =
      "P6\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  out.reserve(out.size() + img.size() * 3);
  for (const Rgb& c : img) {
    out.push_back(char(c[0]));
    out.push_back(char(c[1]));
    out.push_back(char(c[2]));
  }
  return out;
}

std::string GridSvg(const ActionGrid& grid, const std::string& title) {
  const int s = 5;
  const int nu = int(grid.u.size()), nv = int(grid.v.size());
  const int left = 50, top = 30;
  const int width = left + nu * s + 20, height = top + nv * s + 70;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << left << "\" y=\"18\" font-size=\"13\">" << title
      << "</text>\n";
  for (int iv = 0; iv < nv; ++iv) {
    const int y = top + (nv - 1 - iv) * s;
    int iu = 0;
    while (iu < nu) {
      int run = 1;
      while (iu + run < nu && grid.at(iu + run, iv) == grid.at(iu, iv)) ++run;
      svg << "<rect x=\"" << left + iu * s << "\" y=\"" << y << "\" width=\""
          << run * s << "\" height=\"" << s << "\" fill=\""
          << HexColor(CellColor(grid, grid.at(iu, iv))) << "\"/>\n";
      iu += run;
    }
  }
  const std::string blue = HexColor(kMarkerColor);
  const double ox = left + grid.origin.u_index * s + s / 2.0;
  const double oy = top + (nv - 1 - grid.origin.v_index) * s + s / 2.0;
  svg << "<text x=\"" << ox << "\" y=\"" << oy + 5
      << "\" text-anchor=\"middle\" fill=\"" << blue
      << "\" font-size=\"16\" font-weight=\"bold\">x</text>\n";
  const double ax = left + grid.adversarial.u_index * s + s / 2.0;
  const double ay = top + (nv - 1 - grid.adversarial.v_index) * s + s / 2.0;
  svg << "<rect x=\"" << ax - 5 << "\" y=\"" << ay - 5
      << "\" width=\"10\" height=\"10\" fill=\"none\" stroke=\"" << blue
      << "\" stroke-width=\"2\"/>\n";
  const int axis_y = top + nv * s + 14;
  svg << "<text x=\"" << left << "\" y=\"" << axis_y
      << "\">u=" << FormatDouble(grid.u.front()) << "</text>\n";
  svg << "<text x=\"" << left + nu * s << "\" y=\"" << axis_y
      << "\" text-anchor=\"end\">u=" << FormatDouble(grid.u.back())
      << "</text>\n";
  svg << "<text x=\"" << left - 4 << "\" y=\"" << top + 10
      << "\" text-anchor=\"end\">" << FormatDouble(grid.v.back())
      << "</text>\n";
  svg << "<text x=\"" << left - 4 << "\" y=\"" << top + nv * s
      << "\" text-anchor=\"end\">" << FormatDouble(grid.v.front())
      << "</text>\n";
  const int entries = grid.semantic ? kNumSemanticActions : kNumActions;
  for (int k = 0; k < entries; ++k) {
    const int x = left + k * 80, y = axis_y + 14;
    const std::string label =
        grid.semantic ? SemanticName(static_cast<SemanticAction>(k))
                      : std::to_string(k) + " " + ActionName(Action(k));
    svg << "<rect x=\"" << x << "\" y=\"" << y
        << "\" width=\"12\" height=\"12\" fill=\""
        << HexColor(CellColor(grid, k)) << "\"/>\n";
    svg << "<text x=\"" << x + 16 << "\" y=\"" << y + 10 << "\">" << label
        << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace advpong
