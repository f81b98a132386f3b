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

#include "advpong/report.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace advpong {
namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string Escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '&':
        out += "&amp;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

}  // namespace

std::string FormatDouble(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("cannot format double");
  return std::string(buf, end);
}

void WriteTextFile(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << contents;
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string ReadTextFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

JsonlWriter::JsonlWriter(std::string path) : path_(std::move(path)) {
  std::ofstream out(path_, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path_);
}

void JsonlWriter::Write(const nlohmann::json& record) {
  std::ofstream out(path_, std::ios::app);
  out << record.dump() << '\n';
}

std::string LinePlotSvg(const std::string& title, const std::string& x_label,
                        const std::string& y_label,
                        const std::vector<Series>& series) {
  const double width = 640, height = 400, left = 60, right = 160, top = 40,
               bottom = 50;
  const double pw = width - left - right, ph = height - top - bottom;
  double lo = 0.0, hi = 0.0, xlo = 0.0, xhi = 0.0;
  bool first = true, first_x = true;
  auto x_at = [](const Series& s, std::size_t i) {
    return s.x.empty() ? double(i) : s.x.at(i);
  };
  for (const Series& s : series) {
    for (std::size_t i = 0; i < s.y.size(); ++i) {
      const double y = s.y[i];
      const double x = x_at(s, i);
      xlo = first_x ? x : std::min(xlo, x);
      xhi = first_x ? x : std::max(xhi, x);
      first_x = false;
      if (!std::isfinite(y)) continue;
      lo = first ? y : std::min(lo, y);
      hi = first ? y : std::max(hi, y);
      first = false;
    }
  }
  if (hi - lo < 1e-12) {
    lo -= 1.0;
    hi += 1.0;
  }
  auto sx = [&](double x) {
    return left + pw * (xhi > xlo ? (x - xlo) / (xhi - xlo) : 0.5);
  };
  auto sy = [&](double y) { return top + ph * (1.0 - (y - lo) / (hi - lo)); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << width / 2
      << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << Escape(title)
      << "</text>\n";
  svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw
      << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\">" << Escape(x_label) << "</text>\n";
  svg << "<text x=\"16\" y=\"" << top + ph / 2
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << top + ph / 2
      << ")\">" << Escape(y_label) << "</text>\n";
  svg << "<text x=\"" << left - 4 << "\" y=\"" << sy(hi) + 4
      << "\" text-anchor=\"end\">" << FormatDouble(hi) << "</text>\n";
  svg << "<text x=\"" << left - 4 << "\" y=\"" << sy(lo) + 4
      << "\" text-anchor=\"end\">" << FormatDouble(lo) << "</text>\n";
  svg << "<text x=\"" << left << "\" y=\"" << top + ph + 16
      << "\" text-anchor=\"middle\">" << FormatDouble(xlo) << "</text>\n";
  svg << "<text x=\"" << left + pw << "\" y=\"" << top + ph + 16
      << "\" text-anchor=\"middle\">" << FormatDouble(xhi) << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* color = kPalette[k % std::size(kPalette)];
    svg << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < series[k].y.size(); ++i) {
      if (!std::isfinite(series[k].y[i])) continue;
      svg << sx(x_at(series[k], i)) << ',' << sy(series[k].y[i]) << ' ';
    }
    svg << "\"/>\n";
    const double ly = top + 14.0 + 18.0 * double(k);
    svg << "<line x1=\"" << left + pw + 10 << "\" y1=\"" << ly - 4 << "\" x2=\""
        << left + pw + 30 << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << left + pw + 34 << "\" y=\"" << ly << "\">"
        << Escape(series[k].label) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace advpong
