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

#ifndef ADVPONG_FRAME_H_
#define ADVPONG_FRAME_H_

#include <cstddef>
#include <string>
#include <vector>

namespace advpong {

// Grayscale image, row-major, luminosity in [0, 1]. This is the policy input
// and the attack surface.
struct Frame {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;

  Frame() = default;
  Frame(int w, int h) : width(w), height(h), pixels(std::size_t(w) * h, 0.0) {}

  std::size_t size() const { return pixels.size(); }
  double& at(int row, int col) {
    return pixels[std::size_t(row) * width + col];
  }
  double at(int row, int col) const {
    return pixels[std::size_t(row) * width + col];
  }

  bool operator==(const Frame&) const = default;
};

// Throws std::invalid_argument if the pixel count disagrees with the shape or
// any pixel lies outside [0, 1].
void ValidateFrame(const Frame& frame);

// Binary PGM (P5, 8-bit, row-major).
void WritePgm(const Frame& frame, const std::string& path);

}  // namespace advpong

#endif  // ADVPONG_FRAME_H_
