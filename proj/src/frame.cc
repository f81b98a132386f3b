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

#include "advpong/frame.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace advpong {

void ValidateFrame(const Frame& frame) {
  if (frame.width <= 0 || frame.height <= 0 ||
      frame.pixels.size() != std::size_t(frame.width) * frame.height) {
    throw std::invalid_argument("frame shape does not match pixel count");
  }
  for (double p : frame.pixels) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::invalid_argument("frame pixel outside [0, 1]");
    }
  }
}

void WritePgm(const Frame& frame, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "P5\n" << frame.width << ' ' << frame.height << "\n255\n";
  std::string row(frame.pixels.size(), '\0');
  for (std::size_t i = 0; i < frame.pixels.size(); ++i) {
    const double p = std::clamp(frame.pixels[i], 0.0, 1.0);
    row[i] =
        static_cast<char>(static_cast<unsigned char>(std::lround(p * 255.0)));
  }
  out.write(row.data(), static_cast<std::streamsize>(row.size()));
}

}  // namespace advpong
