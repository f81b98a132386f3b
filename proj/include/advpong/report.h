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

#ifndef ADVPONG_REPORT_H_
#define ADVPONG_REPORT_H_

// Output helpers shared by the harness, boundary maps and the CLI.

#include <string>
#include <vector>

#include "json.hpp"

namespace advpong {

// Shortest text that parses back to the same double.
std::string FormatDouble(double v);

void WriteTextFile(const std::string& path, const std::string& contents);
std::string ReadTextFile(const std::string& path);

// Appends one compact JSON object per line.
class JsonlWriter {
 public:
  explicit JsonlWriter(std::string path);
  void Write(const nlohmann::json& record);

 private:
  std::string path_;
};

struct Series {
  std::string label;
  std::vector<double> y;
  // Abscissae; empty means 0, 1, 2, ...
  std::vector<double> x;
};

std::string LinePlotSvg(const std::string& title, const std::string& x_label,
                        const std::string& y_label,
                        const std::vector<Series>& series);

}  // namespace advpong

#endif  // ADVPONG_REPORT_H_
