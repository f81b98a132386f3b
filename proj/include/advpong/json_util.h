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

#ifndef ADVPONG_JSON_UTIL_H_
#define ADVPONG_JSON_UTIL_H_

#include <initializer_list>
#include <stdexcept>
#include <string>

#include "json.hpp"

namespace advpong {

// Thrown for configuration problems; what() names the offending key.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Throws ConfigError if `j` is not an object or has a key outside `known`.
void RejectUnknownKeys(const nlohmann::json& j,
                       std::initializer_list<const char*> known,
                       const std::string& section);

// Reads j[key] into `out` when present; type errors become ConfigError.
template <typename T>
void ReadKey(const nlohmann::json& j, const char* key, T& out,
             const std::string& section) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("bad value for key '" + section + "." + key + "'");
  }
}

}  // namespace advpong

#endif  // ADVPONG_JSON_UTIL_H_
