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

#include "advpong/json_util.h"

#include <cstring>

namespace advpong {

void RejectUnknownKeys(const nlohmann::json& j,
                       std::initializer_list<const char*> known,
                       const std::string& section) {
  if (!j.is_object())
    throw ConfigError("section '" + section + "' must be an object");
  for (const auto& [key, value] : j.items()) {
    bool found = false;
    for (const char* k : known) found = found || key == k;
    if (!found) throw ConfigError("unknown key '" + section + "." + key + "'");
  }
}

}  // namespace advpong
