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

#ifndef ADVPONG_CHECKPOINT_H_
#define ADVPONG_CHECKPOINT_H_

// On-disk layout:
//
//   ADVPONG-CHECKPOINT\n
//   <one-line JSON header>\n
//   <little-endian float32 payload, tensors in header order>
//
// The header carries format_version, the architecture descriptor, the tensor
// list (name + shape), the root seed, the training step and episode counts,
// and free-form metadata.

#include <cstdint>
#include <string>

#include "advpong/nn.h"
#include "json.hpp"

namespace advpong {

inline constexpr int kCheckpointFormatVersion = 1;

struct Checkpoint {
  ParamSet params;
  std::uint64_t seed = 0;
  std::int64_t train_steps = 0;
  std::int64_t episodes = 0;
  nlohmann::json metadata = nlohmann::json::object();
};

std::string SerializeCheckpoint(const Checkpoint& checkpoint);
Checkpoint DeserializeCheckpoint(const std::string& bytes);

void SaveCheckpoint(const Checkpoint& checkpoint, const std::string& path);
// Throws std::runtime_error on missing files or malformed content.
Checkpoint LoadCheckpoint(const std::string& path);

// FNV-1a over the float32 payload.
std::uint64_t ParamsHash(const ParamSet& params);

std::uint64_t Fnv1a(const std::string& bytes);

}  // namespace advpong

#endif  // ADVPONG_CHECKPOINT_H_
