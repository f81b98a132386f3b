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

#include "advpong/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace advpong {
namespace {

constexpr const char* kMagic = "ADVPONG-CHECKPOINT";

std::string Payload(const ParamSet& params) {
  std::string out;
  out.reserve(params.size() * 4);
  for (double v : params.values()) {
    const std::uint32_t bits =
        std::bit_cast<std::uint32_t>(static_cast<float>(v));
    for (int b = 0; b < 4; ++b) out.push_back(char((bits >> (8 * b)) & 0xff));
  }
  return out;
}

}  // namespace

std::uint64_t Fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t ParamsHash(const ParamSet& params) {
  return Fnv1a(Payload(params));
}

std::string SerializeCheckpoint(const Checkpoint& checkpoint) {
  const ParamSet& params = checkpoint.params;
  nlohmann::json tensors = nlohmann::json::array();
  for (const TensorInfo& t : params.tensors()) {
    tensors.push_back({{"name", t.name}, {"shape", t.shape}});
  }
  nlohmann::json header = {
      {"format_version", kCheckpointFormatVersion},
      {"architecture", params.architecture().ToJson()},
      {"tensors", tensors},
      {"dtype", "float32-le"},
      {"seed", checkpoint.seed},
      {"train_steps", checkpoint.train_steps},
      {"episodes", checkpoint.episodes},
      {"metadata", checkpoint.metadata},
  };
  return std::string(kMagic) + "\n" + header.dump() + "\n" + Payload(params);
}

Checkpoint DeserializeCheckpoint(const std::string& bytes) {
  const std::size_t magic_end = bytes.find('\n');
  if (magic_end == std::string::npos || bytes.substr(0, magic_end) != kMagic) {
    throw std::runtime_error("checkpoint: bad magic");
  }
  const std::size_t header_end = bytes.find('\n', magic_end + 1);
  if (header_end == std::string::npos) {
    throw std::runtime_error("checkpoint: truncated header");
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(
        bytes.substr(magic_end + 1, header_end - magic_end - 1));
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("checkpoint: bad header: ") +
                             e.what());
  }
  if (header.value("format_version", 0) != kCheckpointFormatVersion) {
    throw std::runtime_error("checkpoint: unsupported format version");
  }
  Checkpoint ckpt;
  try {
    ckpt.params =
        ParamSet::Zeros(Architecture::FromJson(header.at("architecture")));
    const auto& declared = header.at("tensors");
    const auto& layout = ckpt.params.tensors();
    if (declared.size() != layout.size()) {
      throw std::runtime_error("checkpoint: tensor count mismatch");
    }
    for (std::size_t i = 0; i < layout.size(); ++i) {
      if (declared[i].at("name").get<std::string>() != layout[i].name ||
          declared[i].at("shape").get<std::vector<int>>() != layout[i].shape) {
        throw std::runtime_error("checkpoint: tensor layout mismatch at " +
                                 layout[i].name);
      }
    }
    ckpt.seed = header.at("seed").get<std::uint64_t>();
    ckpt.train_steps = header.at("train_steps").get<std::int64_t>();
    ckpt.episodes = header.at("episodes").get<std::int64_t>();
    ckpt.metadata = header.at("metadata");
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("checkpoint: bad header: ") +
                             e.what());
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("checkpoint: ") + e.what());
  }
  const std::size_t payload = header_end + 1;
  if (bytes.size() - payload != ckpt.params.size() * 4) {
    throw std::runtime_error("checkpoint: payload size mismatch");
  }
  auto values = ckpt.params.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) {
      bits |=
          std::uint32_t(static_cast<unsigned char>(bytes[payload + 4 * i + b]))
          << (8 * b);
    }
    values[i] = static_cast<double>(std::bit_cast<float>(bits));
  }
  if (!ckpt.params.AllFinite()) {
    throw std::runtime_error("checkpoint: non-finite weights");
  }
  return ckpt;
}

void SaveCheckpoint(const Checkpoint& checkpoint, const std::string& path) {
  const std::string bytes = SerializeCheckpoint(checkpoint);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

Checkpoint LoadCheckpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return DeserializeCheckpoint(ss.str());
}

}  // namespace advpong
