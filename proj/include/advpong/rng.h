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

#ifndef ADVPONG_RNG_H_
#define ADVPONG_RNG_H_

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace advpong {

// SplitMix64 generator. The whole state is one word, so it can live inside
// value types (GameState) and be copied to replay a stream exactly.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) : state_(seed) {}

  std::uint64_t operator()() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1) with 53 random bits.
  double Uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  // Uniform integer on [0, n). Rejection sampling, no modulo bias.
  int UniformInt(int n);

  // Standard normal via Box-Muller (one value per call, second discarded).
  double Normal();

  std::uint64_t state() const { return state_; }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

 private:
  std::uint64_t state_;
};

// Derives an independent stream seed from a root seed and a path of stream
// identifiers, e.g. DeriveSeed(root, {kEvalEnvStream, episode}).
std::uint64_t DeriveSeed(std::uint64_t root,
                         std::initializer_list<std::uint64_t> path);

// Stream identifiers. Every random draw in the project goes through one of
// these so runs are reproducible from a single root seed.
enum Stream : std::uint64_t {
  kInitStream = 1,
  kTrainEnvStream = 2,
  kTrainPolicyStream = 3,
  kTrainNoiseStream = 4,
  kEvalEnvStream = 5,
  kEvalPolicyStream = 6,
  kEvalNoiseStream = 7,
  kBoundaryDirectionStream = 8,
  kBoundaryCellStream = 9,
  kCalibrationStream = 10,
  kRetrainStream = 11,
};

}  // namespace advpong

#endif  // ADVPONG_RNG_H_
