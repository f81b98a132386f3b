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

#ifndef ADVPONG_SCHEDULE_H_
#define ADVPONG_SCHEDULE_H_

// Per-frame injection schedules:
//   EveryFrame            fresh perturbation on every frame
//   Periodic{N, Clean}    fresh on frames 0, N, 2N, ...; clean in between
//   Periodic{N, Reuse}    fresh on frames 0, N, 2N, ...; cached in between
//   ValueThreshold{tau}   fresh whenever V(clean frame) > tau

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace advpong {

struct EveryFrame {
  bool operator==(const EveryFrame&) const = default;
};

enum class PeriodicFill { kClean, kReuse };

struct Periodic {
  int period = 10;
  PeriodicFill fill = PeriodicFill::kClean;
  bool operator==(const Periodic&) const = default;
};

struct ValueThreshold {
  double threshold = 1.4;
  bool operator==(const ValueThreshold&) const = default;
};

using InjectionStrategy = std::variant<EveryFrame, Periodic, ValueThreshold>;

// Throws std::invalid_argument for a period < 1 or a non-finite threshold.
void ValidateStrategy(const InjectionStrategy& strategy);

// "every_frame", "periodic_clean_N", "periodic_reuse_N", "value_threshold".
std::string StrategyName(const InjectionStrategy& strategy);
nlohmann::json ToJson(const InjectionStrategy& strategy);

enum class InjectionDecision { kFreshInject, kReuseCached, kClean };

const char* DecisionName(InjectionDecision decision);

// Pure. `value_estimate` must come from the clean frame.
InjectionDecision Decide(const InjectionStrategy& strategy, int frame_index,
                         double value_estimate, bool cache_nonempty);

class InjectionLog {
 public:
  void BeginEpisode() { episodes_.emplace_back(); }
  // Appends to the current episode, starting one if none is open.
  void Record(InjectionDecision decision);

  int episodes() const { return static_cast<int>(episodes_.size()); }
  const std::vector<std::vector<InjectionDecision>>& decisions() const {
    return episodes_;
  }
  // Non-clean decisions per episode.
  std::vector<int> InjectionCounts() const;

  void Append(const InjectionLog& other);

 private:
  std::vector<std::vector<InjectionDecision>> episodes_;
};

struct InjectionStats {
  double mean_injections_per_episode = 0.0;
  double fraction_injected = 0.0;
  std::int64_t frames = 0;
  std::int64_t injections = 0;
};

// Throws std::invalid_argument for an empty log.
InjectionStats ComputeInjectionStats(const InjectionLog& log);

// Empirical quantile with linear interpolation between order statistics
// (position q * (n - 1)). Throws for empty input or q outside (0, 1).
double CalibrateThreshold(std::span<const double> values, double quantile);

}  // namespace advpong

#endif  // ADVPONG_SCHEDULE_H_
