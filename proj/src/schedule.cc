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

#include "advpong/schedule.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace advpong {

void ValidateStrategy(const InjectionStrategy& strategy) {
  if (const auto* p = std::get_if<Periodic>(&strategy); p && p->period < 1) {
    throw std::invalid_argument("periodic strategy needs period >= 1");
  }
  if (const auto* v = std::get_if<ValueThreshold>(&strategy);
      v && !std::isfinite(v->threshold)) {
    throw std::invalid_argument("value threshold must be finite");
  }
}

std::string StrategyName(const InjectionStrategy& strategy) {
  if (std::holds_alternative<EveryFrame>(strategy)) return "every_frame";
  if (const auto* p = std::get_if<Periodic>(&strategy)) {
    return std::string(p->fill == PeriodicFill::kClean ? "periodic_clean_"
                                                       : "periodic_reuse_") +
           std::to_string(p->period);
  }
  return "value_threshold";
}

nlohmann::json ToJson(const InjectionStrategy& strategy) {
  nlohmann::json j = {{"name", StrategyName(strategy)}};
  if (const auto* p = std::get_if<Periodic>(&strategy)) {
    j["period"] = p->period;
    j["fill"] = p->fill == PeriodicFill::kClean ? "clean" : "reuse";
  } else if (const auto* v = std::get_if<ValueThreshold>(&strategy)) {
    j["threshold"] = v->threshold;
  }
  return j;
}

const char* DecisionName(InjectionDecision decision) {
  switch (decision) {
    case InjectionDecision::kFreshInject:
      return "fresh";
    case InjectionDecision::kReuseCached:
      return "reuse";
    case InjectionDecision::kClean:
      return "clean";
  }
  return "?";
}

InjectionDecision Decide(const InjectionStrategy& strategy, int frame_index,
                         double value_estimate, bool cache_nonempty) {
  if (frame_index < 0) throw std::invalid_argument("frame index must be >= 0");
  if (std::holds_alternative<EveryFrame>(strategy)) {
    return InjectionDecision::kFreshInject;
  }
  if (const auto* p = std::get_if<Periodic>(&strategy)) {
    if (frame_index % p->period == 0) return InjectionDecision::kFreshInject;
    if (p->fill == PeriodicFill::kReuse && cache_nonempty) {
      return InjectionDecision::kReuseCached;
    }
    return InjectionDecision::kClean;
  }
  const auto& v = std::get<ValueThreshold>(strategy);
  return value_estimate > v.threshold ? InjectionDecision::kFreshInject
                                      : InjectionDecision::kClean;
}

void InjectionLog::Record(InjectionDecision decision) {
  if (episodes_.empty()) BeginEpisode();
  episodes_.back().push_back(decision);
}

std::vector<int> InjectionLog::InjectionCounts() const {
  std::vector<int> counts;
  counts.reserve(episodes_.size());
  for (const auto& ep : episodes_) {
    counts.push_back(static_cast<int>(std::count_if(
        ep.begin(), ep.end(),
        [](InjectionDecision d) { return d != InjectionDecision::kClean; })));
  }
  return counts;
}

void InjectionLog::Append(const InjectionLog& other) {
  episodes_.insert(episodes_.end(), other.episodes_.begin(),
                   other.episodes_.end());
}

InjectionStats ComputeInjectionStats(const InjectionLog& log) {
  if (log.episodes() == 0)
    throw std::invalid_argument("injection stats: empty log");
  InjectionStats stats;
  for (const auto& ep : log.decisions())
    stats.frames += std::int64_t(ep.size());
  for (int c : log.InjectionCounts()) stats.injections += c;
  stats.mean_injections_per_episode = double(stats.injections) / log.episodes();
  stats.fraction_injected =
      stats.frames > 0 ? double(stats.injections) / double(stats.frames) : 0.0;
  return stats;
}

double CalibrateThreshold(std::span<const double> values, double quantile) {
  if (values.empty()) throw std::invalid_argument("calibrate: no values");
  if (!(quantile > 0.0 && quantile < 1.0)) {
    throw std::invalid_argument("calibrate: quantile must be in (0, 1)");
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double pos = quantile * double(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - double(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace advpong
