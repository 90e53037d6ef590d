/* Copyright 2026 The Effbench Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "effbench/types.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <utility>

namespace effbench {
namespace {

template <typename Enum, size_t N>
Enum ParseEnum(std::string_view text,
               const std::array<std::pair<std::string_view, Enum>, N>& table,
               std::string_view what) {
  for (const auto& [name, value] : table) {
    if (name == text) return value;
  }
  throw UsageError("unknown " + std::string(what) + " '" + std::string(text) +
                   "'");
}

constexpr std::array<std::pair<std::string_view, MetricKind>, 3> kMetricKinds{{
    {"accuracy", MetricKind::kAccuracy},
    {"entity_f1", MetricKind::kEntityF1},
    {"mnli_avg_accuracy", MetricKind::kMnliAvgAccuracy},
}};

constexpr std::array<std::pair<std::string_view, Phase>, 3> kPhases{{
    {"pretrain", Phase::kPretrain},
    {"finetune", Phase::kFinetune},
    {"inference", Phase::kInference},
}};

constexpr std::array<std::pair<std::string_view, PhaseStatus>, 3> kStatuses{{
    {"reached", PhaseStatus::kReached},
    {"not_reached", PhaseStatus::kNotReached},
    {"aborted", PhaseStatus::kAborted},
}};

constexpr std::array<std::pair<std::string_view, ScoreBasis>, 2> kBases{{
    {"time", ScoreBasis::kTime},
    {"cost", ScoreBasis::kCost},
}};

constexpr std::array<std::pair<std::string_view, HardwareKind>, 3>
    kHardwareKinds{{
        {"tpu_v3", HardwareKind::kTpuV3},
        {"gpu_v100", HardwareKind::kGpuV100},
        {"custom", HardwareKind::kCustom},
    }};

template <typename Enum, size_t N>
std::string_view NameOf(
    Enum value, const std::array<std::pair<std::string_view, Enum>, N>& table) {
  for (const auto& [name, v] : table) {
    if (v == value) return name;
  }
  return "?";
}

}  // namespace

std::string_view ToString(MetricKind kind) { return NameOf(kind, kMetricKinds); }
std::string_view ToString(Phase phase) { return NameOf(phase, kPhases); }
std::string_view ToString(PhaseStatus status) {
  return NameOf(status, kStatuses);
}
std::string_view ToString(ScoreBasis basis) { return NameOf(basis, kBases); }
std::string_view ToString(HardwareKind kind) {
  return NameOf(kind, kHardwareKinds);
}

MetricKind ParseMetricKind(std::string_view text) {
  return ParseEnum(text, kMetricKinds, "metric kind");
}
Phase ParsePhase(std::string_view text) {
  return ParseEnum(text, kPhases, "phase");
}
PhaseStatus ParsePhaseStatus(std::string_view text) {
  return ParseEnum(text, kStatuses, "status");
}
ScoreBasis ParseScoreBasis(std::string_view text) {
  return ParseEnum(text, kBases, "score basis");
}
HardwareKind ParseHardwareKind(std::string_view text) {
  return ParseEnum(text, kHardwareKinds, "hardware kind");
}

void TaskSpec::Validate() const {
  if (name.empty()) throw ConfigError("tasks[].name: must be nonempty");
  const double max = MetricScaleMax(metric_kind);
  if (!std::isfinite(cutoff) || cutoff <= 0.0 || cutoff >= max) {
    throw ConfigError("tasks[" + name + "].cutoff: must lie in (0, " +
                      std::to_string(static_cast<int>(max)) + "), got " +
                      std::to_string(cutoff));
  }
  if (epoch_budget < 1) {
    throw ConfigError("tasks[" + name + "].epoch_budget: must be >= 1");
  }
  if (train_size < 0 || dev_size < 0) {
    throw ConfigError("tasks[" + name + "]: dataset sizes must be >= 0");
  }
}

void HardwareProfile::Validate() const {
  if (!std::isfinite(unit_price_per_hour) || unit_price_per_hour < 0.0) {
    throw ConfigError("hardware.unit_price_per_hour: must be >= 0");
  }
  if (unit_count < 1) throw ConfigError("hardware.unit_count: must be >= 1");
  if (chips_per_unit < 1) {
    throw ConfigError("hardware.chips_per_unit: must be >= 1");
  }
}

HardwareProfile HardwareProfile::TpuV3(int64_t chips) {
  return {HardwareKind::kTpuV3, chips, 8.0, 4};
}

HardwareProfile HardwareProfile::GpuV100(int64_t gpus) {
  return {HardwareKind::kGpuV100, gpus, 3.06, 1};
}

bool MeasurementSeries::IsValid() const {
  for (size_t i = 0; i < points.size(); ++i) {
    const MeasurementPoint& p = points[i];
    if (!(p.elapsed_seconds >= 0.0) || !(p.epoch_fraction >= 0.0) ||
        !std::isfinite(p.metric_value)) {
      return false;
    }
    if (i > 0) {
      const MeasurementPoint& prev = points[i - 1];
      if (!(p.elapsed_seconds > prev.elapsed_seconds)) return false;
      if (p.epoch_fraction < prev.epoch_fraction) return false;
    }
  }
  return true;
}

double MeasurementSeries::MaxEpochFraction() const {
  double best = 0.0;
  for (const MeasurementPoint& p : points) {
    best = std::max(best, p.epoch_fraction);
  }
  return best;
}

bool PhaseResult::IsConsistent(int epoch_budget) const {
  if (metered_seconds < 0.0 || cost_usd < 0.0) return false;
  // Allow for floating-point noise in the pause accounting.
  if (metered_seconds > wall_seconds + 1e-9) return false;
  // Inference has no metric threshold, so it never records a crossing.
  if (phase != Phase::kInference &&
      (status == PhaseStatus::kReached) != crossing.has_value()) {
    return false;
  }
  if (status == PhaseStatus::kNotReached && phase == Phase::kFinetune &&
      epochs_consumed < epoch_budget) {
    return false;
  }
  return true;
}

const TaskScore* ScoreCard::Find(std::string_view task) const {
  for (const TaskScore& s : per_task) {
    if (s.task == task) return &s;
  }
  return nullptr;
}

}  // namespace effbench
