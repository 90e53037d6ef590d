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

/// \file
/// \brief Domain types shared by every effbench module.

#ifndef EFFBENCH_TYPES_H_
#define EFFBENCH_TYPES_H_

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace effbench {

/// \brief Raised when a caller violates an operation's preconditions.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// \brief Raised when a config or record fails schema or invariant checks.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class MetricKind { kAccuracy, kEntityF1, kMnliAvgAccuracy };

enum class Phase { kPretrain, kFinetune, kInference };

enum class PhaseStatus { kReached, kNotReached, kAborted };

enum class ScoreBasis { kTime, kCost };

std::string_view ToString(MetricKind kind);
std::string_view ToString(Phase phase);
std::string_view ToString(PhaseStatus status);
std::string_view ToString(ScoreBasis basis);

// Parsers throw UsageError naming the unrecognized value.
MetricKind ParseMetricKind(std::string_view text);
Phase ParsePhase(std::string_view text);
PhaseStatus ParsePhaseStatus(std::string_view text);
ScoreBasis ParseScoreBasis(std::string_view text);

/// Upper end of a metric's native scale. All task metrics are percentages.
constexpr double MetricScaleMax(MetricKind) { return 100.0; }

/// \brief A benchmark task with its qualification threshold.
///
/// Metrics live on their native percentage scale (a cutoff of 91 means
/// 91.0 F1 points, not 0.91).
struct TaskSpec {
  std::string name;
  MetricKind metric_kind = MetricKind::kAccuracy;
  double cutoff = 0.0;
  int epoch_budget = 5;
  int64_t train_size = 0;
  int64_t dev_size = 0;

  /// Throws ConfigError if any invariant fails.
  void Validate() const;

  friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

enum class HardwareKind { kTpuV3, kGpuV100, kCustom };

std::string_view ToString(HardwareKind kind);
HardwareKind ParseHardwareKind(std::string_view text);

/// \brief Billing description of the machine a phase runs on.
///
/// `unit_count` is the number of devices (TPU chips or GPUs). TPU prices are
/// quoted per group of `chips_per_unit` chips.
struct HardwareProfile {
  HardwareKind kind = HardwareKind::kGpuV100;
  int64_t unit_count = 1;
  double unit_price_per_hour = 0.0;
  int64_t chips_per_unit = 1;

  void Validate() const;

  /// $8/hour per 4-chip TPU v3 group.
  static HardwareProfile TpuV3(int64_t chips);
  /// $3.06/hour per V100.
  static HardwareProfile GpuV100(int64_t gpus);

  friend bool operator==(const HardwareProfile&,
                         const HardwareProfile&) = default;
};

struct MeasurementPoint {
  double elapsed_seconds = 0.0;  // metered, excludes eval pauses
  double metric_value = 0.0;
  double epoch_fraction = 0.0;
  double wall_seconds = 0.0;  // inclusive of eval pauses

  friend bool operator==(const MeasurementPoint&,
                         const MeasurementPoint&) = default;
};

/// \brief Time-stamped dev-set evaluations of a single run.
struct MeasurementSeries {
  MetricKind metric_kind = MetricKind::kAccuracy;
  std::vector<MeasurementPoint> points;

  /// True when elapsed is strictly increasing and epochs nondecreasing.
  bool IsValid() const;
  double MaxEpochFraction() const;

  friend bool operator==(const MeasurementSeries&,
                         const MeasurementSeries&) = default;
};

struct CrossingPoint {
  double elapsed_seconds = 0.0;
  double metric_value = 0.0;

  friend bool operator==(const CrossingPoint&, const CrossingPoint&) = default;
};

/// \brief Metered outcome of one phase of one task.
struct PhaseResult {
  Phase phase = Phase::kFinetune;
  PhaseStatus status = PhaseStatus::kAborted;
  double metered_seconds = 0.0;
  double wall_seconds = 0.0;
  double cost_usd = 0.0;
  std::optional<CrossingPoint> crossing;
  double epochs_consumed = 0.0;
  // Inference only: number of instances the trainer reported.
  int64_t instance_count = 0;
  std::string diagnostic;

  /// Checks the status/crossing/timing invariants for a given epoch budget.
  bool IsConsistent(int epoch_budget) const;

  friend bool operator==(const PhaseResult&, const PhaseResult&) = default;
};

struct TaskScore {
  std::string task;
  std::optional<double> raw_value;  // seconds or USD, absent when N/A
  double score = 0.0;               // full precision
  double display_score = 0.0;       // rounded half-up to 2 decimals
  PhaseStatus status = PhaseStatus::kAborted;

  friend bool operator==(const TaskScore&, const TaskScore&) = default;
};

/// \brief Normalized per-task and overall efficiency scores for one model.
struct ScoreCard {
  std::string model_name;
  Phase phase = Phase::kFinetune;
  ScoreBasis basis = ScoreBasis::kTime;
  std::vector<TaskScore> per_task;  // config task order
  double overall_score = 0.0;       // sum of full-precision scores
  int64_t overall_cents = 0;        // sum of displayed per-task scores

  double DisplayOverall() const { return overall_cents / 100.0; }
  const TaskScore* Find(std::string_view task) const;

  friend bool operator==(const ScoreCard&, const ScoreCard&) = default;
};

}  // namespace effbench

#endif  // EFFBENCH_TYPES_H_
