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
/// \brief Reference-normalized efficiency scores.
///
/// A task score is reference_value / model_value (higher is better, the
/// reference scores 1). Displayed scores are rounded half-up to two
/// decimals and the displayed overall is the sum of the displayed per-task
/// scores; full-precision values are kept alongside.

#ifndef EFFBENCH_SCORING_H_
#define EFFBENCH_SCORING_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "effbench/config.h"
#include "effbench/types.h"

namespace effbench {

struct ReferenceValues {
  double time = 0.0;  // seconds, or ms per instance for inference
  double cost_usd = 0.0;
};

struct ReferenceBaseline {
  std::string model_name;
  std::map<std::string, ReferenceValues> per_task;

  /// Throws UsageError unless every task in `tasks` has a strictly positive
  /// reference value on `basis`.
  void Validate(std::span<const TaskSpec> tasks, ScoreBasis basis) const;

  /// Reference values for `phase` taken from the config. Missing costs are
  /// derived from the time through the configured hardware profile.
  static ReferenceBaseline FromConfig(const BenchmarkConfig& config,
                                      Phase phase);

  /// Baseline taken from a reference run in the same session. Every result
  /// must be reached.
  static ReferenceBaseline FromResults(
      const std::string& model_name,
      const std::map<std::string, PhaseResult>& results);
};

/// Rounds half-up to hundredths, returned as integer hundredths.
int64_t ToDisplayCents(double score);
double RoundForDisplay(double score);

/// reference / model, or 0 when the model value is absent (N/A).
double TaskScoreValue(double reference_value,
                      std::optional<double> model_value);

/// Sum of the per-task scores after each is rounded for display.
double OverallScore(std::span<const double> per_task_scores);

/// Time (phase-native unit) or cost the scorer compares for this result;
/// nullopt unless the phase reached its target. Inference values are per
/// instance.
std::optional<double> RawValue(const PhaseResult& result, ScoreBasis basis);

ScoreCard BuildScorecard(const std::string& model_name, Phase phase,
                         const std::map<std::string, PhaseResult>& results,
                         const ReferenceBaseline& reference, ScoreBasis basis,
                         std::span<const TaskSpec> tasks);

/// Scorecard from already-extracted raw values (absent = N/A). Used for
/// literature tables and for re-scoring stored results.
ScoreCard ScorecardFromRaw(
    const std::string& model_name, Phase phase, ScoreBasis basis,
    const std::vector<std::pair<std::string, std::optional<double>>>& raw,
    const ReferenceBaseline& reference);

std::string FormatScore(double display_score);

nlohmann::json ScoreCardToJson(const ScoreCard& card);
ScoreCard ScoreCardFromJson(const nlohmann::json& doc);

}  // namespace effbench

#endif  // EFFBENCH_SCORING_H_
