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
/// \brief Submission validation, ranking and report rendering.

#ifndef EFFBENCH_LEADERBOARD_H_
#define EFFBENCH_LEADERBOARD_H_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "effbench/config.h"
#include "effbench/types.h"

namespace effbench {

/// Per-task claim inside a submission. Paths are relative to the archive.
struct TaskClaim {
  PhaseStatus status = PhaseStatus::kNotReached;
  std::optional<double> claimed_metric;
  std::optional<double> claimed_seconds;
  std::optional<double> claimed_cost_usd;
  std::string predictions;  // directory, e.g. predictions/<task>
  std::string log;          // e.g. logs/finetune-<task>.events

  friend bool operator==(const TaskClaim&, const TaskClaim&) = default;
};

/// \brief Manifest (`submission.json`) of a submission archive directory.
struct SubmissionRecord {
  std::string model_name;
  std::string hardware;
  std::optional<double> params_millions;
  std::string source;  // URL or archive hash
  Phase phase = Phase::kFinetune;
  std::map<std::string, TaskClaim> tasks;

  friend bool operator==(const SubmissionRecord&,
                         const SubmissionRecord&) = default;
};

inline constexpr std::string_view kSubmissionManifest = "submission.json";

nlohmann::json SubmissionToJson(const SubmissionRecord& record);
/// Lenient about missing fields (validation reports them); throws
/// ConfigError only for a manifest that is not a JSON object.
SubmissionRecord SubmissionFromJson(const nlohmann::json& doc);

SubmissionRecord LoadSubmission(const std::filesystem::path& archive);
void WriteSubmissionManifest(const std::filesystem::path& archive,
                             const SubmissionRecord& record);

struct ValidationReport {
  bool passed = true;
  std::vector<std::string> reasons;
  // Task -> percentage of the dev set covered by the submitted predictions.
  std::map<std::string, double> coverage_percent;

  void Fail(std::string reason) {
    passed = false;
    reasons.push_back(std::move(reason));
  }
};

/// Recomputed metrics must match claims within this many points.
inline constexpr double kMetricTolerance = 0.1;

/// Checks required fields, recomputed metrics, crossing consistency with the
/// submitted logs, N/A epoch budgets and presence of a source reference.
ValidationReport ValidateSubmission(const SubmissionRecord& record,
                                    const std::filesystem::path& archive,
                                    const BenchmarkConfig& config);

/// Dev series reconstructed from a harness event log (eval lines carrying
/// `t_metered`). Throws ConfigError for unreadable logs.
MeasurementSeries ReadLogSeries(const std::filesystem::path& path,
                                MetricKind kind);

struct Leaderboard {
  Phase phase = Phase::kFinetune;
  ScoreBasis basis = ScoreBasis::kTime;
  std::vector<std::string> tasks;
  std::vector<ScoreCard> entries;  // ranked
};

/// Descending by displayed overall, ties by ascending model name. Throws
/// UsageError when cards mix bases, phases or task sets.
Leaderboard Rank(std::vector<ScoreCard> scorecards);

/// Ranks an empty board for the given task set.
Leaderboard EmptyLeaderboard(Phase phase, ScoreBasis basis,
                             std::vector<std::string> tasks);

enum class RenderFormat { kJson, kMarkdown, kHtml };

RenderFormat ParseRenderFormat(std::string_view text);

/// Deterministic bytes for a given board; `config_echo` is embedded in the
/// json and html documents.
std::string Render(const Leaderboard& board, RenderFormat format,
                   const nlohmann::json& config_echo);

}  // namespace effbench

#endif  // EFFBENCH_LEADERBOARD_H_
