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

#include "effbench/scoring.h"

#include <cmath>
#include <cstdio>

#include "effbench/metering.h"

namespace effbench {

void ReferenceBaseline::Validate(std::span<const TaskSpec> tasks,
                                 ScoreBasis basis) const {
  std::string missing;
  for (const TaskSpec& task : tasks) {
    auto it = per_task.find(task.name);
    if (it == per_task.end()) {
      missing += (missing.empty() ? "" : ", ") + task.name;
      continue;
    }
    const double value = basis == ScoreBasis::kTime ? it->second.time
                                                    : it->second.cost_usd;
    if (!(value > 0.0)) {
      throw UsageError("reference " + model_name + ": " +
                       std::string(ToString(basis)) + " value for '" +
                       task.name + "' must be positive");
    }
  }
  if (!missing.empty()) {
    throw UsageError("reference " + model_name + " has no entry for: " +
                     missing);
  }
}

ReferenceBaseline ReferenceBaseline::FromConfig(const BenchmarkConfig& config,
                                                Phase phase) {
  ReferenceBaseline baseline;
  baseline.model_name = config.reference_model;
  auto table = config.reference.find(phase);
  if (table == config.reference.end()) return baseline;
  for (const auto& [task, entry] : table->second) {
    ReferenceValues values;
    values.time = entry.time;
    if (entry.cost_usd) {
      values.cost_usd = *entry.cost_usd;
    } else if (config.hardware) {
      const double seconds =
          phase == Phase::kInference ? entry.time / 1000.0 : entry.time;
      values.cost_usd = ComputeCost(seconds / 3600.0, *config.hardware);
    }
    baseline.per_task.emplace(task, values);
  }
  return baseline;
}

ReferenceBaseline ReferenceBaseline::FromResults(
    const std::string& model_name,
    const std::map<std::string, PhaseResult>& results) {
  ReferenceBaseline baseline;
  baseline.model_name = model_name;
  for (const auto& [task, result] : results) {
    const auto time = RawValue(result, ScoreBasis::kTime);
    const auto cost = RawValue(result, ScoreBasis::kCost);
    if (!time) {
      throw UsageError("reference run " + model_name + " did not reach task '" +
                       task + "'");
    }
    baseline.per_task.emplace(task, ReferenceValues{*time, cost.value_or(0.0)});
  }
  return baseline;
}

int64_t ToDisplayCents(double score) {
  // The epsilon keeps values such as 2.675 (stored as 2.67499...) rounding up
  // as their decimal spelling says they should.
  return static_cast<int64_t>(std::floor(score * 100.0 + 0.5 + 1e-9));
}

double RoundForDisplay(double score) {
  return static_cast<double>(ToDisplayCents(score)) / 100.0;
}

double TaskScoreValue(double reference_value,
                      std::optional<double> model_value) {
  if (!(reference_value > 0.0) || !std::isfinite(reference_value)) {
    throw UsageError("task score: reference value must be > 0");
  }
  if (!model_value) return 0.0;
  if (!(*model_value > 0.0) || !std::isfinite(*model_value)) {
    throw UsageError("task score: model value must be > 0");
  }
  return reference_value / *model_value;
}

double OverallScore(std::span<const double> per_task_scores) {
  int64_t cents = 0;
  for (double s : per_task_scores) {
    if (!(s >= 0.0)) throw UsageError("overall score: negative task score");
    cents += ToDisplayCents(s);
  }
  return static_cast<double>(cents) / 100.0;
}

std::optional<double> RawValue(const PhaseResult& result, ScoreBasis basis) {
  if (result.status != PhaseStatus::kReached) return std::nullopt;
  double value = basis == ScoreBasis::kTime ? result.metered_seconds
                                            : result.cost_usd;
  if (result.phase == Phase::kInference) {
    if (result.instance_count <= 0) return std::nullopt;
    value /= static_cast<double>(result.instance_count);
    if (basis == ScoreBasis::kTime) value *= 1000.0;
  }
  if (!(value > 0.0)) return std::nullopt;
  return value;
}

ScoreCard ScorecardFromRaw(
    const std::string& model_name, Phase phase, ScoreBasis basis,
    const std::vector<std::pair<std::string, std::optional<double>>>& raw,
    const ReferenceBaseline& reference) {
  ScoreCard card;
  card.model_name = model_name;
  card.phase = phase;
  card.basis = basis;
  for (const auto& [task, value] : raw) {
    auto ref = reference.per_task.find(task);
    if (ref == reference.per_task.end()) {
      throw UsageError("reference has no entry for task '" + task + "'");
    }
    const double ref_value =
        basis == ScoreBasis::kTime ? ref->second.time : ref->second.cost_usd;
    TaskScore s;
    s.task = task;
    s.raw_value = value;
    s.score = TaskScoreValue(ref_value, value);
    s.display_score = RoundForDisplay(s.score);
    s.status = value ? PhaseStatus::kReached : PhaseStatus::kNotReached;
    card.overall_score += s.score;
    card.overall_cents += ToDisplayCents(s.score);
    card.per_task.push_back(std::move(s));
  }
  return card;
}

ScoreCard BuildScorecard(const std::string& model_name, Phase phase,
                         const std::map<std::string, PhaseResult>& results,
                         const ReferenceBaseline& reference, ScoreBasis basis,
                         std::span<const TaskSpec> tasks) {
  std::string missing;
  for (const TaskSpec& task : tasks) {
    if (!results.count(task.name)) {
      missing += (missing.empty() ? "" : ", ") + task.name;
    }
  }
  if (!missing.empty()) {
    throw UsageError("scorecard for " + model_name +
                     " is missing results for: " + missing);
  }
  reference.Validate(tasks, basis);

  std::vector<std::pair<std::string, std::optional<double>>> raw;
  for (const TaskSpec& task : tasks) {
    raw.emplace_back(task.name, RawValue(results.at(task.name), basis));
  }
  ScoreCard card = ScorecardFromRaw(model_name, phase, basis, raw, reference);
  for (TaskScore& s : card.per_task) {
    s.status = results.at(s.task).status;
    if (s.status != PhaseStatus::kReached) {
      s.raw_value.reset();
      s.score = 0.0;
      s.display_score = 0.0;
    }
  }
  return card;
}

std::string FormatScore(double display_score) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", display_score);
  return buf;
}

nlohmann::json ScoreCardToJson(const ScoreCard& card) {
  nlohmann::json per_task = nlohmann::json::array();
  for (const TaskScore& s : card.per_task) {
    nlohmann::json entry = {
        {"task", s.task},
        {"raw", nullptr},
        {"score", s.score},
        {"display", FormatScore(s.display_score)},
        {"status", ToString(s.status)},
    };
    if (s.raw_value) entry["raw"] = *s.raw_value;
    per_task.push_back(std::move(entry));
  }
  return {
      {"model", card.model_name},
      {"phase", ToString(card.phase)},
      {"basis", ToString(card.basis)},
      {"per_task", std::move(per_task)},
      {"overall", {{"raw", card.overall_score},
                   {"display", FormatScore(card.DisplayOverall())}}},
  };
}

ScoreCard ScoreCardFromJson(const nlohmann::json& doc) {
  try {
    ScoreCard card;
    card.model_name = doc.at("model").get<std::string>();
    card.phase = ParsePhase(doc.at("phase").get<std::string>());
    card.basis = ParseScoreBasis(doc.at("basis").get<std::string>());
    for (const auto& entry : doc.at("per_task")) {
      TaskScore s;
      s.task = entry.at("task").get<std::string>();
      if (!entry.at("raw").is_null()) s.raw_value = entry["raw"].get<double>();
      s.score = entry.at("score").get<double>();
      s.display_score = RoundForDisplay(s.score);
      s.status = ParsePhaseStatus(entry.at("status").get<std::string>());
      card.overall_cents += ToDisplayCents(s.score);
      card.per_task.push_back(std::move(s));
    }
    card.overall_score = doc.at("overall").at("raw").get<double>();
    return card;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed scorecard: ") + e.what());
  }
}

}  // namespace effbench
