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

#include "golden.h"

#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "effbench/config.h"
#include "effbench/scoring.h"

namespace effbench::testing {

const GoldenRow& GoldenTable::Row(const std::string& model) const {
  for (const GoldenRow& row : rows) {
    if (row.model == model) return row;
  }
  throw std::out_of_range("no golden row for " + model);
}

const GoldenDiscrepancy* GoldenTable::FindDiscrepancy(
    const std::string& model, const std::string& task) const {
  for (const GoldenDiscrepancy& d : discrepancies) {
    if (d.model == model && d.task == task) return &d;
  }
  return nullptr;
}

GoldenTable LoadGoldenTable(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const nlohmann::json doc = nlohmann::json::parse(in);
  GoldenTable table;
  table.phase = ParsePhase(doc.at("phase").get<std::string>());
  table.reference = doc.at("reference").get<std::string>();
  table.tasks = doc.at("tasks").get<std::vector<std::string>>();
  for (const auto& r : doc.at("rows")) {
    GoldenRow row;
    row.model = r.at("model").get<std::string>();
    for (const auto& [task, t] : r.at("time").items()) {
      row.time[task] = t.is_null() ? std::nullopt
                                   : std::optional<double>(t.get<double>());
    }
    row.score = r.at("score").get<std::map<std::string, std::string>>();
    row.overall = r.at("overall").get<std::string>();
    table.rows.push_back(std::move(row));
  }
  for (const auto& d : doc.at("discrepancies")) {
    table.discrepancies.push_back(
        {d.at("model").get<std::string>(), d.at("task").get<std::string>(),
         d.at("printed_score").get<std::string>(),
         d.at("expected_score").get<std::string>(),
         d.at("printed_overall").get<std::string>(),
         d.at("expected_overall").get<std::string>()});
  }
  return table;
}

int64_t ParseCents(const std::string& text) {
  const size_t dot = text.find('.');
  const std::string whole = text.substr(0, dot);
  std::string frac = dot == std::string::npos ? "" : text.substr(dot + 1);
  if (frac.size() > 2) throw std::invalid_argument("more than 2 decimals");
  while (frac.size() < 2) frac.push_back('0');
  return std::stoll(whole) * 100 + std::stoll(frac);
}

namespace {

std::string CentsText(int64_t cents) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%lld.%02lld",
                static_cast<long long>(cents / 100),
                static_cast<long long>(cents % 100));
  return buf;
}

PhaseResult ResultFor(Phase phase, std::optional<double> time) {
  PhaseResult r;
  r.phase = phase;
  if (!time) {
    r.status = PhaseStatus::kNotReached;
    r.epochs_consumed = 5.0;
    r.metered_seconds = 1.0;
    return r;
  }
  r.status = PhaseStatus::kReached;
  if (phase == Phase::kInference) {
    r.instance_count = kGoldenInferenceInstances;
    r.metered_seconds =
        *time * static_cast<double>(kGoldenInferenceInstances) / 1000.0;
  } else {
    r.metered_seconds = *time;
    r.crossing = CrossingPoint{*time, 100.0};
  }
  r.wall_seconds = r.metered_seconds;
  return r;
}

}  // namespace

std::vector<GoldenMismatch> CheckGoldenTable(const GoldenTable& table) {
  std::vector<TaskSpec> tasks;
  for (const std::string& name : table.tasks) {
    tasks.push_back({name, MetricKind::kAccuracy, 50.0, 5, 1, 1});
  }
  auto results_for = [&](const GoldenRow& row) {
    std::map<std::string, PhaseResult> results;
    for (const std::string& task : table.tasks) {
      results[task] = ResultFor(table.phase, row.time.at(task));
    }
    return results;
  };
  const ReferenceBaseline reference = ReferenceBaseline::FromResults(
      table.reference, results_for(table.Row(table.reference)));

  std::vector<GoldenMismatch> mismatches;
  for (const GoldenRow& row : table.rows) {
    const ScoreCard card =
        BuildScorecard(row.model, table.phase, results_for(row), reference,
                       ScoreBasis::kTime, tasks);
    for (const std::string& task : table.tasks) {
      const GoldenDiscrepancy* d = table.FindDiscrepancy(row.model, task);
      const std::string& expected = d ? d->expected_score : row.score.at(task);
      const std::string actual =
          CentsText(ToDisplayCents(card.Find(task)->score));
      if (ParseCents(expected) != ToDisplayCents(card.Find(task)->score)) {
        mismatches.push_back({row.model, task, expected, actual});
      }
    }
    std::string expected_overall = row.overall;
    for (const GoldenDiscrepancy& d : table.discrepancies) {
      if (d.model == row.model) expected_overall = d.expected_overall;
    }
    if (ParseCents(expected_overall) != card.overall_cents) {
      mismatches.push_back({row.model, "overall", expected_overall,
                            CentsText(card.overall_cents)});
    }
  }
  return mismatches;
}

}  // namespace effbench::testing
