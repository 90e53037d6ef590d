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

#include "effbench/leaderboard.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "effbench/cutoff.h"
#include "effbench/metrics.h"
#include "effbench/protocol.h"
#include "effbench/scoring.h"

namespace effbench {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// Two decimals with a trailing zero dropped: 92.0, 88.1, 91.25.
std::string FormatPoints(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", value);
  std::string out = buf;
  if (out.size() > 3 && out.back() == '0') out.pop_back();
  return out;
}

std::optional<double> OptionalNumber(const json& doc, const char* key) {
  if (!doc.contains(key) || doc[key].is_null()) return std::nullopt;
  if (!doc[key].is_number()) {
    throw ConfigError(std::string("submission: '") + key +
                      "' must be a number");
  }
  return doc[key].get<double>();
}

std::string OptionalString(const json& doc, const char* key) {
  if (!doc.contains(key) || !doc[key].is_string()) return "";
  return doc[key].get<std::string>();
}

std::string HtmlEscape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out.push_back(c);
    }
  }
  return out;
}

std::string FormatRaw(const TaskScore& s, ScoreBasis basis) {
  if (!s.raw_value) {
    return s.status == PhaseStatus::kAborted ? "aborted" : "N/A";
  }
  char buf[48];
  if (basis == ScoreBasis::kTime) {
    std::snprintf(buf, sizeof(buf), "%.2f", *s.raw_value);
  } else if (*s.raw_value >= 0.01) {
    std::snprintf(buf, sizeof(buf), "$%.2f", *s.raw_value);
  } else {
    // Per-instance inference costs are far below a cent.
    std::snprintf(buf, sizeof(buf), "$%.3g", *s.raw_value);
  }
  return buf;
}

std::string RawHeader(ScoreBasis basis) {
  return basis == ScoreBasis::kTime ? "Time" : "Cost";
}

std::string RenderJson(const Leaderboard& board, const json& config_echo) {
  ordered_json doc;
  doc["phase"] = ToString(board.phase);
  doc["basis"] = ToString(board.basis);
  doc["tasks"] = board.tasks;
  ordered_json entries = ordered_json::array();
  for (size_t i = 0; i < board.entries.size(); ++i) {
    const ScoreCard& card = board.entries[i];
    ordered_json per_task = ordered_json::array();
    for (const TaskScore& s : card.per_task) {
      ordered_json t;
      t["task"] = s.task;
      t["status"] = ToString(s.status);
      t["raw"] = s.raw_value ? ordered_json(*s.raw_value) : ordered_json();
      t["score"] = s.score;
      t["display"] = FormatScore(s.display_score);
      per_task.push_back(std::move(t));
    }
    ordered_json entry;
    entry["rank"] = i + 1;
    entry["model"] = card.model_name;
    entry["overall_display"] = FormatScore(card.DisplayOverall());
    entry["overall_raw"] = card.overall_score;
    entry["per_task"] = std::move(per_task);
    entries.push_back(std::move(entry));
  }
  doc["entries"] = std::move(entries);
  doc["config"] = ordered_json::parse(config_echo.dump());
  return doc.dump(2) + "\n";
}

std::string RenderMarkdown(const Leaderboard& board) {
  std::ostringstream out;
  out << "# Leaderboard: " << ToString(board.phase) << " ("
      << ToString(board.basis) << " basis)\n\n";
  out << "| Rank | Model |";
  for (const std::string& task : board.tasks) {
    out << ' ' << task << ' ' << RawHeader(board.basis) << " | " << task
        << " Score |";
  }
  out << " Overall Score |\n|---:|---|";
  for (size_t i = 0; i < board.tasks.size(); ++i) out << "---:|---:|";
  out << "---:|\n";
  for (size_t i = 0; i < board.entries.size(); ++i) {
    const ScoreCard& card = board.entries[i];
    out << "| " << i + 1 << " | " << card.model_name << " |";
    for (const TaskScore& s : card.per_task) {
      out << ' ' << FormatRaw(s, board.basis) << " | "
          << FormatScore(s.display_score) << " |";
    }
    out << ' ' << FormatScore(card.DisplayOverall()) << " |\n";
  }
  return out.str();
}

std::string RenderHtml(const Leaderboard& board, const json& config_echo) {
  std::ostringstream out;
  const std::string title = "effbench leaderboard: " +
                            std::string(ToString(board.phase)) + " (" +
                            std::string(ToString(board.basis)) + " basis)";
  out << "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n"
      << "<title>" << HtmlEscape(title) << "</title>\n<style>\n"
      << "body{font-family:sans-serif;margin:2em;color:#222}\n"
      << "table{border-collapse:collapse}\n"
      << "th,td{border:1px solid #ccc;padding:4px 10px;text-align:right}\n"
      << "td.model,th.model{text-align:left}\n"
      << "tr:nth-child(even){background:#f6f6f6}\n"
      << "pre{background:#f6f6f6;padding:1em}\n"
      << "</style>\n</head>\n<body>\n<h1>" << HtmlEscape(title) << "</h1>\n";
  out << "<table>\n<thead><tr><th>Rank</th><th class=\"model\">Model</th>";
  for (const std::string& task : board.tasks) {
    out << "<th>" << HtmlEscape(task) << ' ' << RawHeader(board.basis)
        << "</th><th>" << HtmlEscape(task) << " Score</th>";
  }
  out << "<th>Overall Score</th></tr></thead>\n<tbody>\n";
  for (size_t i = 0; i < board.entries.size(); ++i) {
    const ScoreCard& card = board.entries[i];
    out << "<tr><td>" << i + 1 << "</td><td class=\"model\">"
        << HtmlEscape(card.model_name) << "</td>";
    for (const TaskScore& s : card.per_task) {
      out << "<td>" << HtmlEscape(FormatRaw(s, board.basis)) << "</td><td>"
          << FormatScore(s.display_score) << "</td>";
    }
    out << "<td>" << FormatScore(card.DisplayOverall()) << "</td></tr>\n";
  }
  out << "</tbody>\n</table>\n<h2>Configuration</h2>\n<pre>"
      << HtmlEscape(config_echo.dump(2)) << "</pre>\n</body>\n</html>\n";
  return out.str();
}

}  // namespace

json SubmissionToJson(const SubmissionRecord& record) {
  json tasks = json::object();
  for (const auto& [name, claim] : record.tasks) {
    json t = {{"status", ToString(claim.status)},
              {"predictions", claim.predictions},
              {"log", claim.log}};
    if (claim.claimed_metric) t["claimed_metric"] = *claim.claimed_metric;
    if (claim.claimed_seconds) t["claimed_seconds"] = *claim.claimed_seconds;
    if (claim.claimed_cost_usd) t["claimed_cost_usd"] = *claim.claimed_cost_usd;
    tasks[name] = std::move(t);
  }
  json doc = {{"model_name", record.model_name},
              {"hardware", record.hardware},
              {"source", record.source},
              {"phase", ToString(record.phase)},
              {"tasks", std::move(tasks)}};
  if (record.params_millions) doc["params_millions"] = *record.params_millions;
  return doc;
}

SubmissionRecord SubmissionFromJson(const json& doc) {
  if (!doc.is_object()) throw ConfigError("submission: expected an object");
  SubmissionRecord record;
  record.model_name = OptionalString(doc, "model_name");
  record.hardware = OptionalString(doc, "hardware");
  record.source = OptionalString(doc, "source");
  record.params_millions = OptionalNumber(doc, "params_millions");
  try {
    if (doc.contains("phase")) {
      record.phase = ParsePhase(doc["phase"].get<std::string>());
    }
    if (doc.contains("tasks") && doc["tasks"].is_object()) {
      for (const auto& [name, t] : doc["tasks"].items()) {
        TaskClaim claim;
        claim.status = ParsePhaseStatus(t.at("status").get<std::string>());
        claim.claimed_metric = OptionalNumber(t, "claimed_metric");
        claim.claimed_seconds = OptionalNumber(t, "claimed_seconds");
        claim.claimed_cost_usd = OptionalNumber(t, "claimed_cost_usd");
        claim.predictions = OptionalString(t, "predictions");
        claim.log = OptionalString(t, "log");
        record.tasks.emplace(name, std::move(claim));
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("submission: ") + e.what());
  } catch (const UsageError& e) {
    throw ConfigError(std::string("submission: ") + e.what());
  }
  return record;
}

SubmissionRecord LoadSubmission(const std::filesystem::path& archive) {
  const std::filesystem::path manifest = archive / kSubmissionManifest;
  std::ifstream in(manifest);
  if (!in) throw ConfigError("cannot open " + manifest.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return SubmissionFromJson(json::parse(buffer.str()));
  } catch (const json::parse_error& e) {
    throw ConfigError(manifest.string() + ": " + e.what());
  }
}

void WriteSubmissionManifest(const std::filesystem::path& archive,
                             const SubmissionRecord& record) {
  std::filesystem::create_directories(archive);
  std::ofstream out(archive / kSubmissionManifest);
  if (!out) throw ConfigError("cannot write submission manifest");
  out << SubmissionToJson(record).dump(2) << "\n";
}

MeasurementSeries ReadLogSeries(const std::filesystem::path& path,
                                MetricKind kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read log " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();

  MeasurementSeries series;
  series.metric_kind = kind;
  size_t start = 0;
  size_t line_number = 0;
  while (start < text.size()) {
    size_t end = text.find('\n', start);
    const bool terminated = end != std::string::npos;
    if (!terminated) end = text.size();
    const std::string line = text.substr(start, end - start);
    start = end + 1;
    ++line_number;
    std::optional<TrainerEvent> event;
    try {
      event = ParseEvent(line);
    } catch (const ProtocolError& e) {
      // An unterminated final record is a log cut off mid-write.
      if (!terminated) break;
      throw ConfigError(path.string() + ":" + std::to_string(line_number) +
                        ": " + e.what());
    }
    if (!event || event->kind() != EventKind::kEval) continue;
    const json doc = json::parse(line);
    if (!doc.contains("t_metered") || !doc["t_metered"].is_number()) {
      throw ConfigError(path.string() + ":" + std::to_string(line_number) +
                        ": eval line without t_metered");
    }
    const auto& eval = std::get<EvalEvent>(event->body);
    MeasurementPoint p;
    p.elapsed_seconds = doc["t_metered"].get<double>();
    p.wall_seconds = doc.value("t_wall", p.elapsed_seconds);
    p.metric_value = eval.metric_value;
    p.epoch_fraction = eval.epoch_fraction;
    series.points.push_back(p);
  }
  return series;
}

ValidationReport ValidateSubmission(const SubmissionRecord& record,
                                    const std::filesystem::path& archive,
                                    const BenchmarkConfig& config) {
  ValidationReport report;
  if (record.model_name.empty()) report.Fail("missing field: model_name");
  if (record.hardware.empty()) report.Fail("missing field: hardware");
  if (record.source.empty()) report.Fail("source required");

  for (const TaskSpec& task : config.tasks) {
    auto it = record.tasks.find(task.name);
    if (it == record.tasks.end()) {
      report.Fail("task coverage: no claim for " + task.name);
      continue;
    }
    const TaskClaim& claim = it->second;
    const std::string& name = task.name;

    if (claim.status == PhaseStatus::kAborted) {
      report.Fail("task " + name + ": aborted runs cannot be submitted");
      continue;
    }

    // Logs back every claim, reached or N/A.
    std::optional<MeasurementSeries> series;
    if (claim.log.empty()) {
      report.Fail("task " + name + ": missing log");
    } else {
      try {
        series = ReadLogSeries(archive / claim.log, task.metric_kind);
      } catch (const ConfigError& e) {
        report.Fail("task " + name + ": unreadable log: " + e.what());
      }
      if (series && !series->IsValid()) {
        report.Fail("task " + name + ": log series is not monotone");
        series.reset();
      }
    }

    if (claim.status == PhaseStatus::kReached) {
      if (!claim.claimed_metric || !claim.claimed_seconds) {
        report.Fail("task " + name +
                    ": missing field: claimed_metric/claimed_seconds");
        continue;
      }
      if (*claim.claimed_metric < task.cutoff) {
        report.Fail("task " + name + ": claimed metric " +
                    FormatPoints(*claim.claimed_metric) + " below cutoff " +
                    FormatPoints(task.cutoff));
      }
      if (claim.predictions.empty()) {
        report.Fail("task " + name + ": missing predictions");
      } else {
        try {
          const RecomputedMetric recomputed =
              RecomputeMetric(task.metric_kind, archive / claim.predictions);
          if (task.dev_size > 0) {
            report.coverage_percent[name] =
                100.0 * static_cast<double>(recomputed.instances) /
                static_cast<double>(task.dev_size);
          }
          if (std::fabs(recomputed.value - *claim.claimed_metric) >
              kMetricTolerance + 1e-9) {
            report.Fail("task " + name + ": metric mismatch: claimed " +
                        FormatPoints(*claim.claimed_metric) + ", recomputed " +
                        FormatPoints(recomputed.value));
          }
        } catch (const ConfigError& e) {
          report.Fail("task " + name + ": unreadable predictions: " +
                      e.what());
        }
      }
      if (series) {
        const auto crossing = DetectCrossing(*series, task);
        if (!crossing ||
            crossing->elapsed_seconds > *claim.claimed_seconds + 1e-6) {
          report.Fail("log inconsistent: no crossing at or before claimed "
                      "time for task " + name);
        }
      }
    } else if (series) {
      if (DetectCrossing(*series, task)) {
        report.Fail("task " + name + ": N/A claim but the log crosses the "
                    "cutoff");
      } else if (series->MaxEpochFraction() < task.epoch_budget) {
        report.Fail("task " + name + ": N/A claim not supported: log shows " +
                    FormatPoints(series->MaxEpochFraction()) +
                    " epochs, budget is " +
                    std::to_string(task.epoch_budget));
      }
    }
  }
  return report;
}

Leaderboard EmptyLeaderboard(Phase phase, ScoreBasis basis,
                             std::vector<std::string> tasks) {
  Leaderboard board;
  board.phase = phase;
  board.basis = basis;
  board.tasks = std::move(tasks);
  return board;
}

Leaderboard Rank(std::vector<ScoreCard> scorecards) {
  if (scorecards.empty()) return Leaderboard{};
  Leaderboard board;
  board.phase = scorecards.front().phase;
  board.basis = scorecards.front().basis;
  for (const TaskScore& s : scorecards.front().per_task) {
    board.tasks.push_back(s.task);
  }
  std::set<std::string> names;
  for (const ScoreCard& card : scorecards) {
    if (card.basis != board.basis) {
      throw UsageError("rank: mixed bases (" +
                       std::string(ToString(board.basis)) + " and " +
                       std::string(ToString(card.basis)) + ")");
    }
    if (card.phase != board.phase) throw UsageError("rank: mixed phases");
    std::vector<std::string> tasks;
    for (const TaskScore& s : card.per_task) tasks.push_back(s.task);
    if (tasks != board.tasks) throw UsageError("rank: mixed task sets");
    if (!names.insert(card.model_name).second) {
      throw UsageError("rank: duplicate model " + card.model_name);
    }
  }
  std::sort(scorecards.begin(), scorecards.end(),
            [](const ScoreCard& a, const ScoreCard& b) {
              if (a.overall_cents != b.overall_cents) {
                return a.overall_cents > b.overall_cents;
              }
              return a.model_name < b.model_name;
            });
  board.entries = std::move(scorecards);
  return board;
}

RenderFormat ParseRenderFormat(std::string_view text) {
  if (text == "json") return RenderFormat::kJson;
  if (text == "md" || text == "markdown") return RenderFormat::kMarkdown;
  if (text == "html") return RenderFormat::kHtml;
  throw UsageError("unknown format '" + std::string(text) + "'");
}

std::string Render(const Leaderboard& board, RenderFormat format,
                   const json& config_echo) {
  switch (format) {
    case RenderFormat::kJson:
      return RenderJson(board, config_echo);
    case RenderFormat::kMarkdown:
      return RenderMarkdown(board);
    case RenderFormat::kHtml:
      return RenderHtml(board, config_echo);
  }
  return "";
}

}  // namespace effbench
