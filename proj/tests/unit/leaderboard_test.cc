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

#include <array>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "effbench/config.h"
#include "effbench/leaderboard.h"
#include "effbench/scoring.h"
#include "effbench/sim_trainer.h"

namespace effbench {
namespace {

namespace fs = std::filesystem;

ScoreCard Card(const std::string& model, std::vector<std::optional<double>> times,
               ScoreBasis basis = ScoreBasis::kTime) {
  const ReferenceBaseline ref{"ref", {{"a", {100, 1}}, {"b", {100, 1}}}};
  return ScorecardFromRaw(model, Phase::kFinetune, basis,
                          {{"a", times[0]}, {"b", times[1]}}, ref);
}

TEST(Rank, DescendingByDisplayedOverallThenName) {
  const Leaderboard board = Rank({Card("zeta", {100, 100}),
                                  Card("alpha", {100, 100}),
                                  Card("fast", {50, 25}),
                                  Card("slow", {400, std::nullopt})});
  ASSERT_EQ(board.entries.size(), 4u);
  EXPECT_EQ(board.entries[0].model_name, "fast");
  EXPECT_EQ(board.entries[1].model_name, "alpha");
  EXPECT_EQ(board.entries[2].model_name, "zeta");
  EXPECT_EQ(board.entries[3].model_name, "slow");
  EXPECT_EQ(board.tasks, (std::vector<std::string>{"a", "b"}));
}

TEST(Rank, TiesUseDisplayedNotRawScores) {
  // 100/99.6 = 1.00402 and 100/99.7 = 1.00301 both display as 1.00.
  const Leaderboard board =
      Rank({Card("b-model", {99.6, 100}), Card("a-model", {99.7, 100})});
  EXPECT_EQ(board.entries[0].model_name, "a-model");
}

TEST(Rank, RejectsMixedBoards) {
  EXPECT_THROW(Rank({Card("x", {1, 1}), Card("y", {1, 1}, ScoreBasis::kCost)}),
               UsageError);
  EXPECT_THROW(Rank({Card("x", {1, 1}), Card("x", {2, 2})}), UsageError);
  ScoreCard other = Card("y", {1, 1});
  other.phase = Phase::kInference;
  EXPECT_THROW(Rank({Card("x", {1, 1}), other}), UsageError);
}

TEST(Render, MarkdownLayout) {
  const Leaderboard board =
      Rank({Card("fast", {50, 25}), Card("slow", {400, std::nullopt})});
  const std::string md = Render(board, RenderFormat::kMarkdown, {});
  EXPECT_NE(md.find("| Rank | Model | a Time | a Score | b Time | b Score | "
                    "Overall Score |"),
            std::string::npos)
      << md;
  EXPECT_NE(md.find("| 1 | fast | 50.00 | 2.00 | 25.00 | 4.00 | 6.00 |"),
            std::string::npos)
      << md;
  EXPECT_NE(md.find("| 2 | slow | 400.00 | 0.25 | N/A | 0.00 | 0.25 |"),
            std::string::npos)
      << md;
}

TEST(Render, AbortedCellsAreMarked) {
  ScoreCard card = Card("broken", {50, std::nullopt});
  card.per_task[1].status = PhaseStatus::kAborted;
  const std::string md = Render(Rank({card}), RenderFormat::kMarkdown, {});
  EXPECT_NE(md.find("| aborted | 0.00 |"), std::string::npos) << md;
}

TEST(Render, JsonAndHtmlAreDeterministicAndEchoConfig) {
  const Leaderboard board =
      Rank({Card("fast", {50, 25}), Card("<b>", {400, std::nullopt})});
  const nlohmann::json echo = {{"seed", 42}};
  const std::string json = Render(board, RenderFormat::kJson, echo);
  EXPECT_EQ(json, Render(board, RenderFormat::kJson, echo));
  const nlohmann::json doc = nlohmann::json::parse(json);
  EXPECT_EQ(doc["entries"][0]["model"], "fast");
  EXPECT_EQ(doc["entries"][0]["rank"], 1);
  EXPECT_EQ(doc["entries"][0]["overall_display"], "6.00");
  EXPECT_TRUE(doc["entries"][1]["per_task"][1]["raw"].is_null());
  EXPECT_EQ(doc["config"]["seed"], 42);

  const std::string html = Render(board, RenderFormat::kHtml, echo);
  EXPECT_NE(html.find("&lt;b&gt;"), std::string::npos);
  EXPECT_EQ(html.find("<b>"), std::string::npos);
  EXPECT_NE(html.find("<pre>"), std::string::npos);
  EXPECT_EQ(ParseRenderFormat("md"), RenderFormat::kMarkdown);
  EXPECT_THROW(ParseRenderFormat("pdf"), UsageError);
}

TEST(Render, EmptyBoardHasHeaderOnly) {
  const std::string md = Render(
      EmptyLeaderboard(Phase::kFinetune, ScoreBasis::kTime, {"x"}),
      RenderFormat::kMarkdown, {});
  EXPECT_NE(md.find("| Rank | Model | x Time | x Score | Overall Score |"),
            std::string::npos);
}

// A one-task archive written by hand.
class SubmissionTest : public ::testing::Test {
 protected:
  void SetUp() override {
    archive_ = fs::temp_directory_path() /
               ("effbench-submission-" +
                std::string(::testing::UnitTest::GetInstance()
                                ->current_test_info()
                                ->name()));
    fs::remove_all(archive_);
    config_.tasks = {{"sst2", MetricKind::kAccuracy, 90.0, 5, 67349, 872}};
    const double value = WriteSyntheticPredictions(
        archive_ / "predictions/sst2", MetricKind::kAccuracy, 91.0, 872, 1);
    WriteLog({{60, 80, 1}, {120, 88, 2}, {180, value, 3}});
    record_.model_name = "m";
    record_.hardware = "1x gpu_v100";
    record_.source = "https://example.org/m.tar.gz";
    TaskClaim claim;
    claim.status = PhaseStatus::kReached;
    claim.claimed_metric = value;
    claim.claimed_seconds = 180;
    claim.predictions = "predictions/sst2";
    claim.log = "logs/finetune-sst2.events";
    record_.tasks["sst2"] = claim;
  }
  void TearDown() override { fs::remove_all(archive_); }

  void WriteLog(const std::vector<std::array<double, 3>>& evals) {
    fs::create_directories(archive_ / "logs");
    std::ofstream out(archive_ / "logs/finetune-sst2.events");
    out << R"({"kind":"hello","model_name":"m","phase":"finetune","task_name":"sst2"})"
        << "\n";
    for (const auto& [t, m, e] : evals) {
      out << R"({"kind":"eval","metric_value":)" << m
          << R"(,"epoch_fraction":)" << e << R"(,"t_metered":)" << t << "}\n";
    }
  }

  ValidationReport Validate() {
    return ValidateSubmission(record_, archive_, config_);
  }

  bool HasReason(const ValidationReport& r, const std::string& needle) {
    for (const auto& reason : r.reasons) {
      if (reason.find(needle) != std::string::npos) return true;
    }
    return false;
  }

  fs::path archive_;
  BenchmarkConfig config_;
  SubmissionRecord record_;
};

TEST_F(SubmissionTest, ValidArchivePasses) {
  const ValidationReport r = Validate();
  EXPECT_TRUE(r.passed) << (r.reasons.empty() ? "" : r.reasons.front());
  EXPECT_DOUBLE_EQ(r.coverage_percent.at("sst2"), 100.0);
}

TEST_F(SubmissionTest, ManifestRoundTrip) {
  WriteSubmissionManifest(archive_, record_);
  EXPECT_EQ(LoadSubmission(archive_), record_);
  EXPECT_EQ(SubmissionFromJson(SubmissionToJson(record_)), record_);
}

TEST_F(SubmissionTest, WrongMetricFails) {
  record_.tasks["sst2"].claimed_metric = 95.0;
  const ValidationReport r = Validate();
  EXPECT_FALSE(r.passed);
  EXPECT_TRUE(HasReason(r, "metric mismatch: claimed 95.0, recomputed 9"))
      << r.reasons.front();
}

TEST_F(SubmissionTest, MissingSourceFails) {
  record_.source.clear();
  const ValidationReport r = Validate();
  EXPECT_FALSE(r.passed);
  EXPECT_EQ(r.reasons, std::vector<std::string>{"source required"});
}

TEST_F(SubmissionTest, TruncatedLogFails) {
  WriteLog({{60, 80, 1}, {120, 88, 2}});
  EXPECT_TRUE(HasReason(Validate(), "log inconsistent"));
  // Cut mid-record.
  std::ofstream(archive_ / "logs/finetune-sst2.events", std::ios::app)
      << R"({"kind":"eval","metric_va)";
  EXPECT_TRUE(HasReason(Validate(), "log inconsistent"));
}

TEST_F(SubmissionTest, CrossingAfterClaimedTimeFails) {
  record_.tasks["sst2"].claimed_seconds = 150;
  EXPECT_TRUE(HasReason(Validate(), "log inconsistent"));
}

TEST_F(SubmissionTest, ClaimBelowCutoffFails) {
  const double value = WriteSyntheticPredictions(
      archive_ / "predictions/sst2", MetricKind::kAccuracy, 85.0, 872, 1);
  record_.tasks["sst2"].claimed_metric = value;
  EXPECT_TRUE(HasReason(Validate(), "below cutoff 90.0"));
}

TEST_F(SubmissionTest, MissingTaskAndFieldsFail) {
  config_.tasks.push_back({"mnli", MetricKind::kMnliAvgAccuracy, 85, 5, 1, 1});
  record_.model_name.clear();
  record_.hardware.clear();
  const ValidationReport r = Validate();
  EXPECT_TRUE(HasReason(r, "missing field: model_name"));
  EXPECT_TRUE(HasReason(r, "missing field: hardware"));
  EXPECT_TRUE(HasReason(r, "task coverage: no claim for mnli"));
}

TEST_F(SubmissionTest, NotReachedNeedsFullEpochBudget) {
  TaskClaim& claim = record_.tasks["sst2"];
  claim.status = PhaseStatus::kNotReached;
  claim.claimed_metric.reset();
  claim.claimed_seconds.reset();
  WriteLog({{60, 80, 1}, {120, 85, 2}, {180, 86, 3}});
  EXPECT_TRUE(HasReason(Validate(), "N/A claim not supported"));
  WriteLog({{60, 80, 1}, {120, 85, 3}, {180, 86, 5}});
  EXPECT_TRUE(Validate().passed);
  WriteLog({{60, 80, 1}, {120, 95, 3}, {180, 86, 5}});
  EXPECT_TRUE(HasReason(Validate(), "log crosses the cutoff"));
}

TEST_F(SubmissionTest, MissingPredictionFilesFail) {
  fs::remove_all(archive_ / "predictions");
  EXPECT_TRUE(HasReason(Validate(), "unreadable predictions"));
}

}  // namespace
}  // namespace effbench
