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

#include "effbench/orchestrator.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

namespace effbench {
namespace {

namespace fs = std::filesystem;

fs::path TempDir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() /
                       ("effbench-orch-" + tag + "-" +
                        std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

BenchmarkConfig TwoTaskConfig() {
  BenchmarkConfig config;
  config.tasks = {{"a", MetricKind::kAccuracy, 90.0, 5, 1000, 200},
                  {"b", MetricKind::kAccuracy, 90.0, 5, 1000, 200}};
  config.reference_model = "ref";
  config.reference[Phase::kFinetune] = {{"a", {200.0, {}}}, {"b", {100.0, {}}}};
  config.reference[Phase::kInference] = {{"a", {8.51, {}}}, {"b", {8.51, {}}}};
  config.eval_interval_seconds = 10.0;
  config.idle_timeout_seconds = 30.0;
  config.inference_instances = 200;
  return config;
}

// Task a crosses 90 at 100 ln 19 = 294.4 s; b plateaus at 85.
SimTrainerSpec ChallengerSpec() {
  SimTrainerSpec spec;
  spec.model_name = "challenger";
  spec.seed = 5;
  spec.eval_seconds = 2.0;
  spec.tasks["a"].curve = {95.0, 100.0, 0.0, 0, 1.0};
  spec.tasks["a"].epoch_seconds = 100.0;
  spec.tasks["a"].latency_ms = 2.68;
  spec.tasks["b"].curve = {85.0, 20.0, 0.0, 0, 1.0};
  spec.tasks["b"].epoch_seconds = 40.0;
  spec.tasks["b"].latency_ms = 2.68;
  spec.pretrain.checkpoint_interval_steps = 500;
  spec.pretrain.max_steps = 5000;
  spec.pretrain.s_half = 100.0;
  return spec;
}

SimTrainerSpec BothCrossSpec(const std::string& name) {
  SimTrainerSpec spec = ChallengerSpec();
  spec.model_name = name;
  spec.tasks["b"].curve = {96.0, 30.0, 0.0, 0, 1.0};
  return spec;
}

BenchmarkConfig OneTaskConfig() {
  BenchmarkConfig config = TwoTaskConfig();
  config.tasks.pop_back();
  for (auto& [phase, table] : config.reference) table.erase("b");
  return config;
}

RunOptions SimOptions(std::vector<Phase> phases = {Phase::kFinetune}) {
  RunOptions options;
  options.phases = std::move(phases);
  options.clock_mode = ClockMode::kSimulated;
  return options;
}

const ScoreCard& CardFor(const RunBundle& bundle, const std::string& model,
                         Phase phase, ScoreBasis basis = ScoreBasis::kTime) {
  for (const ScoreCard& card : bundle.scorecards) {
    if (card.model_name == model && card.phase == phase && card.basis == basis) {
      return card;
    }
  }
  throw std::runtime_error("no scorecard for " + model);
}

SimRunOptions OptionsFor(const LaunchRequest& request,
                         const BenchmarkConfig& config) {
  return {request.task, request.phase, config.eval_interval_seconds,
          config.inference_instances, request.work_dir};
}

TEST(RunBenchmark, NotReachedTaskScoresZero) {
  const BenchmarkConfig config = TwoTaskConfig();
  const RunBundle bundle =
      RunBenchmark(config, std::nullopt,
                   {{SimLauncher(ChallengerSpec(), config), "test"}},
                   SimOptions());
  EXPECT_EQ(bundle.exit_code, kExitOk);
  const auto& results = bundle.models[0].results.phases.at(Phase::kFinetune);
  const PhaseResult& a = results.at("a");
  ASSERT_EQ(a.status, PhaseStatus::kReached);
  EXPECT_NEAR(a.metered_seconds, 300.0, 1e-6);
  EXPECT_GT(a.wall_seconds, a.metered_seconds);  // eval time is unmetered
  const PhaseResult& b = results.at("b");
  EXPECT_EQ(b.status, PhaseStatus::kNotReached);
  EXPECT_DOUBLE_EQ(b.epochs_consumed, 5.0);

  const ScoreCard& card = CardFor(bundle, "challenger", Phase::kFinetune);
  EXPECT_EQ(card.Find("a")->display_score, 0.67);
  EXPECT_EQ(card.Find("b")->display_score, 0.0);
  EXPECT_FALSE(card.Find("b")->raw_value);
  EXPECT_EQ(card.overall_cents, 67);
}

TEST(RunBenchmark, RejectsEmptyTaskList) {
  BenchmarkConfig config = TwoTaskConfig();
  config.tasks.clear();
  try {
    RunBenchmark(config, std::nullopt,
                 {{SimLauncher(ChallengerSpec(), config), "test"}},
                 SimOptions());
    FAIL() << "expected UsageError";
  } catch (const UsageError& e) {
    EXPECT_NE(std::string(e.what()).find("no tasks"), std::string::npos);
  }
}

TEST(RunBenchmark, IdenticalChallengerScoresOneAgainstReference) {
  const BenchmarkConfig config = TwoTaskConfig();
  const RunBundle bundle = RunBenchmark(
      config, ModelEntry{SimLauncher(BothCrossSpec("ref-run"), config), "r"},
      {{SimLauncher(BothCrossSpec("twin"), config), "t"}}, SimOptions());
  const ScoreCard& card = CardFor(bundle, "twin", Phase::kFinetune);
  for (const TaskScore& s : card.per_task) EXPECT_EQ(s.display_score, 1.0);
  EXPECT_EQ(card.overall_cents, 200);
  EXPECT_TRUE(bundle.models[0].results.is_reference);
}

TEST(RunBenchmark, InferenceLatencyScore) {
  const BenchmarkConfig config = TwoTaskConfig();
  const RunBundle bundle =
      RunBenchmark(config, std::nullopt,
                   {{SimLauncher(ChallengerSpec(), config), "test"}},
                   SimOptions({Phase::kInference}));
  const PhaseResult& a =
      bundle.models[0].results.phases.at(Phase::kInference).at("a");
  ASSERT_EQ(a.status, PhaseStatus::kReached);
  EXPECT_EQ(a.instance_count, 200);
  EXPECT_NEAR(*LatencyMs(a), 2.68, 1e-9);
  EXPECT_EQ(CardFor(bundle, "challenger", Phase::kInference)
                .Find("a")
                ->display_score,
            3.18);
}

TEST(RunBenchmark, BadTrainerOnOneTaskDoesNotAffectOthers) {
  const BenchmarkConfig config = TwoTaskConfig();
  const SimTrainerSpec spec = ChallengerSpec();
  const TrainerLauncher flaky = InProcessLauncher(
      [&](const LaunchRequest& request, EventSink& sink,
          CommandSource& commands) {
        if (request.task.name == "b") {
          if (!commands.WaitForBegin()) return 1;
          sink.Emit({HelloEvent{"challenger", request.phase, "b", {}}, 0.0});
          return 9;  // dies without `done`
        }
        return RunSimTrainer(spec, OptionsFor(request, config), sink,
                             commands);
      });
  const RunBundle bundle =
      RunBenchmark(config, std::nullopt, {{flaky, "test"}}, SimOptions());
  EXPECT_EQ(bundle.exit_code, kExitSessionsAborted);
  const auto& results = bundle.models[0].results.phases.at(Phase::kFinetune);
  EXPECT_EQ(results.at("a").status, PhaseStatus::kReached);
  EXPECT_EQ(results.at("b").status, PhaseStatus::kAborted);
  EXPECT_NE(results.at("b").diagnostic.find("exited before done"),
            std::string::npos)
      << results.at("b").diagnostic;
  const ScoreCard& card = CardFor(bundle, "challenger", Phase::kFinetune);
  EXPECT_EQ(card.Find("b")->status, PhaseStatus::kAborted);
  EXPECT_EQ(card.overall_cents, 67);
}

TEST(RunBenchmark, GarbageOutputAbortsSession) {
  BenchmarkConfig config = OneTaskConfig();
  const RunBundle bundle =
      RunBenchmark(config, std::nullopt,
                   {{ProcessLauncher("echo 'not json'; cat >/dev/null"), "x"}},
                   SimOptions());
  const PhaseResult& a =
      bundle.models[0].results.phases.at(Phase::kFinetune).at("a");
  EXPECT_EQ(a.status, PhaseStatus::kAborted);
  EXPECT_NE(a.diagnostic.find("protocol error"), std::string::npos)
      << a.diagnostic;
}

TEST(RunBenchmark, SilentTrainerHitsIdleTimeout) {
  BenchmarkConfig config = OneTaskConfig();
  config.idle_timeout_seconds = 0.2;
  RunOptions options;
  const RunBundle bundle = RunBenchmark(
      config, std::nullopt, {{ProcessLauncher("exec sleep 20"), "x"}}, options);
  const PhaseResult& a =
      bundle.models[0].results.phases.at(Phase::kFinetune).at("a");
  EXPECT_EQ(a.status, PhaseStatus::kAborted);
  EXPECT_NE(a.diagnostic.find("idle timeout"), std::string::npos)
      << a.diagnostic;
}

TEST(RunBenchmark, InferenceWithoutInstancesIsAborted) {
  BenchmarkConfig config = OneTaskConfig();
  const TrainerLauncher empty = InProcessLauncher(
      [](const LaunchRequest& request, EventSink& sink,
         CommandSource& commands) {
        if (!commands.WaitForBegin()) return 1;
        sink.Emit({HelloEvent{"empty", request.phase, "a", {}}, 0.0});
        sink.Emit({DoneEvent{DoneReason::kCompleted}, 0.0});
        return 0;
      });
  const RunBundle bundle = RunBenchmark(config, std::nullopt, {{empty, "x"}},
                                        SimOptions({Phase::kInference}));
  const PhaseResult& a =
      bundle.models[0].results.phases.at(Phase::kInference).at("a");
  EXPECT_EQ(a.status, PhaseStatus::kAborted);
  EXPECT_FALSE(LatencyMs(a));
}

TEST(RunBenchmark, PretrainQualifiesAtLatestTaskCrossing) {
  BenchmarkConfig config = TwoTaskConfig();
  config.hardware = HardwareProfile::GpuV100(1);
  const RunBundle bundle =
      RunBenchmark(config, std::nullopt,
                   {{SimLauncher(BothCrossSpec("pre"), config), "x"}},
                   SimOptions({Phase::kPretrain}));
  const ModelResults& m = bundle.models[0].results;
  ASSERT_TRUE(m.pretrain);
  EXPECT_EQ(m.pretrain->status, PhaseStatus::kReached);
  double latest = 0.0;
  for (const auto& [task, r] : m.phases.at(Phase::kPretrain)) {
    ASSERT_EQ(r.status, PhaseStatus::kReached) << task;
    latest = std::max(latest, r.metered_seconds);
  }
  EXPECT_DOUBLE_EQ(m.pretrain->metered_seconds, latest);
  EXPECT_NEAR(m.pretrain->cost_usd, latest / 3600.0 * 3.06, 1e-9);
}

TEST(SummarizePretrain, AnyMissingTaskBlocksQualification) {
  PhaseResult reached;
  reached.phase = Phase::kPretrain;
  reached.status = PhaseStatus::kReached;
  reached.metered_seconds = 100.0;
  PhaseResult later = reached;
  later.metered_seconds = 250.0;
  PhaseResult missing = reached;
  missing.status = PhaseStatus::kNotReached;
  EXPECT_EQ(SummarizePretrain({{"a", reached}, {"b", later}}, std::nullopt),
            (PretrainSummary{PhaseStatus::kReached, 250.0, 0.0}));
  EXPECT_EQ(SummarizePretrain({{"a", reached}, {"b", missing}}, std::nullopt)
                .status,
            PhaseStatus::kNotReached);
}

TEST(RunBenchmark, SimulatedRunsAreDeterministic) {
  const BenchmarkConfig config = TwoTaskConfig();
  auto once = [&](bool parallel) {
    RunOptions options = SimOptions();
    options.parallel = parallel;
    SimTrainerSpec noisy = ChallengerSpec();
    noisy.tasks["a"].curve.noise_sigma = 0.5;
    const RunBundle bundle = RunBenchmark(
        config, std::nullopt, {{SimLauncher(noisy, config), "x"}}, options);
    return Render(bundle.leaderboards.at(0), RenderFormat::kJson,
                  ConfigToJson(config));
  };
  const std::string first = once(false);
  EXPECT_EQ(first, once(false));
  EXPECT_EQ(first, once(true));
}

TEST(RunBundle, WriteAndReloadRoundTrip) {
  BenchmarkConfig config = TwoTaskConfig();
  config.hardware = HardwareProfile::GpuV100(2);
  const fs::path out = TempDir("bundle");
  RunOptions options = SimOptions();
  options.work_root = out / "work";
  const RunBundle bundle =
      RunBenchmark(config, std::nullopt,
                   {{SimLauncher(ChallengerSpec(), config), "https://x/y"}},
                   options);
  WriteRunBundle(bundle, out);
  for (const char* file : {"config.json", "run.json", "leaderboard.json",
                           "leaderboard.md", "index.html"}) {
    EXPECT_TRUE(fs::exists(out / file)) << file;
  }
  const StoredResults stored = LoadResults(out);
  EXPECT_EQ(stored.config, config);
  EXPECT_EQ(stored.phases, bundle.phases);
  ASSERT_EQ(stored.models.size(), 1u);
  EXPECT_EQ(stored.models[0], bundle.models[0].results);

  const fs::path archive = out / "submissions" / "challenger";
  ASSERT_TRUE(fs::exists(archive / kSubmissionManifest));
  const ValidationReport report =
      ValidateSubmission(LoadSubmission(archive), archive, config);
  EXPECT_TRUE(report.passed)
      << (report.reasons.empty() ? "" : report.reasons.front());
  fs::remove_all(out);
}

TEST(ProcessLauncher, DrivesTheCliSimTrainer) {
  const BenchmarkConfig config = TwoTaskConfig();
  const fs::path dir = TempDir("process");
  const fs::path params = dir / "spec.json";
  std::ofstream(params) << SimSpecToJson(BothCrossSpec("proc")).dump();
  RunOptions options = SimOptions();
  options.work_root = dir / "work";
  const std::string command = std::string(EFFBENCH_CLI) +
                              " sim-trainer --params " + params.string() +
                              " --task {task} --phase {phase} --config {config}";
  const RunBundle via_process = RunBenchmark(
      config, std::nullopt, {{ProcessLauncher(command), "x"}}, options);
  const RunBundle in_process = RunBenchmark(
      config, std::nullopt,
      {{SimLauncher(BothCrossSpec("proc"), config), "x"}}, SimOptions());
  EXPECT_EQ(via_process.exit_code, kExitOk);
  EXPECT_EQ(via_process.models[0].results, in_process.models[0].results);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace effbench
