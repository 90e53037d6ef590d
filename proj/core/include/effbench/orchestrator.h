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
/// \brief Drives trainer sessions per task and phase, meters them, scores
/// the results and writes run artifacts.

#ifndef EFFBENCH_ORCHESTRATOR_H_
#define EFFBENCH_ORCHESTRATOR_H_

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "effbench/config.h"
#include "effbench/leaderboard.h"
#include "effbench/metering.h"
#include "effbench/protocol.h"
#include "effbench/sim_trainer.h"
#include "effbench/subprocess.h"
#include "effbench/types.h"

namespace effbench {

/// Process exit codes of the `effbench` CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitSessionsAborted = 3;
inline constexpr int kExitInternalError = 4;

/// Where session timestamps come from: the monotonic clock, or the
/// `sim_seconds` field simulated trainers attach to each event.
enum class ClockMode { kSteady, kSimulated };

ClockMode ParseClockMode(std::string_view text);

/// \brief Harness side of one trainer's command/event channel.
class TrainerChannel {
 public:
  virtual ~TrainerChannel() = default;
  /// False once the trainer can no longer receive commands.
  virtual bool Send(std::string_view command) = 0;
  virtual ReadStatus ReadLine(std::string& line,
                              std::chrono::milliseconds timeout) = 0;
  /// Closes the command channel and waits up to `grace` for the trainer to
  /// exit (killing it afterwards). Returns its exit code.
  virtual int Finish(std::chrono::milliseconds grace) = 0;
};

struct LaunchRequest {
  TaskSpec task;
  Phase phase = Phase::kFinetune;
  std::filesystem::path config_path;
  std::optional<std::filesystem::path> work_dir;
};

using TrainerLauncher =
    std::function<std::unique_ptr<TrainerChannel>(const LaunchRequest&)>;

/// Spawns `/bin/sh -c <template>` with `{task}`, `{phase}` and `{config}`
/// substituted. The work directory is exported as EFFBENCH_WORK_DIR.
TrainerLauncher ProcessLauncher(std::string command_template);

using InProcessTrainer =
    std::function<int(const LaunchRequest&, EventSink&, CommandSource&)>;

/// Runs `trainer` on its own thread, connected through in-memory queues.
TrainerLauncher InProcessLauncher(InProcessTrainer trainer);

/// In-process simulated trainer with the given params and config.
TrainerLauncher SimLauncher(SimTrainerSpec spec, BenchmarkConfig config);

struct SupervisorOptions {
  ClockMode clock_mode = ClockMode::kSteady;
  double idle_timeout_seconds = 300.0;
  // Bound on how long an aborted trainer may take to wind down.
  double drain_timeout_seconds = 5.0;
  std::optional<HardwareProfile> hardware;
  CostTimeSource cost_source = CostTimeSource::kMetered;
  const Clock* clock = nullptr;  // steady clock when null
};

/// \brief Everything the harness learned from one session.
struct SessionOutcome {
  PhaseResult result;
  SessionState state;
  // Received events annotated with the harness's t_metered / t_wall.
  std::vector<std::string> log_lines;
  std::optional<std::string> crossing_dump;
  int exit_code = 0;
};

/// Drives one session: sends `begin`, feeds events through the state
/// machine, sends `abort` once the cutoff is crossed, and reduces the
/// session to a PhaseResult. Never throws for trainer misbehaviour; such
/// sessions come back with status kAborted and a diagnostic.
SessionOutcome SuperviseSession(TrainerChannel& channel, const TaskSpec& task,
                                Phase phase, const SupervisorOptions& options);

/// Latency per instance in milliseconds for a completed inference result.
std::optional<double> LatencyMs(const PhaseResult& result);

struct PretrainSummary {
  PhaseStatus status = PhaseStatus::kNotReached;
  double metered_seconds = 0.0;
  double cost_usd = 0.0;

  friend bool operator==(const PretrainSummary&,
                         const PretrainSummary&) = default;
};

/// All tasks reached => reached, at the latest per-task crossing.
PretrainSummary SummarizePretrain(
    const std::map<std::string, PhaseResult>& results,
    const std::optional<HardwareProfile>& hardware);

struct ModelResults {
  std::string model_name;
  std::optional<double> params_millions;
  bool is_reference = false;
  std::map<Phase, std::map<std::string, PhaseResult>> phases;
  std::optional<PretrainSummary> pretrain;

  friend bool operator==(const ModelResults&, const ModelResults&) = default;
};

struct ModelRun {
  ModelResults results;
  std::string source;
  std::map<Phase, std::map<std::string, SessionOutcome>> sessions;
};

struct ModelEntry {
  TrainerLauncher launcher;
  // Source reference recorded in generated submissions.
  std::string source;
};

struct RunOptions {
  std::vector<Phase> phases = {Phase::kFinetune};
  ClockMode clock_mode = ClockMode::kSteady;
  bool parallel = false;
  // Working area for effective config and prediction dumps; a temporary
  // directory is used when unset.
  std::optional<std::filesystem::path> work_root;
  const Clock* clock = nullptr;
};

struct RunBundle {
  BenchmarkConfig config;
  std::vector<Phase> phases;
  std::vector<ModelRun> models;
  std::vector<ScoreCard> scorecards;
  std::vector<Leaderboard> leaderboards;  // one per (phase, basis)
  std::vector<std::string> warnings;
  int exit_code = kExitOk;
};

/// Runs every model (reference first, when given) over every task and
/// phase, then scores and ranks. Throws UsageError for an empty task list.
RunBundle RunBenchmark(const BenchmarkConfig& config,
                       const std::optional<ModelEntry>& reference,
                       const std::vector<ModelEntry>& challengers,
                       const RunOptions& options);

struct InferenceReport {
  std::map<std::string, PhaseResult> results;
  std::map<std::string, double> latency_ms;
};

/// Inference-phase sessions for every task with `instance_count` instances.
InferenceReport InferenceBenchmark(const BenchmarkConfig& config,
                                   const TrainerLauncher& launcher,
                                   int64_t instance_count,
                                   const RunOptions& options);

/// Scorecards for every model and phase with a usable reference, plus the
/// ranked boards. Problems (missing references) are appended to `warnings`.
void ScoreModels(const BenchmarkConfig& config, const std::vector<Phase>& phases,
                 const std::vector<ModelResults>& models,
                 std::vector<ScoreCard>& scorecards,
                 std::vector<Leaderboard>& leaderboards,
                 std::vector<std::string>& warnings);

nlohmann::json PhaseResultToJson(const PhaseResult& result);
PhaseResult PhaseResultFromJson(const nlohmann::json& doc);
nlohmann::json ModelResultsToJson(const ModelResults& results);
ModelResults ModelResultsFromJson(const nlohmann::json& doc);

/// Writes config.json, results/, leaderboard.{json,md}, index.html, boards/
/// and submissions/ under `out`.
void WriteRunBundle(const RunBundle& bundle, const std::filesystem::path& out);

struct StoredResults {
  BenchmarkConfig config;
  std::vector<Phase> phases;
  std::vector<ModelResults> models;
};

StoredResults LoadResults(const std::filesystem::path& dir);

/// Builds a submission archive from one model's fine-tune sessions.
void WriteSubmission(const ModelRun& run, const BenchmarkConfig& config,
                     const std::string& source,
                     const std::filesystem::path& archive);

}  // namespace effbench

#endif  // EFFBENCH_ORCHESTRATOR_H_
