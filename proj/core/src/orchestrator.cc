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

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <future>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "effbench/cutoff.h"
#include "effbench/scoring.h"

namespace effbench {
namespace {

using nlohmann::json;
using std::chrono::milliseconds;

milliseconds ToMillis(double seconds) {
  return milliseconds(static_cast<int64_t>(seconds * 1000.0));
}

class ProcessChannel final : public TrainerChannel {
 public:
  explicit ProcessChannel(Subprocess process) : process_(std::move(process)) {}

  bool Send(std::string_view command) override {
    return process_.WriteLine(command);
  }
  ReadStatus ReadLine(std::string& line, milliseconds timeout) override {
    return process_.ReadLine(line, timeout);
  }
  int Finish(milliseconds grace) override {
    process_.CloseStdin();
    return process_.Wait(grace);
  }

 private:
  Subprocess process_;
};

// Both directions of an in-process trainer connection.
struct Pipes {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<std::string> events;
  bool events_closed = false;  // trainer finished
  std::deque<std::string> commands;
  bool commands_closed = false;  // harness hung up
};

class QueueSink final : public EventSink {
 public:
  explicit QueueSink(Pipes& pipes) : pipes_(pipes) {}
  void Emit(const TrainerEvent& event) override {
    std::string line = SerializeEvent(event);
    std::lock_guard<std::mutex> lock(pipes_.mu);
    if (pipes_.commands_closed) {
      throw std::runtime_error("event channel closed");
    }
    pipes_.events.push_back(std::move(line));
    pipes_.cv.notify_all();
  }

 private:
  Pipes& pipes_;
};

class QueueCommands final : public CommandSource {
 public:
  explicit QueueCommands(Pipes& pipes) : pipes_(pipes) {}

  bool WaitForBegin() override {
    std::unique_lock<std::mutex> lock(pipes_.mu);
    while (true) {
      pipes_.cv.wait(lock, [this] {
        return !pipes_.commands.empty() || pipes_.commands_closed;
      });
      if (pipes_.commands.empty()) return false;
      std::string command = std::move(pipes_.commands.front());
      pipes_.commands.pop_front();
      if (command == kBeginCommand) return true;
      if (command == kAbortCommand) {
        aborted_ = true;
        return false;
      }
    }
  }

  bool AbortRequested() override {
    std::lock_guard<std::mutex> lock(pipes_.mu);
    while (!pipes_.commands.empty()) {
      if (pipes_.commands.front() == kAbortCommand) aborted_ = true;
      pipes_.commands.pop_front();
    }
    return aborted_ || pipes_.commands_closed;
  }

 private:
  Pipes& pipes_;
  bool aborted_ = false;
};

class InProcessChannel final : public TrainerChannel {
 public:
  InProcessChannel(InProcessTrainer trainer, LaunchRequest request)
      : pipes_(std::make_shared<Pipes>()) {
    auto done = std::make_shared<std::promise<int>>();
    exit_code_ = done->get_future();
    thread_ = std::thread([pipes = pipes_, trainer = std::move(trainer),
                           request = std::move(request), done] {
      int code = 1;
      try {
        QueueSink sink(*pipes);
        QueueCommands commands(*pipes);
        code = trainer(request, sink, commands);
      } catch (const std::exception&) {
        code = 1;
      }
      {
        std::lock_guard<std::mutex> lock(pipes->mu);
        pipes->events_closed = true;
      }
      pipes->cv.notify_all();
      done->set_value(code);
    });
  }

  ~InProcessChannel() override {
    Hangup();
    if (thread_.joinable()) thread_.join();
  }

  bool Send(std::string_view command) override {
    std::lock_guard<std::mutex> lock(pipes_->mu);
    if (pipes_->commands_closed || pipes_->events_closed) return false;
    pipes_->commands.emplace_back(command);
    pipes_->cv.notify_all();
    return true;
  }

  ReadStatus ReadLine(std::string& line, milliseconds timeout) override {
    std::unique_lock<std::mutex> lock(pipes_->mu);
    const bool ready = pipes_->cv.wait_for(lock, timeout, [this] {
      return !pipes_->events.empty() || pipes_->events_closed;
    });
    if (!ready) return ReadStatus::kTimeout;
    if (pipes_->events.empty()) return ReadStatus::kEof;
    line = std::move(pipes_->events.front());
    pipes_->events.pop_front();
    return ReadStatus::kLine;
  }

  int Finish(milliseconds grace) override {
    Hangup();
    // Threads cannot be killed; a trainer that ignores the hangup is waited
    // for past the grace period.
    if (exit_code_.wait_for(grace) != std::future_status::ready) {
      exit_code_.wait();
    }
    if (thread_.joinable()) thread_.join();
    return exit_code_.get();
  }

 private:
  void Hangup() {
    {
      std::lock_guard<std::mutex> lock(pipes_->mu);
      pipes_->commands_closed = true;
    }
    pipes_->cv.notify_all();
  }

  std::shared_ptr<Pipes> pipes_;
  std::future<int> exit_code_;
  std::thread thread_;
};

std::filesystem::path MakeTempRoot() {
  static std::atomic<int> counter{0};
  std::filesystem::path root =
      std::filesystem::temp_directory_path() /
      ("effbench-" + std::to_string(::getpid()) + "-" +
       std::to_string(counter.fetch_add(1)));
  std::filesystem::create_directories(root);
  return root;
}

std::string SanitizeName(const std::string& name) {
  std::string out;
  for (char c : name) {
    const bool keep = std::isalnum(static_cast<unsigned char>(c)) || c == '-' ||
                      c == '_' || c == '.';
    out.push_back(keep ? c : '_');
  }
  return out.empty() ? "model" : out;
}

void WriteFile(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string DescribeHardware(const std::optional<HardwareProfile>& hw) {
  if (!hw) return "unspecified";
  std::ostringstream out;
  out << hw->unit_count << "x " << ToString(hw->kind) << " @ "
      << FormatUsd(hw->unit_price_per_hour) << "/h";
  if (hw->kind != HardwareKind::kGpuV100) {
    out << " per " << hw->chips_per_unit << " chips";
  }
  return out.str();
}

SessionOutcome RunOneSession(const ModelEntry& entry, const TaskSpec& task,
                             Phase phase, const std::filesystem::path& config_path,
                             const std::filesystem::path& work_dir,
                             const SupervisorOptions& supervisor) {
  std::filesystem::create_directories(work_dir);
  LaunchRequest request{task, phase, config_path, work_dir};
  std::unique_ptr<TrainerChannel> channel;
  try {
    channel = entry.launcher(request);
  } catch (const std::exception& e) {
    SessionOutcome outcome;
    outcome.state = NewSession(task.metric_kind);
    outcome.state.phase = SessionPhase::kFailed;
    outcome.state.diagnostic = std::string("spawn failure: ") + e.what();
    outcome.result.phase = phase;
    outcome.result.status = PhaseStatus::kAborted;
    outcome.result.diagnostic = outcome.state.diagnostic;
    outcome.exit_code = -1;
    return outcome;
  }
  return SuperviseSession(*channel, task, phase, supervisor);
}

std::map<std::string, SessionOutcome> RunPhase(
    const ModelEntry& entry, const BenchmarkConfig& config, Phase phase,
    const std::filesystem::path& config_path,
    const std::filesystem::path& model_dir, const SupervisorOptions& supervisor,
    bool parallel) {
  std::map<std::string, SessionOutcome> sessions;
  auto work_dir = [&](const TaskSpec& task) {
    return model_dir / (std::string(ToString(phase)) + "-" + task.name);
  };
  if (!parallel) {
    for (const TaskSpec& task : config.tasks) {
      sessions.emplace(task.name, RunOneSession(entry, task, phase, config_path,
                                                work_dir(task), supervisor));
    }
    return sessions;
  }
  // One supervisor per session; results come back through futures.
  std::vector<std::pair<std::string, std::future<SessionOutcome>>> pending;
  for (const TaskSpec& task : config.tasks) {
    pending.emplace_back(
        task.name,
        std::async(std::launch::async, RunOneSession, std::cref(entry), task,
                   phase, config_path, work_dir(task), supervisor));
  }
  for (auto& [name, future] : pending) sessions.emplace(name, future.get());
  return sessions;
}

}  // namespace

ClockMode ParseClockMode(std::string_view text) {
  if (text == "steady") return ClockMode::kSteady;
  if (text == "sim" || text == "fake") return ClockMode::kSimulated;
  throw UsageError("unknown clock '" + std::string(text) +
                   "' (expected steady or sim)");
}

TrainerLauncher ProcessLauncher(std::string command_template) {
  return [command_template = std::move(command_template)](
             const LaunchRequest& request) -> std::unique_ptr<TrainerChannel> {
    const std::string command = SubstitutePlaceholders(
        command_template, {{"task", request.task.name},
                           {"phase", std::string(ToString(request.phase))},
                           {"config", ShellQuote(request.config_path.string())}});
    std::map<std::string, std::string> env;
    if (request.work_dir) env["EFFBENCH_WORK_DIR"] = request.work_dir->string();
    return std::make_unique<ProcessChannel>(Subprocess::Spawn(command, env));
  };
}

TrainerLauncher InProcessLauncher(InProcessTrainer trainer) {
  return [trainer = std::move(trainer)](const LaunchRequest& request)
             -> std::unique_ptr<TrainerChannel> {
    return std::make_unique<InProcessChannel>(trainer, request);
  };
}

TrainerLauncher SimLauncher(SimTrainerSpec spec, BenchmarkConfig config) {
  spec = WithRunSeed(std::move(spec), config.seed);
  return InProcessLauncher([spec = std::move(spec), config = std::move(config)](
                               const LaunchRequest& request, EventSink& sink,
                               CommandSource& commands) {
    SimRunOptions options;
    options.task = request.task;
    options.phase = request.phase;
    options.eval_interval = config.eval_interval_seconds;
    options.inference_instances = config.inference_instances;
    options.work_dir = request.work_dir;
    return RunSimTrainer(spec, options, sink, commands);
  });
}

std::optional<double> LatencyMs(const PhaseResult& result) {
  if (result.phase != Phase::kInference ||
      result.status != PhaseStatus::kReached || result.instance_count <= 0) {
    return std::nullopt;
  }
  return result.metered_seconds * 1000.0 /
         static_cast<double>(result.instance_count);
}

SessionOutcome SuperviseSession(TrainerChannel& channel, const TaskSpec& task,
                                Phase phase, const SupervisorOptions& options) {
  static const SteadyClock kSteady;
  const Clock& clock = options.clock ? *options.clock : kSteady;
  SessionOutcome out;
  SessionState& state = out.state;
  state = NewSession(task.metric_kind);

  Seconds sim_now{0};
  auto timestamp = [&](const TrainerEvent* event) {
    if (options.clock_mode == ClockMode::kSteady) return clock.Now();
    if (event && event->sim_seconds) sim_now = Seconds(*event->sim_seconds);
    return sim_now;
  };

  std::optional<size_t> crossing_index;
  bool abort_sent = false;
  std::string post_crossing_note;

  if (!channel.Send(kBeginCommand)) {
    state = Fail(std::move(state), "trainer did not accept 'begin'",
                 timestamp(nullptr));
  }
  std::string line;
  while (!state.terminal()) {
    const double wait = abort_sent ? std::min(options.drain_timeout_seconds,
                                              options.idle_timeout_seconds)
                                   : options.idle_timeout_seconds;
    const ReadStatus status = channel.ReadLine(line, ToMillis(wait));
    if (status == ReadStatus::kTimeout) {
      if (abort_sent) {
        post_crossing_note = "trainer did not stop after abort";
        break;
      }
      char buf[64];
      std::snprintf(buf, sizeof(buf), "idle timeout after %gs", wait);
      state = Fail(std::move(state), buf, timestamp(nullptr));
      break;
    }
    if (status == ReadStatus::kEof) {
      if (abort_sent) break;
      state = Fail(std::move(state), "trainer exited before done",
                   timestamp(nullptr));
      break;
    }

    std::optional<TrainerEvent> event;
    try {
      event = ParseEvent(line);
    } catch (const ProtocolError& e) {
      const std::string message = std::string("protocol error: ") + e.what();
      if (abort_sent) {
        post_crossing_note = message;
        break;
      }
      state = Fail(std::move(state), message, timestamp(nullptr));
      break;
    }
    if (!event) continue;

    const Seconds at = timestamp(&*event);
    state = Advance(std::move(state), *event, at);

    json annotated = json::parse(line);
    if (event->kind() == EventKind::kEval && !state.series.points.empty() &&
        state.phase != SessionPhase::kFailed) {
      annotated["t_metered"] = state.series.points.back().elapsed_seconds;
      annotated["t_wall"] = state.series.points.back().wall_seconds;
    } else if (state.timer) {
      const TimerReading reading = state.timer->ReadAt(at);
      annotated["t_metered"] = reading.metered_seconds;
      annotated["t_wall"] = reading.wall_seconds;
    }
    out.log_lines.push_back(annotated.dump());

    if (state.phase == SessionPhase::kFailed && abort_sent) {
      post_crossing_note = state.diagnostic;
      break;
    }
    if (event->kind() == EventKind::kEval && !crossing_index &&
        phase != Phase::kInference && state.phase != SessionPhase::kFailed &&
        state.series.points.back().metric_value >= task.cutoff) {
      crossing_index = state.series.points.size() - 1;
      abort_sent = true;
      channel.Send(kAbortCommand);
    }
  }

  if (state.phase == SessionPhase::kFailed && !abort_sent) {
    channel.Send(kAbortCommand);
  }
  out.exit_code = channel.Finish(ToMillis(options.drain_timeout_seconds));

  PhaseResult& r = out.result;
  r.phase = phase;
  if (crossing_index) {
    const MeasurementPoint& p = state.series.points[*crossing_index];
    r.status = PhaseStatus::kReached;
    r.crossing = CrossingPoint{p.elapsed_seconds, p.metric_value};
    r.metered_seconds = p.elapsed_seconds;
    r.wall_seconds = p.wall_seconds;
    r.epochs_consumed = p.epoch_fraction;
    r.diagnostic = post_crossing_note;
    auto dump = state.prediction_dumps.find(*crossing_index);
    if (dump != state.prediction_dumps.end()) out.crossing_dump = dump->second;
  } else if (state.phase == SessionPhase::kFailed) {
    r.status = PhaseStatus::kAborted;
    r.metered_seconds = state.final_reading.metered_seconds;
    r.wall_seconds = state.final_reading.wall_seconds;
    r.epochs_consumed = state.max_epoch;
    r.diagnostic = state.diagnostic;
  } else {
    r.metered_seconds = state.final_reading.metered_seconds;
    r.wall_seconds = state.final_reading.wall_seconds;
    r.epochs_consumed = state.max_epoch;
    switch (phase) {
      case Phase::kInference:
        if (state.step_count == 0) {
          r.status = PhaseStatus::kAborted;
          r.diagnostic = "zero instances reported";
        } else if (state.done_reason != DoneReason::kCompleted) {
          r.status = PhaseStatus::kAborted;
          r.diagnostic = "inference stopped before completion";
        } else {
          r.status = PhaseStatus::kReached;
          r.instance_count = state.step_count;
        }
        break;
      case Phase::kFinetune:
        if (state.max_epoch >= task.epoch_budget) {
          r.status = PhaseStatus::kNotReached;
        } else {
          r.status = PhaseStatus::kAborted;
          r.diagnostic =
              "trainer finished before crossing the cutoff or using the "
              "epoch budget";
        }
        break;
      case Phase::kPretrain:
        if (state.done_reason == DoneReason::kBudgetExhausted) {
          r.status = PhaseStatus::kNotReached;
        } else {
          r.status = PhaseStatus::kAborted;
          r.diagnostic = "pretraining stopped before qualifying";
        }
        break;
    }
    if (out.exit_code != 0 && r.status != PhaseStatus::kAborted) {
      r.status = PhaseStatus::kAborted;
      r.instance_count = 0;
      r.diagnostic = "trainer exited with code " + std::to_string(out.exit_code);
    }
  }

  if (options.hardware) {
    const double seconds = options.cost_source == CostTimeSource::kWall
                               ? r.wall_seconds
                               : r.metered_seconds;
    r.cost_usd = ComputeCost(seconds / 3600.0, *options.hardware);
  }
  return out;
}

PretrainSummary SummarizePretrain(
    const std::map<std::string, PhaseResult>& results,
    const std::optional<HardwareProfile>& hardware) {
  PretrainSummary summary;
  summary.status = PhaseStatus::kReached;
  for (const auto& [task, r] : results) {
    if (r.status == PhaseStatus::kAborted) {
      summary.status = PhaseStatus::kAborted;
    } else if (r.status == PhaseStatus::kNotReached &&
               summary.status == PhaseStatus::kReached) {
      summary.status = PhaseStatus::kNotReached;
    }
    summary.metered_seconds = std::max(summary.metered_seconds, r.metered_seconds);
  }
  if (results.empty()) summary.status = PhaseStatus::kNotReached;
  if (hardware) {
    summary.cost_usd = ComputeCost(summary.metered_seconds / 3600.0, *hardware);
  }
  return summary;
}

void ScoreModels(const BenchmarkConfig& config, const std::vector<Phase>& phases,
                 const std::vector<ModelResults>& models,
                 std::vector<ScoreCard>& scorecards,
                 std::vector<Leaderboard>& leaderboards,
                 std::vector<std::string>& warnings) {
  std::vector<ScoreBasis> bases = {ScoreBasis::kTime};
  if (config.hardware) bases.push_back(ScoreBasis::kCost);

  for (Phase phase : phases) {
    const std::string phase_name(ToString(phase));
    std::optional<ReferenceBaseline> from_run;
    for (const ModelResults& m : models) {
      if (!m.is_reference || !m.phases.count(phase)) continue;
      try {
        from_run = ReferenceBaseline::FromResults(m.model_name,
                                                  m.phases.at(phase));
      } catch (const UsageError& e) {
        warnings.push_back(phase_name + ": reference run unusable (" +
                           e.what() + "); falling back to config values");
      }
    }
    const ReferenceBaseline baseline =
        from_run ? *from_run : ReferenceBaseline::FromConfig(config, phase);

    for (ScoreBasis basis : bases) {
      try {
        baseline.Validate(config.tasks, basis);
      } catch (const UsageError& e) {
        warnings.push_back(phase_name + "/" + std::string(ToString(basis)) +
                           ": not scored: " + e.what());
        continue;
      }
      std::vector<ScoreCard> cards;
      for (const ModelResults& m : models) {
        auto it = m.phases.find(phase);
        if (it == m.phases.end()) continue;
        cards.push_back(BuildScorecard(m.model_name, phase, it->second,
                                       baseline, basis, config.tasks));
      }
      scorecards.insert(scorecards.end(), cards.begin(), cards.end());
      std::vector<std::string> task_names;
      for (const TaskSpec& t : config.tasks) task_names.push_back(t.name);
      Leaderboard board = cards.empty()
                              ? EmptyLeaderboard(phase, basis, task_names)
                              : Rank(std::move(cards));
      leaderboards.push_back(std::move(board));
    }
  }
}

RunBundle RunBenchmark(const BenchmarkConfig& config,
                       const std::optional<ModelEntry>& reference,
                       const std::vector<ModelEntry>& challengers,
                       const RunOptions& options) {
  if (config.tasks.empty()) throw UsageError("no tasks");
  if (options.phases.empty()) throw UsageError("no phases");
  config.Validate();

  RunBundle bundle;
  bundle.config = config;
  bundle.phases = options.phases;

  const std::filesystem::path root =
      options.work_root ? *options.work_root : MakeTempRoot();
  std::filesystem::create_directories(root);
  const std::filesystem::path config_path = root / "config.json";
  WriteFile(config_path, SerializeConfig(config));

  SupervisorOptions supervisor;
  supervisor.clock_mode = options.clock_mode;
  supervisor.idle_timeout_seconds = config.idle_timeout_seconds;
  supervisor.hardware = config.hardware;
  supervisor.cost_source = config.cost_time_source;
  supervisor.clock = options.clock;

  std::vector<const ModelEntry*> entries;
  if (reference) entries.push_back(&*reference);
  for (const ModelEntry& e : challengers) entries.push_back(&e);

  std::set<std::string> used_names;
  for (size_t i = 0; i < entries.size(); ++i) {
    const bool is_reference = reference && i == 0;
    ModelRun run;
    run.source = entries[i]->source;
    run.results.is_reference = is_reference;
    const std::filesystem::path model_dir =
        root / "work" / ("model-" + std::to_string(i));
    std::string hello_name;
    for (Phase phase : options.phases) {
      auto sessions = RunPhase(*entries[i], config, phase, config_path,
                               model_dir, supervisor, options.parallel);
      for (auto& [task, outcome] : sessions) {
        run.results.phases[phase][task] = outcome.result;
        if (outcome.state.hello && hello_name.empty()) {
          hello_name = outcome.state.hello->model_name;
          run.results.params_millions = outcome.state.hello->params_millions;
        }
        if (outcome.result.status == PhaseStatus::kAborted) {
          bundle.exit_code = kExitSessionsAborted;
        }
      }
      run.sessions[phase] = std::move(sessions);
    }
    std::string name = is_reference ? config.reference_model : hello_name;
    if (name.empty()) name = "model-" + std::to_string(i);
    const std::string base = name;
    for (int suffix = 2; used_names.count(name); ++suffix) {
      name = base + " (" + std::to_string(suffix) + ")";
    }
    used_names.insert(name);
    run.results.model_name = name;
    if (run.results.phases.count(Phase::kPretrain)) {
      run.results.pretrain = SummarizePretrain(
          run.results.phases.at(Phase::kPretrain), config.hardware);
    }
    bundle.models.push_back(std::move(run));
  }

  std::vector<ModelResults> results;
  for (const ModelRun& run : bundle.models) results.push_back(run.results);
  ScoreModels(config, options.phases, results, bundle.scorecards,
              bundle.leaderboards, bundle.warnings);
  return bundle;
}

InferenceReport InferenceBenchmark(const BenchmarkConfig& config,
                                   const TrainerLauncher& launcher,
                                   int64_t instance_count,
                                   const RunOptions& options) {
  if (instance_count < 1) throw UsageError("instance_count must be >= 1");
  BenchmarkConfig effective = config;
  effective.inference_instances = instance_count;
  RunOptions run_options = options;
  run_options.phases = {Phase::kInference};
  const RunBundle bundle =
      RunBenchmark(effective, std::nullopt, {ModelEntry{launcher, ""}},
                   run_options);
  InferenceReport report;
  report.results = bundle.models.front().results.phases.at(Phase::kInference);
  for (const auto& [task, result] : report.results) {
    if (auto latency = LatencyMs(result)) report.latency_ms[task] = *latency;
  }
  return report;
}

json PhaseResultToJson(const PhaseResult& r) {
  json doc = {{"phase", ToString(r.phase)},
              {"status", ToString(r.status)},
              {"metered_seconds", r.metered_seconds},
              {"wall_seconds", r.wall_seconds},
              {"cost_usd", r.cost_usd},
              {"epochs_consumed", r.epochs_consumed},
              {"instance_count", r.instance_count},
              {"diagnostic", r.diagnostic}};
  doc["crossing"] = r.crossing ? json{{"elapsed_seconds", r.crossing->elapsed_seconds},
                                      {"metric_value", r.crossing->metric_value}}
                               : json(nullptr);
  if (auto latency = LatencyMs(r)) doc["latency_ms"] = *latency;
  return doc;
}

PhaseResult PhaseResultFromJson(const json& doc) {
  try {
    PhaseResult r;
    r.phase = ParsePhase(doc.at("phase").get<std::string>());
    r.status = ParsePhaseStatus(doc.at("status").get<std::string>());
    r.metered_seconds = doc.at("metered_seconds").get<double>();
    r.wall_seconds = doc.at("wall_seconds").get<double>();
    r.cost_usd = doc.at("cost_usd").get<double>();
    r.epochs_consumed = doc.value("epochs_consumed", 0.0);
    r.instance_count = doc.value("instance_count", int64_t{0});
    r.diagnostic = doc.value("diagnostic", "");
    if (doc.contains("crossing") && !doc["crossing"].is_null()) {
      r.crossing = CrossingPoint{doc["crossing"].at("elapsed_seconds").get<double>(),
                                 doc["crossing"].at("metric_value").get<double>()};
    }
    return r;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed phase result: ") + e.what());
  } catch (const UsageError& e) {
    throw ConfigError(std::string("malformed phase result: ") + e.what());
  }
}

json ModelResultsToJson(const ModelResults& m) {
  json phases = json::object();
  for (const auto& [phase, tasks] : m.phases) {
    json t = json::object();
    for (const auto& [task, result] : tasks) t[task] = PhaseResultToJson(result);
    phases[std::string(ToString(phase))] = std::move(t);
  }
  json doc = {{"model", m.model_name},
              {"reference", m.is_reference},
              {"phases", std::move(phases)}};
  if (m.params_millions) doc["params_millions"] = *m.params_millions;
  if (m.pretrain) {
    doc["pretrain_summary"] = {{"status", ToString(m.pretrain->status)},
                               {"metered_seconds", m.pretrain->metered_seconds},
                               {"cost_usd", m.pretrain->cost_usd}};
  }
  return doc;
}

ModelResults ModelResultsFromJson(const json& doc) {
  try {
    ModelResults m;
    m.model_name = doc.at("model").get<std::string>();
    m.is_reference = doc.value("reference", false);
    if (doc.contains("params_millions")) {
      m.params_millions = doc["params_millions"].get<double>();
    }
    for (const auto& [phase, tasks] : doc.at("phases").items()) {
      auto& table = m.phases[ParsePhase(phase)];
      for (const auto& [task, result] : tasks.items()) {
        table[task] = PhaseResultFromJson(result);
      }
    }
    if (doc.contains("pretrain_summary")) {
      const json& p = doc["pretrain_summary"];
      m.pretrain = PretrainSummary{
          ParsePhaseStatus(p.at("status").get<std::string>()),
          p.at("metered_seconds").get<double>(), p.at("cost_usd").get<double>()};
    }
    return m;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed results file: ") + e.what());
  } catch (const UsageError& e) {
    throw ConfigError(std::string("malformed results file: ") + e.what());
  }
}

void WriteSubmission(const ModelRun& run, const BenchmarkConfig& config,
                     const std::string& source,
                     const std::filesystem::path& archive) {
  auto sessions = run.sessions.find(Phase::kFinetune);
  if (sessions == run.sessions.end()) {
    throw UsageError("submission needs fine-tune sessions");
  }
  SubmissionRecord record;
  record.model_name = run.results.model_name;
  record.hardware = DescribeHardware(config.hardware);
  record.params_millions = run.results.params_millions;
  record.source = source;
  record.phase = Phase::kFinetune;
  for (const TaskSpec& task : config.tasks) {
    auto it = sessions->second.find(task.name);
    if (it == sessions->second.end()) continue;
    const SessionOutcome& outcome = it->second;
    TaskClaim claim;
    claim.status = outcome.result.status;
    claim.log = "logs/finetune-" + task.name + ".events";
    std::string log;
    for (const std::string& line : outcome.log_lines) log += line + "\n";
    WriteFile(archive / claim.log, log);
    if (outcome.result.crossing) {
      claim.claimed_metric = outcome.result.crossing->metric_value;
      claim.claimed_seconds = outcome.result.metered_seconds;
      claim.claimed_cost_usd = outcome.result.cost_usd;
    }
    if (outcome.crossing_dump) {
      claim.predictions = "predictions/" + task.name;
      const std::filesystem::path target = archive / claim.predictions;
      std::filesystem::create_directories(target);
      std::filesystem::copy(*outcome.crossing_dump, target,
                            std::filesystem::copy_options::recursive |
                                std::filesystem::copy_options::overwrite_existing);
    }
    record.tasks.emplace(task.name, std::move(claim));
  }
  WriteSubmissionManifest(archive, record);
}

void WriteRunBundle(const RunBundle& bundle, const std::filesystem::path& out) {
  std::filesystem::create_directories(out);
  WriteFile(out / "config.json", SerializeConfig(bundle.config));
  json run = {{"phases", json::array()}, {"warnings", bundle.warnings}};
  for (Phase p : bundle.phases) run["phases"].push_back(ToString(p));
  WriteFile(out / "run.json", run.dump(2) + "\n");

  std::filesystem::remove_all(out / "results");
  for (size_t i = 0; i < bundle.models.size(); ++i) {
    const ModelResults& m = bundle.models[i].results;
    char prefix[8];
    std::snprintf(prefix, sizeof(prefix), "%02zu-", i);
    WriteFile(out / "results" / (prefix + SanitizeName(m.model_name) + ".json"),
              ModelResultsToJson(m).dump(2) + "\n");
  }

  const json echo = ConfigToJson(bundle.config);
  std::vector<std::string> task_names;
  for (const TaskSpec& t : bundle.config.tasks) task_names.push_back(t.name);
  const Leaderboard primary =
      bundle.leaderboards.empty()
          ? EmptyLeaderboard(bundle.phases.front(), ScoreBasis::kTime, task_names)
          : bundle.leaderboards.front();
  WriteFile(out / "leaderboard.json", Render(primary, RenderFormat::kJson, echo));
  WriteFile(out / "leaderboard.md",
            Render(primary, RenderFormat::kMarkdown, echo));
  WriteFile(out / "index.html", Render(primary, RenderFormat::kHtml, echo));
  for (const Leaderboard& board : bundle.leaderboards) {
    const std::filesystem::path dir =
        out / "boards" /
        (std::string(ToString(board.phase)) + "-" +
         std::string(ToString(board.basis)));
    WriteFile(dir / "leaderboard.json", Render(board, RenderFormat::kJson, echo));
    WriteFile(dir / "leaderboard.md",
              Render(board, RenderFormat::kMarkdown, echo));
    WriteFile(dir / "index.html", Render(board, RenderFormat::kHtml, echo));
  }

  for (const ModelRun& model : bundle.models) {
    if (!model.sessions.count(Phase::kFinetune)) continue;
    const std::filesystem::path archive =
        out / "submissions" / SanitizeName(model.results.model_name);
    std::filesystem::remove_all(archive);
    WriteSubmission(model, bundle.config, model.source, archive);
  }
}

StoredResults LoadResults(const std::filesystem::path& dir) {
  StoredResults stored;
  stored.config = LoadConfig(dir / "config.json");
  json run;
  try {
    run = json::parse(ReadFile(dir / "run.json"));
    for (const auto& p : run.at("phases")) {
      stored.phases.push_back(ParsePhase(p.get<std::string>()));
    }
  } catch (const json::exception& e) {
    throw ConfigError((dir / "run.json").string() + ": " + e.what());
  }
  std::vector<std::filesystem::path> files;
  if (std::filesystem::is_directory(dir / "results")) {
    for (const auto& entry : std::filesystem::directory_iterator(dir / "results")) {
      if (entry.path().extension() == ".json") files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    try {
      stored.models.push_back(ModelResultsFromJson(json::parse(ReadFile(file))));
    } catch (const json::parse_error& e) {
      throw ConfigError(file.string() + ": " + e.what());
    }
  }
  return stored;
}

}  // namespace effbench
