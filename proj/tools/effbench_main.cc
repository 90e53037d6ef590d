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

// effbench command-line entry point.

#include <poll.h>
#include <unistd.h>

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "effbench/config.h"
#include "effbench/leaderboard.h"
#include "effbench/orchestrator.h"
#include "effbench/scoring.h"
#include "effbench/sim_trainer.h"

namespace effbench {
namespace {

// Events go to stdout, one flushed line each.
class StdoutSink final : public EventSink {
 public:
  void Emit(const TrainerEvent& event) override {
    const std::string line = SerializeEvent(event) + "\n";
    if (std::fwrite(line.data(), 1, line.size(), stdout) != line.size() ||
        std::fflush(stdout) != 0) {
      throw std::runtime_error("stdout closed");
    }
  }
};

// Harness commands read from stdin without blocking the training loop.
class StdinCommands final : public CommandSource {
 public:
  bool WaitForBegin() override {
    while (true) {
      while (lines_.empty() && !eof_) Fill(-1);
      if (lines_.empty()) return false;
      const std::string command = Pop();
      if (command == kBeginCommand) return true;
      if (command == kAbortCommand) {
        aborted_ = true;
        return false;
      }
    }
  }

  bool AbortRequested() override {
    while (!eof_ && Fill(0)) {
    }
    while (!lines_.empty()) {
      if (Pop() == kAbortCommand) aborted_ = true;
    }
    return aborted_ || eof_;
  }

 private:
  // Reads whatever is available within `timeout_ms`; false if nothing was.
  bool Fill(int timeout_ms) {
    pollfd pfd{STDIN_FILENO, POLLIN, 0};
    if (::poll(&pfd, 1, timeout_ms) <= 0) return false;
    char buf[4096];
    const ssize_t n = ::read(STDIN_FILENO, buf, sizeof(buf));
    if (n <= 0) {
      eof_ = true;
      return false;
    }
    partial_.append(buf, static_cast<size_t>(n));
    size_t newline;
    while ((newline = partial_.find('\n')) != std::string::npos) {
      std::string line = partial_.substr(0, newline);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      lines_.push_back(std::move(line));
      partial_.erase(0, newline + 1);
    }
    return true;
  }

  std::string Pop() {
    std::string line = std::move(lines_.front());
    lines_.pop_front();
    return line;
  }

  std::deque<std::string> lines_;
  std::string partial_;
  bool eof_ = false;
  bool aborted_ = false;
};

std::vector<Phase> ParsePhaseList(const std::string& text) {
  std::vector<Phase> phases;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    const Phase phase = ParsePhase(item);
    if (std::find(phases.begin(), phases.end(), phase) == phases.end()) {
      phases.push_back(phase);
    }
  }
  if (phases.empty()) throw UsageError("no phases selected");
  return phases;
}

void ApplySeedOverride(BenchmarkConfig& config) {
  const char* seed = std::getenv("EFFBENCH_SEED");
  if (seed == nullptr || *seed == '\0') return;
  char* end = nullptr;
  errno = 0;
  const unsigned long long value = std::strtoull(seed, &end, 10);
  if (errno != 0 || *end != '\0' || seed[0] == '-') {
    throw ConfigError(std::string("EFFBENCH_SEED is not an unsigned integer: ") +
                      seed);
  }
  config.seed = value;
}

void PrintSummary(const RunBundle& bundle) {
  for (const ModelRun& run : bundle.models) {
    for (const auto& [phase, tasks] : run.results.phases) {
      for (const auto& [task, result] : tasks) {
        std::printf("%-20s %-9s %-12s %-11s metered=%.3fs wall=%.3fs", 
                    run.results.model_name.c_str(), ToString(phase).data(),
                    task.c_str(), ToString(result.status).data(),
                    result.metered_seconds, result.wall_seconds);
        if (bundle.config.hardware) {
          std::printf(" cost=%s", FormatUsd(result.cost_usd).c_str());
        }
        if (!result.diagnostic.empty()) {
          std::printf(" (%s)", result.diagnostic.c_str());
        }
        std::printf("\n");
      }
    }
  }
  for (const ScoreCard& card : bundle.scorecards) {
    std::printf("score %-20s %-9s %-4s overall=%s\n", card.model_name.c_str(),
                ToString(card.phase).data(), ToString(card.basis).data(),
                FormatScore(card.DisplayOverall()).c_str());
  }
  for (const std::string& warning : bundle.warnings) {
    std::fprintf(stderr, "warning: %s\n", warning.c_str());
  }
}

struct RunArgs {
  std::string config;
  std::vector<std::string> trainers;
  std::string reference_trainer;
  std::string phases = "finetune";
  std::string out = "effbench-out";
  std::string clock = "steady";
  std::string source;
  bool parallel = false;
};

int CmdRun(const RunArgs& args) {
  BenchmarkConfig config = LoadConfig(args.config);
  ApplySeedOverride(config);
  config.Validate();

  RunOptions options;
  options.phases = ParsePhaseList(args.phases);
  options.clock_mode = ParseClockMode(args.clock);
  options.parallel = args.parallel;
  if (options.parallel && options.clock_mode != ClockMode::kSimulated) {
    throw UsageError("--parallel requires --clock sim");
  }
  const std::filesystem::path out(args.out);
  options.work_root = out / "work";
  std::filesystem::remove_all(*options.work_root);

  // Without --source, submissions record the command that produced them.
  auto entry = [&](const std::string& trainer) {
    return ModelEntry{ProcessLauncher(trainer),
                      args.source.empty() ? "command: " + trainer : args.source};
  };
  std::optional<ModelEntry> reference;
  if (!args.reference_trainer.empty()) reference = entry(args.reference_trainer);
  std::vector<ModelEntry> challengers;
  for (const std::string& trainer : args.trainers) {
    challengers.push_back(entry(trainer));
  }
  const RunBundle bundle = RunBenchmark(config, reference, challengers, options);
  WriteRunBundle(bundle, out);
  PrintSummary(bundle);
  return bundle.exit_code;
}

int CmdScore(const std::string& results_dir, bool as_json) {
  const StoredResults stored = LoadResults(results_dir);
  std::vector<ScoreCard> cards;
  std::vector<Leaderboard> boards;
  std::vector<std::string> warnings;
  ScoreModels(stored.config, stored.phases, stored.models, cards, boards,
              warnings);
  if (as_json) {
    nlohmann::json doc = nlohmann::json::array();
    for (const ScoreCard& card : cards) doc.push_back(ScoreCardToJson(card));
    std::cout << doc.dump(2) << "\n";
  } else {
    for (const ScoreCard& card : cards) {
      std::printf("%s  %s/%s  overall %s\n", card.model_name.c_str(),
                  ToString(card.phase).data(), ToString(card.basis).data(),
                  FormatScore(card.DisplayOverall()).c_str());
      for (const TaskScore& s : card.per_task) {
        std::printf("  %-12s %-11s %s\n", s.task.c_str(),
                    ToString(s.status).data(),
                    FormatScore(s.display_score).c_str());
      }
    }
  }
  for (const std::string& warning : warnings) {
    std::fprintf(stderr, "warning: %s\n", warning.c_str());
  }
  return kExitOk;
}

int CmdValidate(const std::string& archive, const std::string& config_path) {
  const BenchmarkConfig config =
      config_path.empty() ? DefaultConfig() : LoadConfig(config_path);
  const SubmissionRecord record = LoadSubmission(archive);
  const ValidationReport report = ValidateSubmission(record, archive, config);
  for (const auto& [task, coverage] : report.coverage_percent) {
    std::printf("coverage %s: %.1f%%\n", task.c_str(), coverage);
  }
  if (report.passed) {
    std::printf("valid\n");
    return kExitOk;
  }
  for (const std::string& reason : report.reasons) {
    std::printf("invalid: %s\n", reason.c_str());
  }
  return 1;
}

int CmdLeaderboard(const std::string& results_dir, const std::string& format,
                   const std::string& phase_name, const std::string& basis_name,
                   const std::string& output) {
  const StoredResults stored = LoadResults(results_dir);
  const RenderFormat render_format = ParseRenderFormat(format);
  const Phase phase = phase_name.empty()
                          ? (stored.phases.empty() ? Phase::kFinetune
                                                   : stored.phases.front())
                          : ParsePhase(phase_name);
  const ScoreBasis basis = ParseScoreBasis(basis_name);
  std::vector<ScoreCard> cards;
  std::vector<Leaderboard> boards;
  std::vector<std::string> warnings;
  ScoreModels(stored.config, {phase}, stored.models, cards, boards, warnings);
  for (const std::string& warning : warnings) {
    std::fprintf(stderr, "warning: %s\n", warning.c_str());
  }
  const Leaderboard* board = nullptr;
  for (const Leaderboard& b : boards) {
    if (b.basis == basis) board = &b;
  }
  if (board == nullptr) {
    throw UsageError("no " + std::string(ToString(basis)) + " leaderboard for " +
                     std::string(ToString(phase)));
  }
  const std::string text =
      Render(*board, render_format, ConfigToJson(stored.config));
  if (output.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(output, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + output);
    out << text;
  }
  return kExitOk;
}

struct SimArgs {
  std::string params;
  std::string task;
  std::string phase = "finetune";
  std::string config;
  std::string work_dir;
};

int CmdSimTrainer(const SimArgs& args) {
  std::signal(SIGPIPE, SIG_IGN);
  const BenchmarkConfig config =
      args.config.empty() ? DefaultConfig() : LoadConfig(args.config);
  const SimTrainerSpec spec = WithRunSeed(LoadSimSpec(args.params), config.seed);
  const TaskSpec* task = config.FindTask(args.task);
  if (task == nullptr) throw UsageError("unknown task '" + args.task + "'");

  SimRunOptions options;
  options.task = *task;
  options.phase = ParsePhase(args.phase);
  options.eval_interval = config.eval_interval_seconds;
  options.inference_instances = config.inference_instances;
  if (!args.work_dir.empty()) {
    options.work_dir = args.work_dir;
  } else if (const char* dir = std::getenv("EFFBENCH_WORK_DIR")) {
    options.work_dir = dir;
  }
  StdoutSink sink;
  StdinCommands commands;
  return RunSimTrainer(spec, options, sink, commands);
}

int Main(int argc, char** argv) {
  CLI::App app{"Multi-phase efficiency benchmark harness", "effbench"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "effbench 0.1.0");

  RunArgs run_args;
  CLI::App* run = app.add_subcommand("run", "Run trainers over every task");
  run->add_option("--config", run_args.config, "Benchmark config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--trainer", run_args.trainers,
                  "Trainer command template; repeat for several models")
      ->required();
  run->add_option("--reference-trainer", run_args.reference_trainer,
                  "Reference model trainer; config references when omitted");
  run->add_option("--phases", run_args.phases,
                  "Comma-separated subset of pretrain,finetune,inference")
      ->capture_default_str();
  run->add_option("--out", run_args.out, "Output directory")
      ->capture_default_str();
  run->add_option("--clock", run_args.clock, "steady or sim")
      ->capture_default_str();
  run->add_option("--source", run_args.source,
                  "Source reference (URL or archive hash) for generated submissions; "
                  "defaults to the trainer command");
  run->add_flag("--parallel", run_args.parallel,
                "Run tasks concurrently (simulated trainers only)");

  std::string results_dir;
  bool score_json = false;
  CLI::App* score = app.add_subcommand("score", "Re-score stored results");
  score->add_option("--results", results_dir, "Run output directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  score->add_flag("--json", score_json, "Print scorecards as JSON");

  std::string archive, validate_config;
  CLI::App* validate =
      app.add_subcommand("validate", "Validate a submission archive");
  validate->add_option("--submission", archive, "Submission directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  validate->add_option("--config", validate_config,
                       "Benchmark config; built-in defaults when omitted")
      ->check(CLI::ExistingFile);

  std::string format = "md", board_phase, board_basis = "time", board_output;
  CLI::App* board = app.add_subcommand("leaderboard", "Render a leaderboard");
  board->add_option("--results", results_dir, "Run output directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  board->add_option("--format", format, "md, json or html")
      ->capture_default_str();
  board->add_option("--phase", board_phase, "Phase; first run phase if omitted");
  board->add_option("--basis", board_basis, "time or cost")
      ->capture_default_str();
  board->add_option("--output", board_output, "Write to file, not stdout");

  SimArgs sim_args;
  CLI::App* sim = app.add_subcommand(
      "sim-trainer", "Simulated trainer speaking the session protocol");
  sim->add_option("--params", sim_args.params, "Simulation params (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  sim->add_option("--task", sim_args.task, "Task name")->required();
  sim->add_option("--phase", sim_args.phase, "pretrain, finetune or inference")
      ->capture_default_str();
  sim->add_option("--config", sim_args.config, "Benchmark config (JSON)");
  sim->add_option("--work-dir", sim_args.work_dir,
                  "Prediction dump directory; EFFBENCH_WORK_DIR otherwise");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (*run) return CmdRun(run_args);
    if (*score) return CmdScore(results_dir, score_json);
    if (*validate) return CmdValidate(archive, validate_config);
    if (*board) {
      return CmdLeaderboard(results_dir, format, board_phase, board_basis,
                            board_output);
    }
    if (*sim) return CmdSimTrainer(sim_args);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "effbench: %s\n", e.what());
    return kExitConfigError;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "effbench: %s\n", e.what());
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "effbench: internal error: %s\n", e.what());
    return kExitInternalError;
  }
  return kExitInternalError;
}

}  // namespace
}  // namespace effbench

int main(int argc, char** argv) { return effbench::Main(argc, argv); }
