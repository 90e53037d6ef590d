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
/// \brief Deterministic simulated trainers.
///
/// A simulated trainer follows a saturating-exponential learning curve
/// m(t) = m_inf * (1 - exp(-t / tau)) + noise and speaks the session
/// protocol exactly like a real trainer, stamping every event with its
/// simulated time (`sim_seconds`).

#ifndef EFFBENCH_SIM_TRAINER_H_
#define EFFBENCH_SIM_TRAINER_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "effbench/config.h"
#include "effbench/protocol.h"
#include "effbench/types.h"

namespace effbench {

struct CurveParams {
  double m_inf = 95.0;
  double tau = 100.0;
  double noise_sigma = 0.0;
  uint64_t seed = 0;
  double sim_speedup = 1.0;

  void Validate() const;
};

/// Metric after `t` simulated training seconds, clamped to [0, 100]. Noise
/// is a pure function of (seed, t).
double CurveValue(const CurveParams& params, double t);

/// Time at which the noise-free curve reaches `cutoff`; nullopt when the
/// asymptote does not exceed it.
std::optional<double> AnalyticCrossingTime(const CurveParams& params,
                                           double cutoff);

/// Per-task simulation parameters.
struct SimTaskParams {
  CurveParams curve;
  double epoch_seconds = 60.0;      // simulated training seconds per epoch
  double latency_ms = 5.0;          // inference time per instance
  int64_t dev_examples = 0;         // 0 picks a per-metric default
};

struct PretrainSimParams {
  int64_t checkpoint_interval_steps = 1000;
  double r_inf = 1.0;
  double s_half = 1000.0;
  double steps_per_second = 10.0;
  int64_t max_steps = 100000;
  double steps_per_epoch = 10000.0;

  /// r_inf * s / (s + s_half)
  double Readiness(double step) const;
  void Validate() const;
};

/// Contents of a sim-trainer params file.
struct SimTrainerSpec {
  std::string model_name = "sim-model";
  std::optional<double> params_millions;
  uint64_t seed = 0;
  double sim_speedup = 1e9;
  double eval_seconds = 1.0;   // simulated duration of one dev evaluation
  int64_t steps_per_eval = 100;
  bool dump_predictions = true;
  std::map<std::string, SimTaskParams> tasks;
  PretrainSimParams pretrain;

  /// Curve for `task` with the trainer-level seed and speedup folded in.
  CurveParams CurveFor(const std::string& task) const;
  const SimTaskParams& Task(const std::string& task) const;
};

SimTrainerSpec SimSpecFromJson(const nlohmann::json& doc);
nlohmann::json SimSpecToJson(const SimTrainerSpec& spec);
SimTrainerSpec LoadSimSpec(const std::filesystem::path& path);

/// Training-time grid on which fine-tune evaluations happen: multiples of
/// `eval_interval`, with the last point clamped to the epoch budget.
std::vector<double> EvalGrid(double eval_interval, double budget_seconds);

/// The raw dev-set series a noise-aware fine-tune run produces, without any
/// protocol framing. Elapsed values are training seconds.
MeasurementSeries SimulateFinetuneSeries(const CurveParams& curve,
                                         const TaskSpec& task,
                                         double epoch_seconds,
                                         double eval_interval);

/// \brief Destination for emitted events. Emit throws on a broken channel.
class EventSink {
 public:
  virtual ~EventSink() = default;
  virtual void Emit(const TrainerEvent& event) = 0;
};

/// \brief Harness commands as seen by a trainer.
class CommandSource {
 public:
  virtual ~CommandSource() = default;
  /// Blocks until `begin`; false if the channel closed or `abort` came first.
  virtual bool WaitForBegin() = 0;
  /// Non-blocking; true once `abort` has been received or input closed.
  virtual bool AbortRequested() = 0;
};

struct SimRunOptions {
  TaskSpec task;
  Phase phase = Phase::kFinetune;
  double eval_interval = 10.0;
  int64_t inference_instances = 1000;
  // Prediction dumps are written here when set and enabled by `dump_predictions`.
  std::optional<std::filesystem::path> work_dir;
};

/// Runs one simulated session to completion. Returns the process exit code.
int RunSimTrainer(const SimTrainerSpec& spec, const SimRunOptions& options,
                  EventSink& sink, CommandSource& commands);

struct PretrainTaskSetup {
  TaskSpec task;
  CurveParams curve;
  double epoch_seconds = 60.0;
};

struct CheckpointOutcome {
  int64_t step = 0;
  double readiness = 0.0;
  // Per task: best dev metric the cloned fine-tune reached within budget.
  std::map<std::string, double> clone_metric;
  bool qualified = false;
};

struct PretrainRecord {
  PhaseStatus status = PhaseStatus::kNotReached;
  std::optional<int64_t> qualifying_step;
  double metered_seconds = 0.0;  // pretraining time up to the checkpoint
  std::vector<CheckpointOutcome> checkpoints;
};

struct CloneOutcome {
  double metric = 0.0;           // first crossing value, else best value
  double training_seconds = 0.0;  // until crossing, else the full budget
  bool crossed = false;
};

/// Fine-tune cloned from the checkpoint at pretraining step `step`, with
/// the curve's asymptote scaled by the checkpoint's readiness.
CloneOutcome SimulateClone(const PretrainSimParams& params,
                           const PretrainTaskSetup& setup, int64_t step,
                           double eval_interval);

/// Pretraining benchmark on simulated checkpoints: the first checkpoint
/// whose cloned fine-tunes reach every task's cutoff qualifies.
PretrainRecord RunSimPretrain(const PretrainSimParams& params,
                              const std::vector<PretrainTaskSetup>& tasks,
                              double eval_interval);

/// Writes a dev-set prediction file set whose recomputed metric is as close
/// to `target` as the dev-set size allows. Returns the recomputed value.
double WriteSyntheticPredictions(const std::filesystem::path& dir,
                                 MetricKind kind, double target,
                                 int64_t examples, uint64_t seed);

int64_t DefaultDevExamples(MetricKind kind);

/// Deterministic 64-bit seed combination.
uint64_t MixSeeds(uint64_t a, uint64_t b);

/// Copy of `spec` whose seed also depends on the benchmark run seed.
SimTrainerSpec WithRunSeed(SimTrainerSpec spec, uint64_t run_seed);

}  // namespace effbench

#endif  // EFFBENCH_SIM_TRAINER_H_
