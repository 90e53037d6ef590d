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

#include "effbench/sim_trainer.h"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "effbench/cutoff.h"
#include "effbench/metrics.h"

namespace effbench {
namespace {

using nlohmann::json;

// Uniform double in [0, 1) from the top 53 bits; independent of the
// standard library's distribution implementations.
double Uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double StandardNormal(std::mt19937_64& rng) {
  const double u1 = 1.0 - Uniform(rng);  // (0, 1]
  const double u2 = Uniform(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

uint64_t Mix(uint64_t a, uint64_t b) {
  uint64_t z = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

uint64_t Fnv1a(std::string_view text) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

double Number(const json& obj, const char* key, double fallback,
              const std::string& path) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) {
    throw ConfigError(path + "." + key + ": expected a number");
  }
  return obj[key].get<double>();
}

int64_t Integer(const json& obj, const char* key, int64_t fallback,
                const std::string& path) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_integer()) {
    throw ConfigError(path + "." + key + ": expected an integer");
  }
  return obj[key].get<int64_t>();
}

void SleepSimulated(double sim_seconds, double speedup) {
  const double real = sim_seconds / speedup;
  if (real >= 1e-6) {
    std::this_thread::sleep_for(std::chrono::duration<double>(real));
  }
}

class Emitter {
 public:
  explicit Emitter(EventSink& sink) : sink_(sink) {}

  template <typename Body>
  void operator()(Body body, double sim_seconds) {
    TrainerEvent event;
    event.body = std::move(body);
    event.sim_seconds = sim_seconds;
    sink_.Emit(event);
  }

 private:
  EventSink& sink_;
};

int RunFinetune(const SimTrainerSpec& spec, const SimRunOptions& options,
                Emitter& emit, CommandSource& commands) {
  const TaskSpec& task = options.task;
  const SimTaskParams& params = spec.Task(task.name);
  const CurveParams curve = spec.CurveFor(task.name);
  const double budget = task.epoch_budget * params.epoch_seconds;
  const int64_t dev_examples = params.dev_examples > 0
                                   ? params.dev_examples
                                   : DefaultDevExamples(task.metric_kind);

  double clock = 0.0;
  double trained = 0.0;
  int64_t epochs_announced = 0;
  const std::vector<double> grid = EvalGrid(options.eval_interval, budget);
  for (size_t k = 0; k < grid.size(); ++k) {
    if (commands.AbortRequested()) {
      emit(DoneEvent{DoneReason::kExternalStop}, clock);
      return 0;
    }
    const double t = grid[k];
    const bool last = k + 1 == grid.size();
    SleepSimulated(t - trained, curve.sim_speedup);
    clock += t - trained;
    trained = t;
    emit(StepEvent{static_cast<int64_t>(k + 1) * spec.steps_per_eval}, clock);

    const double epoch =
        last ? static_cast<double>(task.epoch_budget) : t / params.epoch_seconds;
    while (epochs_announced + 1 <= static_cast<int64_t>(std::floor(epoch))) {
      emit(EpochEvent{++epochs_announced}, clock);
    }

    emit(EvalBeginEvent{}, clock);
    SleepSimulated(spec.eval_seconds, curve.sim_speedup);
    clock += spec.eval_seconds;
    const double metric = CurveValue(curve, t);
    emit(EvalEvent{metric, epoch}, clock);

    if (spec.dump_predictions && options.work_dir) {
      char name[32];
      std::snprintf(name, sizeof(name), "eval-%04zu", k + 1);
      const std::filesystem::path dir = *options.work_dir / name;
      WriteSyntheticPredictions(dir, task.metric_kind, metric, dev_examples,
                                Mix(curve.seed, k + 1));
      emit(PredictionDumpEvent{dir.string()}, clock);
    }
  }
  emit(DoneEvent{DoneReason::kBudgetExhausted}, clock);
  return 0;
}

int RunInference(const SimTrainerSpec& spec, const SimRunOptions& options,
                 Emitter& emit, CommandSource& commands) {
  const SimTaskParams& params = spec.Task(options.task.name);
  const double latency = params.latency_ms / 1000.0;
  double clock = 0.0;
  for (int64_t i = 1; i <= options.inference_instances; ++i) {
    if (commands.AbortRequested()) {
      emit(DoneEvent{DoneReason::kExternalStop}, clock);
      return 0;
    }
    SleepSimulated(latency, spec.sim_speedup);
    // Derived from the index rather than accumulated, so the total is exact.
    clock = static_cast<double>(i) * latency;
    emit(StepEvent{i}, clock);
  }
  emit(DoneEvent{DoneReason::kCompleted}, clock);
  return 0;
}

int RunPretrain(const SimTrainerSpec& spec, const SimRunOptions& options,
                Emitter& emit, CommandSource& commands) {
  const PretrainSimParams& params = spec.pretrain;
  const PretrainTaskSetup setup{options.task, spec.CurveFor(options.task.name),
                                spec.Task(options.task.name).epoch_seconds};
  double clone_total = 0.0;
  double clock = 0.0;
  for (int64_t s = params.checkpoint_interval_steps; s <= params.max_steps;
       s += params.checkpoint_interval_steps) {
    if (commands.AbortRequested()) {
      emit(DoneEvent{DoneReason::kExternalStop}, clock);
      return 0;
    }
    const double pretrained = static_cast<double>(s) / params.steps_per_second;
    SleepSimulated(pretrained + clone_total - clock, spec.sim_speedup);
    clock = pretrained + clone_total;
    emit(StepEvent{s}, clock);
    emit(CheckpointEvent{s, "ckpt-" + std::to_string(s)}, clock);
    emit(EvalBeginEvent{}, clock);
    const CloneOutcome clone =
        SimulateClone(params, setup, s, options.eval_interval);
    SleepSimulated(clone.training_seconds, spec.sim_speedup);
    clone_total += clone.training_seconds;
    clock = pretrained + clone_total;
    emit(EvalEvent{clone.metric, static_cast<double>(s) / params.steps_per_epoch},
         clock);
  }
  emit(DoneEvent{DoneReason::kBudgetExhausted}, clock);
  return 0;
}

}  // namespace

void CurveParams::Validate() const {
  if (!(m_inf > 0.0)) throw UsageError("curve: m_inf must be > 0");
  if (!(tau > 0.0)) throw UsageError("curve: tau must be > 0");
  if (!(noise_sigma >= 0.0)) throw UsageError("curve: noise_sigma must be >= 0");
  if (!(sim_speedup >= 1.0)) throw UsageError("curve: sim_speedup must be >= 1");
}

double CurveValue(const CurveParams& params, double t) {
  if (!(t >= 0.0)) throw UsageError("curve: t must be >= 0");
  double value = -params.m_inf * std::expm1(-t / params.tau);
  if (params.noise_sigma > 0.0) {
    std::mt19937_64 rng(Mix(params.seed, std::bit_cast<uint64_t>(t)));
    value += params.noise_sigma * StandardNormal(rng);
  }
  return std::clamp(value, 0.0, 100.0);
}

std::optional<double> AnalyticCrossingTime(const CurveParams& params,
                                           double cutoff) {
  if (cutoff >= params.m_inf) return std::nullopt;
  if (cutoff <= 0.0) return 0.0;
  return -params.tau * std::log1p(-cutoff / params.m_inf);
}

double PretrainSimParams::Readiness(double step) const {
  return r_inf * step / (step + s_half);
}

void PretrainSimParams::Validate() const {
  if (!(r_inf > 0.0 && r_inf <= 1.0)) {
    throw UsageError("pretrain: r_inf must lie in (0, 1]");
  }
  if (!(s_half > 0.0)) throw UsageError("pretrain: s_half must be > 0");
  if (checkpoint_interval_steps < 1) {
    throw UsageError("pretrain: checkpoint_interval_steps must be >= 1");
  }
  if (!(steps_per_second > 0.0)) {
    throw UsageError("pretrain: steps_per_second must be > 0");
  }
  if (max_steps < checkpoint_interval_steps) {
    throw UsageError("pretrain: max_steps below one checkpoint interval");
  }
  if (!(steps_per_epoch > 0.0)) {
    throw UsageError("pretrain: steps_per_epoch must be > 0");
  }
}

CurveParams SimTrainerSpec::CurveFor(const std::string& task) const {
  CurveParams curve = Task(task).curve;
  curve.seed = Mix(seed, Fnv1a(task));
  curve.sim_speedup = sim_speedup;
  return curve;
}

const SimTaskParams& SimTrainerSpec::Task(const std::string& task) const {
  auto it = tasks.find(task);
  if (it == tasks.end()) {
    throw UsageError("sim params have no entry for task '" + task + "'");
  }
  return it->second;
}

SimTrainerSpec SimSpecFromJson(const json& doc) {
  if (!doc.is_object()) throw ConfigError("sim params: expected an object");
  SimTrainerSpec spec;
  spec.model_name = doc.value("model_name", spec.model_name);
  if (doc.contains("params_millions")) {
    spec.params_millions = Number(doc, "params_millions", 0.0, "sim");
  }
  spec.seed = static_cast<uint64_t>(Integer(doc, "seed", 0, "sim"));
  spec.sim_speedup = Number(doc, "sim_speedup", spec.sim_speedup, "sim");
  spec.eval_seconds = Number(doc, "eval_seconds", spec.eval_seconds, "sim");
  spec.steps_per_eval = Integer(doc, "steps_per_eval", spec.steps_per_eval, "sim");
  spec.dump_predictions = doc.value("dump_predictions", spec.dump_predictions);
  if (!doc.contains("tasks") || !doc["tasks"].is_object()) {
    throw ConfigError("sim.tasks: expected an object");
  }
  for (const auto& [name, t] : doc["tasks"].items()) {
    const std::string path = "sim.tasks." + name;
    SimTaskParams p;
    p.curve.m_inf = Number(t, "m_inf", p.curve.m_inf, path);
    p.curve.tau = Number(t, "tau", p.curve.tau, path);
    p.curve.noise_sigma = Number(t, "noise_sigma", 0.0, path);
    p.curve.sim_speedup = spec.sim_speedup;
    p.epoch_seconds = Number(t, "epoch_seconds", p.epoch_seconds, path);
    p.latency_ms = Number(t, "latency_ms", p.latency_ms, path);
    p.dev_examples = Integer(t, "dev_examples", 0, path);
    try {
      p.curve.Validate();
    } catch (const UsageError& e) {
      throw ConfigError(path + ": " + e.what());
    }
    if (!(p.epoch_seconds > 0.0) || !(p.latency_ms > 0.0)) {
      throw ConfigError(path + ": epoch_seconds and latency_ms must be > 0");
    }
    spec.tasks.emplace(name, p);
  }
  if (doc.contains("pretrain")) {
    const json& p = doc["pretrain"];
    PretrainSimParams& pre = spec.pretrain;
    pre.checkpoint_interval_steps = Integer(
        p, "checkpoint_interval_steps", pre.checkpoint_interval_steps,
        "sim.pretrain");
    pre.r_inf = Number(p, "r_inf", pre.r_inf, "sim.pretrain");
    pre.s_half = Number(p, "s_half", pre.s_half, "sim.pretrain");
    pre.steps_per_second =
        Number(p, "steps_per_second", pre.steps_per_second, "sim.pretrain");
    pre.max_steps = Integer(p, "max_steps", pre.max_steps, "sim.pretrain");
    pre.steps_per_epoch =
        Number(p, "steps_per_epoch", pre.steps_per_epoch, "sim.pretrain");
  }
  try {
    spec.pretrain.Validate();
  } catch (const UsageError& e) {
    throw ConfigError(std::string("sim.") + e.what());
  }
  if (!(spec.sim_speedup >= 1.0) || !(spec.eval_seconds >= 0.0) ||
      spec.steps_per_eval < 1) {
    throw ConfigError("sim: sim_speedup >= 1, eval_seconds >= 0 and "
                      "steps_per_eval >= 1 required");
  }
  return spec;
}

json SimSpecToJson(const SimTrainerSpec& spec) {
  json tasks = json::object();
  for (const auto& [name, p] : spec.tasks) {
    tasks[name] = {{"m_inf", p.curve.m_inf},
                   {"tau", p.curve.tau},
                   {"noise_sigma", p.curve.noise_sigma},
                   {"epoch_seconds", p.epoch_seconds},
                   {"latency_ms", p.latency_ms},
                   {"dev_examples", p.dev_examples}};
  }
  json doc = {{"model_name", spec.model_name},
              {"seed", spec.seed},
              {"sim_speedup", spec.sim_speedup},
              {"eval_seconds", spec.eval_seconds},
              {"steps_per_eval", spec.steps_per_eval},
              {"dump_predictions", spec.dump_predictions},
              {"tasks", std::move(tasks)},
              {"pretrain",
               {{"checkpoint_interval_steps",
                 spec.pretrain.checkpoint_interval_steps},
                {"r_inf", spec.pretrain.r_inf},
                {"s_half", spec.pretrain.s_half},
                {"steps_per_second", spec.pretrain.steps_per_second},
                {"max_steps", spec.pretrain.max_steps},
                {"steps_per_epoch", spec.pretrain.steps_per_epoch}}}};
  if (spec.params_millions) doc["params_millions"] = *spec.params_millions;
  return doc;
}

SimTrainerSpec LoadSimSpec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open sim params " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return SimSpecFromJson(json::parse(buffer.str()));
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::vector<double> EvalGrid(double eval_interval, double budget_seconds) {
  if (!(eval_interval > 0.0)) throw UsageError("eval_interval must be > 0");
  std::vector<double> grid;
  for (int64_t k = 1;; ++k) {
    const double t = static_cast<double>(k) * eval_interval;
    if (t >= budget_seconds * (1.0 - 1e-12)) {
      grid.push_back(budget_seconds);
      break;
    }
    grid.push_back(t);
  }
  return grid;
}

MeasurementSeries SimulateFinetuneSeries(const CurveParams& curve,
                                         const TaskSpec& task,
                                         double epoch_seconds,
                                         double eval_interval) {
  const double budget = task.epoch_budget * epoch_seconds;
  const std::vector<double> grid = EvalGrid(eval_interval, budget);
  MeasurementSeries series;
  series.metric_kind = task.metric_kind;
  for (size_t k = 0; k < grid.size(); ++k) {
    const double t = grid[k];
    const double epoch = k + 1 == grid.size()
                             ? static_cast<double>(task.epoch_budget)
                             : t / epoch_seconds;
    series.points.push_back({t, CurveValue(curve, t), epoch, t});
  }
  return series;
}

CloneOutcome SimulateClone(const PretrainSimParams& params,
                           const PretrainTaskSetup& setup, int64_t step,
                           double eval_interval) {
  CurveParams curve = setup.curve;
  curve.m_inf *= params.Readiness(static_cast<double>(step));
  curve.seed = Mix(curve.seed, static_cast<uint64_t>(step));
  const MeasurementSeries series = SimulateFinetuneSeries(
      curve, setup.task, setup.epoch_seconds, eval_interval);
  CloneOutcome out;
  if (auto crossing = DetectCrossing(series, setup.task)) {
    out.metric = crossing->metric_value;
    out.training_seconds = crossing->elapsed_seconds;
    out.crossed = true;
    return out;
  }
  for (const MeasurementPoint& p : series.points) {
    out.metric = std::max(out.metric, p.metric_value);
  }
  out.training_seconds = series.points.back().elapsed_seconds;
  return out;
}

PretrainRecord RunSimPretrain(const PretrainSimParams& params,
                              const std::vector<PretrainTaskSetup>& tasks,
                              double eval_interval) {
  params.Validate();
  PretrainRecord record;
  for (int64_t s = params.checkpoint_interval_steps; s <= params.max_steps;
       s += params.checkpoint_interval_steps) {
    CheckpointOutcome outcome;
    outcome.step = s;
    outcome.readiness = params.Readiness(static_cast<double>(s));
    outcome.qualified = true;
    for (const PretrainTaskSetup& setup : tasks) {
      const CloneOutcome clone = SimulateClone(params, setup, s, eval_interval);
      outcome.clone_metric[setup.task.name] = clone.metric;
      outcome.qualified = outcome.qualified && clone.crossed;
    }
    record.checkpoints.push_back(outcome);
    record.metered_seconds = static_cast<double>(s) / params.steps_per_second;
    if (outcome.qualified) {
      record.status = PhaseStatus::kReached;
      record.qualifying_step = s;
      return record;
    }
  }
  record.status = PhaseStatus::kNotReached;
  return record;
}

uint64_t MixSeeds(uint64_t a, uint64_t b) { return Mix(a, b); }

SimTrainerSpec WithRunSeed(SimTrainerSpec spec, uint64_t run_seed) {
  spec.seed = Mix(spec.seed, run_seed);
  return spec;
}

int64_t DefaultDevExamples(MetricKind kind) {
  switch (kind) {
    case MetricKind::kEntityF1:
      return 500;  // sentences, two entities each
    case MetricKind::kAccuracy:
      return 872;
    case MetricKind::kMnliAvgAccuracy:
      return 1000;  // per split
  }
  return 1000;
}

double WriteSyntheticPredictions(const std::filesystem::path& dir,
                                 MetricKind kind, double target,
                                 int64_t examples, uint64_t seed) {
  if (examples < 1) throw UsageError("synthetic predictions: examples < 1");
  std::filesystem::create_directories(dir);
  std::mt19937_64 rng(seed);
  auto pick = [&rng](int64_t n) {
    return static_cast<int64_t>(rng() % static_cast<uint64_t>(n));
  };
  // Marks exactly `keep` of `n` items, chosen by a seeded Fisher-Yates shuffle.
  auto choose = [&](int64_t n, int64_t keep) {
    std::vector<int64_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (int64_t i = n - 1; i > 0; --i) std::swap(order[i], order[pick(i + 1)]);
    std::vector<bool> kept(n, false);
    for (int64_t i = 0; i < keep; ++i) kept[order[i]] = true;
    return kept;
  };
  target = std::clamp(target, 0.0, 100.0);

  auto labels = [&](const std::vector<std::string>& classes, int64_t n) {
    const auto correct =
        choose(n, std::clamp<int64_t>(std::llround(target * n / 100.0), 0, n));
    LabelPredictions data;
    const auto k = static_cast<int64_t>(classes.size());
    for (int64_t i = 0; i < n; ++i) {
      const int64_t g = pick(k);
      const int64_t p = correct[i] ? g : (g + 1 + pick(k - 1)) % k;
      data.gold.push_back(classes[g]);
      data.predicted.push_back(classes[p]);
    }
    return data;
  };

  switch (kind) {
    case MetricKind::kAccuracy:
      WriteLabelPredictions(dir / kLabelPredictionFile,
                            labels({"negative", "positive"}, examples));
      break;
    case MetricKind::kMnliAvgAccuracy: {
      const std::vector<std::string> classes = {"entailment", "neutral",
                                                "contradiction"};
      WriteLabelPredictions(dir / kMnliMatchedFile, labels(classes, examples));
      WriteLabelPredictions(dir / kMnliMismatchedFile,
                            labels(classes, examples));
      break;
    }
    case MetricKind::kEntityF1: {
      // With no spurious predictions P = 1 and F1 = 2k / (k + G).
      const int64_t entities = 2 * examples;
      const int64_t keep = std::clamp<int64_t>(
          std::llround(target * entities / (200.0 - target)), 0, entities);
      const auto kept = choose(entities, keep);
      static const char* kTypes[] = {"PER", "LOC", "ORG", "MISC"};
      ConllPredictions data;
      for (int64_t s = 0; s < examples; ++s) {
        const std::string a = kTypes[pick(4)];
        const std::string b = kTypes[pick(4)];
        std::vector<std::string> tokens;
        for (int i = 0; i < 6; ++i) {
          tokens.push_back("w" + std::to_string(s) + "_" + std::to_string(i));
        }
        TagSequence gold = {"B-" + a, "I-" + a, "O", "B-" + b, "O", "O"};
        TagSequence pred = gold;
        if (!kept[2 * s]) pred[0] = pred[1] = "O";
        if (!kept[2 * s + 1]) pred[3] = "O";
        data.tokens.push_back(std::move(tokens));
        data.gold.push_back(std::move(gold));
        data.predicted.push_back(std::move(pred));
      }
      WriteConllPredictions(dir / kConllPredictionFile, data);
      break;
    }
  }
  return RecomputeMetric(kind, dir).value;
}

int RunSimTrainer(const SimTrainerSpec& spec, const SimRunOptions& options,
                  EventSink& sink, CommandSource& commands) {
  if (!commands.WaitForBegin()) return 1;
  Emitter emit(sink);
  HelloEvent hello{spec.model_name, options.phase, options.task.name,
                   spec.params_millions};
  emit(hello, 0.0);
  switch (options.phase) {
    case Phase::kFinetune:
      return RunFinetune(spec, options, emit, commands);
    case Phase::kInference:
      return RunInference(spec, options, emit, commands);
    case Phase::kPretrain:
      return RunPretrain(spec, options, emit, commands);
  }
  return 1;
}

}  // namespace effbench
