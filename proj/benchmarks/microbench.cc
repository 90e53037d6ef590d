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

#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "effbench/cutoff.h"
#include "effbench/metrics.h"
#include "effbench/protocol.h"
#include "effbench/scoring.h"
#include "effbench/sim_trainer.h"

namespace effbench {
namespace {

std::vector<TagSequence> RandomCorpus(size_t sentences, uint64_t seed) {
  static const char* kTags[] = {"O",     "O",     "O",     "B-PER", "I-PER",
                                "B-LOC", "I-LOC", "B-ORG", "I-ORG", "I-MISC"};
  // Lengths depend only on the sentence index so corpora line up.
  std::mt19937_64 lengths(0);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<size_t> len(5, 40);
  std::uniform_int_distribution<size_t> pick(0, std::size(kTags) - 1);
  std::vector<TagSequence> corpus(sentences);
  for (TagSequence& s : corpus) {
    s.resize(len(lengths));
    for (std::string& tag : s) tag = kTags[pick(rng)];
  }
  return corpus;
}

void BM_EntityF1(benchmark::State& state) {
  const auto gold = RandomCorpus(state.range(0), 1);
  const auto predicted = RandomCorpus(state.range(0), 2);
  for (auto _ : state) benchmark::DoNotOptimize(EntityF1(predicted, gold));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EntityF1)->Arg(100)->Arg(3250);

void BM_ParseEvent(benchmark::State& state) {
  const std::string line =
      R"({"kind":"eval","metric_value":91.234,"epoch_fraction":2.5,)"
      R"("sim_seconds":1234.5})";
  for (auto _ : state) benchmark::DoNotOptimize(ParseEvent(line));
}
BENCHMARK(BM_ParseEvent);

void BM_SerializeEvent(benchmark::State& state) {
  const TrainerEvent event{EvalEvent{91.234, 2.5}, 1234.5};
  for (auto _ : state) benchmark::DoNotOptimize(SerializeEvent(event));
}
BENCHMARK(BM_SerializeEvent);

void BM_Scorecard(benchmark::State& state) {
  ReferenceBaseline reference{"ref", {}};
  std::vector<std::pair<std::string, std::optional<double>>> raw;
  for (int i = 0; i < state.range(0); ++i) {
    const std::string task = "task" + std::to_string(i);
    reference.per_task[task] = {100.0 + i, 1.0};
    raw.emplace_back(task, i % 7 == 0 ? std::nullopt
                                      : std::optional<double>(50.0 + i));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(ScorecardFromRaw("m", Phase::kFinetune,
                                              ScoreBasis::kTime, raw, reference));
  }
}
BENCHMARK(BM_Scorecard)->Arg(3)->Arg(64);

void BM_DetectCrossing(benchmark::State& state) {
  const CurveParams curve{95.0, 1000.0, 0.3, 7, 1.0};
  const TaskSpec task{"t", MetricKind::kAccuracy, 94.0, 5, 1, 1};
  const MeasurementSeries series =
      SimulateFinetuneSeries(curve, task, 2000.0, 10.0);
  for (auto _ : state) benchmark::DoNotOptimize(DetectCrossing(series, task));
  state.SetItemsProcessed(state.iterations() * series.points.size());
}
BENCHMARK(BM_DetectCrossing);

}  // namespace
}  // namespace effbench

BENCHMARK_MAIN();
