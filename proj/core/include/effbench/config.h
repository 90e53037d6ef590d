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

#ifndef EFFBENCH_CONFIG_H_
#define EFFBENCH_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "effbench/types.h"

namespace effbench {

/// Reference-model raw values for one task. `time` is in the phase's native
/// unit: seconds for pretrain/finetune, milliseconds per instance for
/// inference.
struct ReferenceEntry {
  double time = 0.0;
  std::optional<double> cost_usd;

  friend bool operator==(const ReferenceEntry&,
                         const ReferenceEntry&) = default;
};

using ReferenceTable = std::map<std::string, ReferenceEntry>;

enum class CostTimeSource { kMetered, kWall };

struct BenchmarkConfig {
  std::vector<TaskSpec> tasks;
  std::optional<HardwareProfile> hardware;
  std::string reference_model = "BERT_LARGE";
  // phase name -> task name -> reference values
  std::map<Phase, ReferenceTable> reference;
  double eval_interval_seconds = 10.0;
  uint64_t seed = 0;
  double idle_timeout_seconds = 300.0;
  int64_t inference_instances = 1000;
  CostTimeSource cost_time_source = CostTimeSource::kMetered;

  const TaskSpec* FindTask(std::string_view name) const;

  /// Re-checks every invariant; throws ConfigError on the first violation.
  void Validate() const;

  friend bool operator==(const BenchmarkConfig&,
                         const BenchmarkConfig&) = default;
};

/// Parses the documented JSON schema. Unknown keys are rejected and every
/// error message names the offending field path.
BenchmarkConfig ConfigFromJson(const nlohmann::json& doc);
nlohmann::json ConfigToJson(const BenchmarkConfig& config);

BenchmarkConfig ParseConfig(std::string_view text);
std::string SerializeConfig(const BenchmarkConfig& config);

/// Throws ConfigError for a missing or unreadable file.
BenchmarkConfig LoadConfig(const std::filesystem::path& path);

/// CoNLL 2003 / MNLI / SST-2 with cutoffs 91 / 85 / 90, one V100 and the
/// BERT_LARGE reference times for fine-tuning and inference.
BenchmarkConfig DefaultConfig();

}  // namespace effbench

#endif  // EFFBENCH_CONFIG_H_
