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

#include "effbench/config.h"

#include <fstream>
#include <set>
#include <sstream>

namespace effbench {
namespace {

using nlohmann::json;

// Checked accessors; each throws ConfigError naming the field path.
class Fields {
 public:
  Fields(const json& obj, std::string path, std::set<std::string> allowed)
      : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(path_ + ": expected an object");
    for (const auto& [key, value] : obj_.items()) {
      if (!allowed.count(key)) {
        throw ConfigError(Name(key) + ": unknown field");
      }
    }
  }

  bool Has(const std::string& key) const { return obj_.contains(key); }

  const json& Required(const std::string& key) const {
    if (!obj_.contains(key)) throw ConfigError(Name(key) + ": missing");
    return obj_.at(key);
  }

  double Number(const std::string& key) const {
    const json& v = Required(key);
    if (!v.is_number()) throw ConfigError(Name(key) + ": expected a number");
    return v.get<double>();
  }

  double Number(const std::string& key, double fallback) const {
    return Has(key) ? Number(key) : fallback;
  }

  int64_t Integer(const std::string& key) const {
    const json& v = Required(key);
    if (!v.is_number_integer()) {
      throw ConfigError(Name(key) + ": expected an integer");
    }
    return v.get<int64_t>();
  }

  int64_t Integer(const std::string& key, int64_t fallback) const {
    return Has(key) ? Integer(key) : fallback;
  }

  std::string String(const std::string& key) const {
    const json& v = Required(key);
    if (!v.is_string()) throw ConfigError(Name(key) + ": expected a string");
    return v.get<std::string>();
  }

  std::string String(const std::string& key, std::string fallback) const {
    return Has(key) ? String(key) : fallback;
  }

  std::string Name(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

 private:
  const json& obj_;
  std::string path_;
};

template <typename F>
auto Wrap(const std::string& field, F&& parse) {
  try {
    return parse();
  } catch (const UsageError& e) {
    throw ConfigError(field + ": " + e.what());
  }
}

TaskSpec TaskFromJson(const json& doc, size_t index) {
  const std::string path = "tasks[" + std::to_string(index) + "]";
  Fields f(doc, path,
           {"name", "metric", "cutoff", "epoch_budget", "train_size",
            "dev_size"});
  TaskSpec task;
  task.name = f.String("name");
  task.metric_kind = Wrap(f.Name("metric"),
                          [&] { return ParseMetricKind(f.String("metric")); });
  task.cutoff = f.Number("cutoff");
  task.epoch_budget = static_cast<int>(f.Integer("epoch_budget", 5));
  task.train_size = f.Integer("train_size", 0);
  task.dev_size = f.Integer("dev_size", 0);
  try {
    task.Validate();
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return task;
}

HardwareProfile HardwareFromJson(const json& doc) {
  Fields f(doc, "hardware",
           {"kind", "unit_count", "unit_price_per_hour", "chips_per_unit"});
  HardwareProfile hw;
  hw.kind = Wrap(f.Name("kind"),
                 [&] { return ParseHardwareKind(f.String("kind")); });
  hw.unit_count = f.Integer("unit_count");
  hw.unit_price_per_hour = f.Number("unit_price_per_hour");
  hw.chips_per_unit = f.Integer(
      "chips_per_unit", hw.kind == HardwareKind::kTpuV3 ? 4 : 1);
  hw.Validate();
  return hw;
}

std::map<Phase, ReferenceTable> ReferenceFromJson(const json& doc) {
  if (!doc.is_object()) throw ConfigError("reference: expected an object");
  std::map<Phase, ReferenceTable> out;
  for (const auto& [phase_name, tasks] : doc.items()) {
    const std::string path = "reference." + phase_name;
    const Phase phase =
        Wrap(path, [&] { return ParsePhase(phase_name); });
    if (!tasks.is_object()) throw ConfigError(path + ": expected an object");
    ReferenceTable table;
    for (const auto& [task_name, entry_doc] : tasks.items()) {
      Fields f(entry_doc, path + "." + task_name, {"time", "cost_usd"});
      ReferenceEntry entry;
      entry.time = f.Number("time");
      if (f.Has("cost_usd")) entry.cost_usd = f.Number("cost_usd");
      table.emplace(task_name, entry);
    }
    out.emplace(phase, std::move(table));
  }
  return out;
}

}  // namespace

const TaskSpec* BenchmarkConfig::FindTask(std::string_view name) const {
  for (const TaskSpec& t : tasks) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

void BenchmarkConfig::Validate() const {
  std::set<std::string> names;
  for (const TaskSpec& t : tasks) {
    t.Validate();
    if (!names.insert(t.name).second) {
      throw ConfigError("tasks: duplicate task name '" + t.name + "'");
    }
  }
  if (hardware) hardware->Validate();
  if (reference_model.empty()) {
    throw ConfigError("reference_model: must be nonempty");
  }
  for (const auto& [phase, table] : reference) {
    for (const auto& [task, entry] : table) {
      const std::string path = "reference." + std::string(ToString(phase)) +
                               "." + task;
      if (!names.count(task)) throw ConfigError(path + ": unknown task");
      if (!(entry.time > 0.0)) throw ConfigError(path + ".time: must be > 0");
      if (entry.cost_usd && !(*entry.cost_usd > 0.0)) {
        throw ConfigError(path + ".cost_usd: must be > 0");
      }
    }
  }
  if (!(eval_interval_seconds > 0.0)) {
    throw ConfigError("eval_interval_seconds: must be > 0");
  }
  if (!(idle_timeout_seconds > 0.0)) {
    throw ConfigError("idle_timeout_seconds: must be > 0");
  }
  if (inference_instances < 1) {
    throw ConfigError("inference_instances: must be >= 1");
  }
}

BenchmarkConfig ConfigFromJson(const json& doc) {
  Fields f(doc, "",
           {"tasks", "hardware", "reference_model", "reference",
            "eval_interval_seconds", "seed", "idle_timeout_seconds",
            "inference_instances", "cost_time_source"});
  BenchmarkConfig config;
  const json& tasks = f.Required("tasks");
  if (!tasks.is_array()) throw ConfigError("tasks: expected an array");
  for (size_t i = 0; i < tasks.size(); ++i) {
    config.tasks.push_back(TaskFromJson(tasks[i], i));
  }
  if (f.Has("hardware") && !doc.at("hardware").is_null()) {
    config.hardware = HardwareFromJson(doc.at("hardware"));
  }
  config.reference_model = f.String("reference_model", config.reference_model);
  if (f.Has("reference")) config.reference = ReferenceFromJson(doc["reference"]);
  config.eval_interval_seconds =
      f.Number("eval_interval_seconds", config.eval_interval_seconds);
  if (f.Has("seed")) {
    const json& seed = doc.at("seed");
    if (!seed.is_number_unsigned() && !seed.is_number_integer()) {
      throw ConfigError("seed: expected a nonnegative integer");
    }
    if (seed.is_number_integer() && seed.get<int64_t>() < 0) {
      throw ConfigError("seed: expected a nonnegative integer");
    }
    config.seed = seed.get<uint64_t>();
  }
  config.idle_timeout_seconds =
      f.Number("idle_timeout_seconds", config.idle_timeout_seconds);
  config.inference_instances =
      f.Integer("inference_instances", config.inference_instances);
  const std::string source = f.String("cost_time_source", "metered");
  if (source == "metered") {
    config.cost_time_source = CostTimeSource::kMetered;
  } else if (source == "wall") {
    config.cost_time_source = CostTimeSource::kWall;
  } else {
    throw ConfigError("cost_time_source: expected 'metered' or 'wall'");
  }
  config.Validate();
  return config;
}

json ConfigToJson(const BenchmarkConfig& config) {
  json doc = json::object();
  json tasks = json::array();
  for (const TaskSpec& t : config.tasks) {
    tasks.push_back({{"name", t.name},
                     {"metric", ToString(t.metric_kind)},
                     {"cutoff", t.cutoff},
                     {"epoch_budget", t.epoch_budget},
                     {"train_size", t.train_size},
                     {"dev_size", t.dev_size}});
  }
  doc["tasks"] = std::move(tasks);
  if (config.hardware) {
    const HardwareProfile& hw = *config.hardware;
    doc["hardware"] = {{"kind", ToString(hw.kind)},
                       {"unit_count", hw.unit_count},
                       {"unit_price_per_hour", hw.unit_price_per_hour},
                       {"chips_per_unit", hw.chips_per_unit}};
  }
  doc["reference_model"] = config.reference_model;
  json reference = json::object();
  for (const auto& [phase, table] : config.reference) {
    json entries = json::object();
    for (const auto& [task, entry] : table) {
      json e = {{"time", entry.time}};
      if (entry.cost_usd) e["cost_usd"] = *entry.cost_usd;
      entries[task] = std::move(e);
    }
    reference[std::string(ToString(phase))] = std::move(entries);
  }
  doc["reference"] = std::move(reference);
  doc["eval_interval_seconds"] = config.eval_interval_seconds;
  doc["seed"] = config.seed;
  doc["idle_timeout_seconds"] = config.idle_timeout_seconds;
  doc["inference_instances"] = config.inference_instances;
  doc["cost_time_source"] =
      config.cost_time_source == CostTimeSource::kWall ? "wall" : "metered";
  return doc;
}

BenchmarkConfig ParseConfig(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return ConfigFromJson(doc);
}

std::string SerializeConfig(const BenchmarkConfig& config) {
  return ConfigToJson(config).dump(2) + "\n";
}

BenchmarkConfig LoadConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return ParseConfig(buffer.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

BenchmarkConfig DefaultConfig() {
  BenchmarkConfig config;
  config.tasks = {
      {"conll2003", MetricKind::kEntityF1, 91.0, 5, 14041, 3250},
      {"mnli", MetricKind::kMnliAvgAccuracy, 85.0, 5, 392702, 19647},
      {"sst2", MetricKind::kAccuracy, 90.0, 5, 67349, 872},
  };
  config.hardware = HardwareProfile::GpuV100(1);
  config.reference_model = "BERT_LARGE";
  config.reference[Phase::kFinetune] = {
      {"conll2003", {90.26, std::nullopt}},
      {"sst2", {92.45, std::nullopt}},
      {"mnli", {9106.72, std::nullopt}},
  };
  config.reference[Phase::kInference] = {
      {"conll2003", {8.51, std::nullopt}},
      {"sst2", {8.46, std::nullopt}},
      {"mnli", {8.53, std::nullopt}},
  };
  return config;
}

}  // namespace effbench
