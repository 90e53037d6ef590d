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

#include "effbench/protocol.h"

#include <array>
#include <cmath>
#include <utility>

#include <nlohmann/json.hpp>

namespace effbench {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr std::array<std::string_view, 9> kKindNames = {
    "hello", "step",            "eval_begin", "eval",  "epoch",
    "checkpoint", "prediction_dump", "done",       "fatal"};

constexpr std::array<std::string_view, 3> kReasonNames = {
    "budget_exhausted", "external_stop", "completed"};

const json& Field(const json& doc, const char* name, EventKind kind) {
  auto it = doc.find(name);
  if (it == doc.end()) {
    throw ProtocolError(std::string(ToString(kind)) +
                            ": missing required field '" + name + "'",
                        0);
  }
  return *it;
}

double NumberField(const json& doc, const char* name, EventKind kind) {
  const json& v = Field(doc, name, kind);
  if (!v.is_number()) {
    throw ProtocolError(std::string(ToString(kind)) + ": field '" + name +
                            "' must be a number",
                        0);
  }
  return v.get<double>();
}

int64_t IntegerField(const json& doc, const char* name, EventKind kind) {
  const json& v = Field(doc, name, kind);
  if (!v.is_number_integer()) {
    throw ProtocolError(std::string(ToString(kind)) + ": field '" + name +
                            "' must be an integer",
                        0);
  }
  return v.get<int64_t>();
}

std::string StringField(const json& doc, const char* name, EventKind kind) {
  const json& v = Field(doc, name, kind);
  if (!v.is_string()) {
    throw ProtocolError(std::string(ToString(kind)) + ": field '" + name +
                            "' must be a string",
                        0);
  }
  return v.get<std::string>();
}

SessionState Failed(SessionState state, std::string diagnostic) {
  state.phase = SessionPhase::kFailed;
  state.diagnostic = std::move(diagnostic);
  return state;
}

}  // namespace

std::string_view ToString(EventKind kind) {
  return kKindNames[static_cast<size_t>(kind)];
}

std::string_view ToString(DoneReason reason) {
  return kReasonNames[static_cast<size_t>(reason)];
}

std::string_view ToString(SessionPhase phase) {
  switch (phase) {
    case SessionPhase::kAwaitingHello:
      return "awaiting_hello";
    case SessionPhase::kRunning:
      return "running";
    case SessionPhase::kEvaluating:
      return "evaluating";
    case SessionPhase::kFinished:
      return "finished";
    case SessionPhase::kFailed:
      return "failed";
  }
  return "?";
}

std::optional<TrainerEvent> ParseEvent(std::string_view line) {
  size_t first = 0;
  while (first < line.size() &&
         (line[first] == ' ' || line[first] == '\t' || line[first] == '\r' ||
          line[first] == '\n')) {
    ++first;
  }
  if (first == line.size() || line[first] == '#') return std::nullopt;

  json doc;
  try {
    doc = json::parse(line);
  } catch (const json::parse_error& e) {
    // nlohmann reports a 1-based position of the offending byte.
    const size_t offset = e.byte > 0 ? e.byte - 1 : 0;
    throw ProtocolError("malformed record at byte " + std::to_string(offset),
                        offset);
  }
  if (!doc.is_object()) throw ProtocolError("record is not an object", first);
  auto kind_it = doc.find("kind");
  if (kind_it == doc.end() || !kind_it->is_string()) {
    throw ProtocolError("record has no string 'kind'", first);
  }
  const std::string kind_name = kind_it->get<std::string>();
  size_t kind_index = kKindNames.size();
  for (size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == kind_name) kind_index = i;
  }
  if (kind_index == kKindNames.size()) {
    throw ProtocolError("unknown event kind '" + kind_name + "'", first);
  }
  const auto kind = static_cast<EventKind>(kind_index);

  TrainerEvent event;
  switch (kind) {
    case EventKind::kHello: {
      HelloEvent hello;
      hello.model_name = StringField(doc, "model_name", kind);
      try {
        hello.phase = ParsePhase(StringField(doc, "phase", kind));
      } catch (const UsageError& e) {
        throw ProtocolError(std::string("hello: ") + e.what(), 0);
      }
      hello.task_name = StringField(doc, "task_name", kind);
      if (doc.contains("params_millions") && !doc["params_millions"].is_null()) {
        hello.params_millions = NumberField(doc, "params_millions", kind);
      }
      event.body = std::move(hello);
      break;
    }
    case EventKind::kStep:
      event.body = StepEvent{IntegerField(doc, "step_index", kind)};
      break;
    case EventKind::kEvalBegin:
      event.body = EvalBeginEvent{};
      break;
    case EventKind::kEval:
      event.body = EvalEvent{NumberField(doc, "metric_value", kind),
                             NumberField(doc, "epoch_fraction", kind)};
      break;
    case EventKind::kEpoch:
      event.body = EpochEvent{IntegerField(doc, "epoch_index", kind)};
      break;
    case EventKind::kCheckpoint:
      event.body = CheckpointEvent{IntegerField(doc, "step_index", kind),
                                   StringField(doc, "checkpoint_id", kind)};
      break;
    case EventKind::kPredictionDump:
      event.body = PredictionDumpEvent{StringField(doc, "path", kind)};
      break;
    case EventKind::kDone: {
      const std::string reason = StringField(doc, "reason", kind);
      size_t r = kReasonNames.size();
      for (size_t i = 0; i < kReasonNames.size(); ++i) {
        if (kReasonNames[i] == reason) r = i;
      }
      if (r == kReasonNames.size()) {
        throw ProtocolError("done: unknown reason '" + reason + "'", 0);
      }
      event.body = DoneEvent{static_cast<DoneReason>(r)};
      break;
    }
    case EventKind::kFatal:
      event.body = FatalEvent{StringField(doc, "message", kind)};
      break;
  }
  if (doc.contains("sim_seconds")) {
    event.sim_seconds = NumberField(doc, "sim_seconds", kind);
  }
  return event;
}

std::string SerializeEvent(const TrainerEvent& event) {
  ordered_json doc;
  doc["kind"] = ToString(event.kind());
  std::visit(
      [&doc](const auto& body) {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, HelloEvent>) {
          doc["model_name"] = body.model_name;
          doc["phase"] = ToString(body.phase);
          doc["task_name"] = body.task_name;
          if (body.params_millions) {
            doc["params_millions"] = *body.params_millions;
          }
        } else if constexpr (std::is_same_v<T, StepEvent>) {
          doc["step_index"] = body.step_index;
        } else if constexpr (std::is_same_v<T, EvalEvent>) {
          doc["metric_value"] = body.metric_value;
          doc["epoch_fraction"] = body.epoch_fraction;
        } else if constexpr (std::is_same_v<T, EpochEvent>) {
          doc["epoch_index"] = body.epoch_index;
        } else if constexpr (std::is_same_v<T, CheckpointEvent>) {
          doc["step_index"] = body.step_index;
          doc["checkpoint_id"] = body.checkpoint_id;
        } else if constexpr (std::is_same_v<T, PredictionDumpEvent>) {
          doc["path"] = body.path;
        } else if constexpr (std::is_same_v<T, DoneEvent>) {
          doc["reason"] = ToString(body.reason);
        } else if constexpr (std::is_same_v<T, FatalEvent>) {
          doc["message"] = body.message;
        }
      },
      event.body);
  if (event.sim_seconds) doc["sim_seconds"] = *event.sim_seconds;
  return doc.dump();
}

SessionState NewSession(MetricKind metric_kind) {
  SessionState state;
  state.series.metric_kind = metric_kind;
  return state;
}

SessionState Fail(SessionState state, std::string diagnostic, Seconds at) {
  if (state.terminal()) return state;
  if (state.timer) {
    state.final_reading =
        state.timer->ReadAt(std::max(at, state.timer->started_at()));
  }
  return Failed(std::move(state), std::move(diagnostic));
}

SessionState Advance(SessionState state, const TrainerEvent& event,
                     Seconds at) {
  if (state.terminal()) {
    throw UsageError("advance: session is " +
                     std::string(ToString(state.phase)));
  }
  const EventKind kind = event.kind();
  const std::string kind_name(ToString(kind));

  if (state.last_event_at && at < *state.last_event_at) {
    return Fail(std::move(state), kind_name + ": timestamp went backwards", at);
  }
  state.last_event_at = at;

  if (state.phase == SessionPhase::kAwaitingHello) {
    if (kind == EventKind::kFatal) {
      return Fail(std::move(state),
                    "trainer fatal: " + std::get<FatalEvent>(event.body).message, at);
    }
    if (kind != EventKind::kHello) {
      return Fail(std::move(state), kind_name + " before hello", at);
    }
    state.hello = std::get<HelloEvent>(event.body);
    state.timer = PhaseTimer::StartAt(state.hello->phase, at);
    state.phase = SessionPhase::kRunning;
    return state;
  }

  const bool evaluating = state.phase == SessionPhase::kEvaluating;
  switch (kind) {
    case EventKind::kHello:
      return Fail(std::move(state), "duplicate hello", at);

    case EventKind::kStep: {
      if (evaluating) {
        return Fail(std::move(state), "step during evaluation", at);
      }
      const int64_t index = std::get<StepEvent>(event.body).step_index;
      if (index <= state.last_step) {
        return Fail(std::move(state),
                      "step_index " + std::to_string(index) +
                          " not greater than " +
                          std::to_string(state.last_step), at);
      }
      state.last_step = index;
      ++state.step_count;
      return state;
    }

    case EventKind::kEvalBegin:
      if (evaluating) return Fail(std::move(state), "nested eval_begin", at);
      state.timer->PauseAt(at);
      state.phase = SessionPhase::kEvaluating;
      return state;

    case EventKind::kEval: {
      const auto& eval = std::get<EvalEvent>(event.body);
      const double max = MetricScaleMax(state.series.metric_kind);
      if (!std::isfinite(eval.metric_value) || eval.metric_value < 0.0 ||
          eval.metric_value > max) {
        return Fail(std::move(state), "eval metric_value out of range", at);
      }
      if (!std::isfinite(eval.epoch_fraction) || eval.epoch_fraction < 0.0) {
        return Fail(std::move(state), "eval epoch_fraction invalid", at);
      }
      if (evaluating) state.timer->ResumeAt(at);
      state.phase = SessionPhase::kRunning;
      const TimerReading reading = state.timer->ReadAt(at);
      MeasurementPoint point{reading.metered_seconds, eval.metric_value,
                             eval.epoch_fraction, reading.wall_seconds};
      if (!state.series.points.empty()) {
        const MeasurementPoint& prev = state.series.points.back();
        if (!(point.elapsed_seconds > prev.elapsed_seconds)) {
          return Fail(std::move(state), "eval elapsed not increasing", at);
        }
        if (point.epoch_fraction < prev.epoch_fraction) {
          return Fail(std::move(state), "eval epoch_fraction decreased", at);
        }
      }
      state.series.points.push_back(point);
      state.max_epoch = std::max(state.max_epoch, eval.epoch_fraction);
      return state;
    }

    case EventKind::kEpoch: {
      if (evaluating) {
        return Fail(std::move(state), "epoch during evaluation", at);
      }
      const int64_t index = std::get<EpochEvent>(event.body).epoch_index;
      if (index < 0) return Fail(std::move(state), "negative epoch_index", at);
      state.max_epoch = std::max(state.max_epoch, static_cast<double>(index));
      return state;
    }

    case EventKind::kCheckpoint:
      if (std::get<CheckpointEvent>(event.body).step_index < 0) {
        return Fail(std::move(state), "negative checkpoint step_index", at);
      }
      return state;

    case EventKind::kPredictionDump:
      if (state.series.points.empty()) {
        return Fail(std::move(state), "prediction_dump before any eval", at);
      }
      state.prediction_dumps[state.series.points.size() - 1] =
          std::get<PredictionDumpEvent>(event.body).path;
      return state;

    case EventKind::kDone:
      state.done_reason = std::get<DoneEvent>(event.body).reason;
      state.final_reading = state.timer->FinishAt(at);
      state.phase = SessionPhase::kFinished;
      return state;

    case EventKind::kFatal: {
      const std::string message = std::get<FatalEvent>(event.body).message;
      return Fail(std::move(state), "trainer fatal: " + message, at);
    }
  }
  return state;
}

}  // namespace effbench
