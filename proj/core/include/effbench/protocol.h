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
/// \brief Line-delimited JSON event protocol spoken by trainer processes,
/// and the per-run session state machine that consumes it.
///
/// Trainer -> harness: one JSON object per line on stdout with a required
/// `kind`. Blank lines and lines starting with `#` are ignored. Harness ->
/// trainer: the single-word commands `begin` and `abort` on stdin.

#ifndef EFFBENCH_PROTOCOL_H_
#define EFFBENCH_PROTOCOL_H_

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include "effbench/metering.h"
#include "effbench/types.h"

namespace effbench {

inline constexpr std::string_view kBeginCommand = "begin";
inline constexpr std::string_view kAbortCommand = "abort";

class ProtocolError : public std::runtime_error {
 public:
  ProtocolError(const std::string& what, size_t byte_offset)
      : std::runtime_error(what), byte_offset_(byte_offset) {}
  size_t byte_offset() const { return byte_offset_; }

 private:
  size_t byte_offset_;
};

enum class EventKind {
  kHello,
  kStep,
  kEvalBegin,
  kEval,
  kEpoch,
  kCheckpoint,
  kPredictionDump,
  kDone,
  kFatal,
};

std::string_view ToString(EventKind kind);

enum class DoneReason { kBudgetExhausted, kExternalStop, kCompleted };

std::string_view ToString(DoneReason reason);

struct HelloEvent {
  std::string model_name;
  Phase phase = Phase::kFinetune;
  std::string task_name;
  std::optional<double> params_millions;
  friend bool operator==(const HelloEvent&, const HelloEvent&) = default;
};
struct StepEvent {
  int64_t step_index = 0;
  friend bool operator==(const StepEvent&, const StepEvent&) = default;
};
struct EvalBeginEvent {
  friend bool operator==(const EvalBeginEvent&,
                         const EvalBeginEvent&) = default;
};
struct EvalEvent {
  double metric_value = 0.0;
  double epoch_fraction = 0.0;
  friend bool operator==(const EvalEvent&, const EvalEvent&) = default;
};
struct EpochEvent {
  int64_t epoch_index = 0;
  friend bool operator==(const EpochEvent&, const EpochEvent&) = default;
};
struct CheckpointEvent {
  int64_t step_index = 0;
  std::string checkpoint_id;
  friend bool operator==(const CheckpointEvent&,
                         const CheckpointEvent&) = default;
};
struct PredictionDumpEvent {
  std::string path;
  friend bool operator==(const PredictionDumpEvent&,
                         const PredictionDumpEvent&) = default;
};
struct DoneEvent {
  DoneReason reason = DoneReason::kCompleted;
  friend bool operator==(const DoneEvent&, const DoneEvent&) = default;
};
struct FatalEvent {
  std::string message;
  friend bool operator==(const FatalEvent&, const FatalEvent&) = default;
};

/// \brief One decoded trainer event.
///
/// `sim_seconds` is an optional extension field carrying a simulated
/// timestamp; the harness uses it only when running on simulated time.
struct TrainerEvent {
  std::variant<HelloEvent, StepEvent, EvalBeginEvent, EvalEvent, EpochEvent,
               CheckpointEvent, PredictionDumpEvent, DoneEvent, FatalEvent>
      body;
  std::optional<double> sim_seconds;

  EventKind kind() const { return static_cast<EventKind>(body.index()); }

  friend bool operator==(const TrainerEvent&, const TrainerEvent&) = default;
};

/// Decodes one line. Returns nullopt for blank and `#` comment lines.
/// Unknown fields are ignored; unknown kinds, malformed JSON and missing
/// fields throw ProtocolError.
std::optional<TrainerEvent> ParseEvent(std::string_view line);

/// Encodes one event as a single JSON line without the trailing newline.
/// Field order is fixed, so equal events always encode to equal bytes.
std::string SerializeEvent(const TrainerEvent& event);

enum class SessionPhase {
  kAwaitingHello,
  kRunning,
  kEvaluating,
  kFinished,
  kFailed,
};

std::string_view ToString(SessionPhase phase);

/// \brief Accumulated state of one trainer session.
struct SessionState {
  SessionPhase phase = SessionPhase::kAwaitingHello;
  int64_t last_step = -1;
  int64_t step_count = 0;
  MeasurementSeries series;
  std::optional<HelloEvent> hello;
  std::optional<PhaseTimer> timer;
  std::optional<Seconds> last_event_at;
  // Series point index -> prediction dump announced after that eval.
  std::map<size_t, std::string> prediction_dumps;
  std::optional<DoneReason> done_reason;
  double max_epoch = 0.0;
  TimerReading final_reading;
  std::string diagnostic;

  bool terminal() const {
    return phase == SessionPhase::kFinished || phase == SessionPhase::kFailed;
  }
};

SessionState NewSession(MetricKind metric_kind);

/// Applies one event observed at monotonic time `at`. Protocol violations
/// move the session to kFailed with a diagnostic; calling this on a terminal
/// session throws UsageError.
SessionState Advance(SessionState state, const TrainerEvent& event,
                     Seconds at);

/// Forces a live session into kFailed (idle timeout, broken pipe, ...).
SessionState Fail(SessionState state, std::string diagnostic, Seconds at);

}  // namespace effbench

#endif  // EFFBENCH_PROTOCOL_H_
