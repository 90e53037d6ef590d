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
/// \brief Phase timers and the hardware cost model.

#ifndef EFFBENCH_METERING_H_
#define EFFBENCH_METERING_H_

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "effbench/types.h"

namespace effbench {

/// Monotonic timestamps and durations, in seconds from an arbitrary origin.
using Seconds = std::chrono::duration<double>;

/// \brief Injectable monotonic time source. Now() must be safe to call
/// concurrently.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual Seconds Now() const = 0;
};

class SteadyClock final : public Clock {
 public:
  Seconds Now() const override;
};

/// \brief Manually driven clock for tests. Time never moves backwards.
class FakeClock final : public Clock {
 public:
  explicit FakeClock(Seconds start = Seconds(0)) : now_(start) {}
  Seconds Now() const override { return now_; }
  void Advance(Seconds delta);
  void Set(Seconds t);

 private:
  Seconds now_;
};

struct TimerReading {
  double metered_seconds = 0.0;
  double wall_seconds = 0.0;
};

/// \brief Meters one phase: wall time minus the paused (dev-evaluation)
/// intervals.
///
/// Every transition has an explicit-timestamp form (`...At`) used by the
/// session state machine, and a clock-driven form for callers that own a
/// Clock. Illegal transitions throw UsageError naming the current state.
class PhaseTimer {
 public:
  enum class State { kRunning, kPaused, kFinished };

  /// Starts at clock.Now(). The clock must outlive the timer.
  PhaseTimer(Phase phase, const Clock& clock);
  /// Starts at `at`; only the `...At` transitions are usable.
  static PhaseTimer StartAt(Phase phase, Seconds at);

  void Pause();
  void Resume();
  TimerReading Finish();

  void PauseAt(Seconds at);
  void ResumeAt(Seconds at);
  TimerReading FinishAt(Seconds at);

  /// Reading as of `at` without changing state. While paused, the open pause
  /// counts as excluded time.
  TimerReading ReadAt(Seconds at) const;

  Phase phase() const { return phase_; }
  State state() const { return state_; }
  Seconds started_at() const { return started_at_; }
  const std::vector<std::pair<Seconds, Seconds>>& paused_intervals() const {
    return paused_;
  }

 private:
  PhaseTimer(Phase phase, const Clock* clock, Seconds at);
  Seconds ClockNow(std::string_view op) const;
  void CheckTime(Seconds at, std::string_view op) const;

  Phase phase_;
  const Clock* clock_;
  State state_ = State::kRunning;
  Seconds started_at_;
  Seconds last_event_;
  std::optional<Seconds> pause_start_;
  std::vector<std::pair<Seconds, Seconds>> paused_;
  Seconds paused_total_{0};
  std::optional<TimerReading> final_;
};

std::string_view ToString(PhaseTimer::State state);

/// USD for running `duration_hours` on `profile`. TPU and custom profiles
/// bill unit_count / chips_per_unit groups; GPU profiles bill per device.
double ComputeCost(double duration_hours, const HardwareProfile& profile);

/// "$61,440.00" style formatting with thousands separators; `decimals` in
/// [0, 6], rounded half away from zero.
std::string FormatUsd(double usd, int decimals = 2);

/// A pretraining-cost row as reported in the literature. Rows whose billing
/// unit is well defined carry a profile and can be recomputed.
struct ReportedPretraining {
  std::string model;
  std::string hardware;
  std::optional<double> duration_hours;
  std::optional<double> reported_cost_usd;
  std::optional<HardwareProfile> profile;
  double params_millions = 0.0;
};

const std::vector<ReportedPretraining>& ReportedPretrainingCosts();

}  // namespace effbench

#endif  // EFFBENCH_METERING_H_
