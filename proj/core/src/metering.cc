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

#include "effbench/metering.h"

#include <cmath>
#include <cstdio>
#include <string>

namespace effbench {

Seconds SteadyClock::Now() const {
  return std::chrono::duration_cast<Seconds>(
      std::chrono::steady_clock::now().time_since_epoch());
}

void FakeClock::Advance(Seconds delta) {
  if (delta.count() < 0) throw UsageError("FakeClock cannot move backwards");
  now_ += delta;
}

void FakeClock::Set(Seconds t) {
  if (t < now_) throw UsageError("FakeClock cannot move backwards");
  now_ = t;
}

std::string_view ToString(PhaseTimer::State state) {
  switch (state) {
    case PhaseTimer::State::kRunning:
      return "running";
    case PhaseTimer::State::kPaused:
      return "paused";
    case PhaseTimer::State::kFinished:
      return "finished";
  }
  return "?";
}

PhaseTimer::PhaseTimer(Phase phase, const Clock* clock, Seconds at)
    : phase_(phase), clock_(clock), started_at_(at), last_event_(at) {}

PhaseTimer::PhaseTimer(Phase phase, const Clock& clock)
    : PhaseTimer(phase, &clock, clock.Now()) {}

PhaseTimer PhaseTimer::StartAt(Phase phase, Seconds at) {
  return PhaseTimer(phase, nullptr, at);
}

Seconds PhaseTimer::ClockNow(std::string_view op) const {
  if (clock_ == nullptr) {
    throw UsageError(std::string(op) + ": timer has no clock; use " +
                     std::string(op) + "At");
  }
  return clock_->Now();
}

void PhaseTimer::CheckTime(Seconds at, std::string_view op) const {
  if (at < last_event_) {
    throw UsageError(std::string(op) + ": timestamp earlier than the " +
                     "previous timer event");
  }
}

void PhaseTimer::Pause() { PauseAt(ClockNow("pause")); }
void PhaseTimer::Resume() { ResumeAt(ClockNow("resume")); }
TimerReading PhaseTimer::Finish() { return FinishAt(ClockNow("finish")); }

void PhaseTimer::PauseAt(Seconds at) {
  if (state_ != State::kRunning) {
    throw UsageError("pause: timer is " + std::string(ToString(state_)));
  }
  CheckTime(at, "pause");
  pause_start_ = at;
  last_event_ = at;
  state_ = State::kPaused;
}

void PhaseTimer::ResumeAt(Seconds at) {
  if (state_ != State::kPaused) {
    throw UsageError("resume: timer is " + std::string(ToString(state_)));
  }
  CheckTime(at, "resume");
  paused_.emplace_back(*pause_start_, at);
  paused_total_ += at - *pause_start_;
  pause_start_.reset();
  last_event_ = at;
  state_ = State::kRunning;
}

TimerReading PhaseTimer::FinishAt(Seconds at) {
  if (state_ == State::kFinished) {
    throw UsageError("finish: timer is finished");
  }
  CheckTime(at, "finish");
  if (state_ == State::kPaused) ResumeAt(at);
  final_ = ReadAt(at);
  last_event_ = at;
  state_ = State::kFinished;
  return *final_;
}

TimerReading PhaseTimer::ReadAt(Seconds at) const {
  if (final_) return *final_;
  if (at < last_event_) at = last_event_;
  Seconds paused = paused_total_;
  if (pause_start_) paused += at - *pause_start_;
  const double wall = (at - started_at_).count();
  const double metered = std::max(0.0, wall - paused.count());
  return {metered, wall};
}

double ComputeCost(double duration_hours, const HardwareProfile& profile) {
  const double units =
      profile.kind == HardwareKind::kGpuV100
          ? static_cast<double>(profile.unit_count)
          : static_cast<double>(profile.unit_count) /
                static_cast<double>(profile.chips_per_unit);
  return duration_hours * units * profile.unit_price_per_hour;
}

std::string FormatUsd(double usd, int decimals) {
  if (decimals < 0 || decimals > 6) throw UsageError("FormatUsd: decimals");
  const bool negative = usd < 0;
  const double scale = std::pow(10.0, decimals);
  // Nudge so values like 2203.2 * 100 land on the intended integer.
  const double scaled = std::floor(std::fabs(usd) * scale + 0.5 + 1e-7);
  const auto whole = static_cast<long long>(scaled / scale);
  const auto frac = static_cast<long long>(scaled - whole * scale + 0.5);

  std::string digits = std::to_string(whole);
  std::string grouped;
  for (size_t i = 0; i < digits.size(); ++i) {
    if (i > 0 && (digits.size() - i) % 3 == 0) grouped.push_back(',');
    grouped.push_back(digits[i]);
  }
  std::string out = negative ? "-$" : "$";
  out += grouped;
  if (decimals > 0) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), ".%0*lld", decimals, frac);
    out += buf;
  }
  return out;
}

const std::vector<ReportedPretraining>& ReportedPretrainingCosts() {
  // BERT rows are billed in "TPU Pods", a unit the source never prices, so
  // they are kept as literal reported values only.
  static const std::vector<ReportedPretraining> kRows = {
      {"BERT_BASE", "4 TPU Pods", 96.0, 1728.0, std::nullopt, 108},
      {"BERT_LARGE", "16 TPU Pods", 96.0, 6912.0, std::nullopt, 334},
      {"XLNet_BASE", "", std::nullopt, std::nullopt, std::nullopt, 117},
      {"XLNet_LARGE", "512 TPU v3", 60.0, 61440.0, HardwareProfile::TpuV3(512),
       361},
      {"RoBERTa_BASE", "1024 V100 GPUs", 24.0, 75203.0,
       HardwareProfile::GpuV100(1024), 125},
      {"RoBERTa_LARGE", "1024 V100 GPUs", 24.0, 75203.0,
       HardwareProfile::GpuV100(1024), 356},
      {"ALBERT_BASE", "64 TPU v3", std::nullopt, std::nullopt, std::nullopt,
       12},
      {"ALBERT_LARGE", "", std::nullopt, std::nullopt, std::nullopt, 18},
      {"ALBERT_XLARGE", "", std::nullopt, std::nullopt, std::nullopt, 59},
      {"ALBERT_XXLARGE", "1024 TPU v3", 32.0, 65536.0,
       HardwareProfile::TpuV3(1024), 223},
      {"DistilBERT", "8x16G V100 GPU", 90.0, 2203.2, HardwareProfile::GpuV100(8),
       66},
  };
  return kRows;
}

}  // namespace effbench
