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

#include "effbench/cutoff.h"

#include <algorithm>
#include <string>

namespace effbench {

std::optional<CrossingPoint> DetectCrossing(const MeasurementSeries& series,
                                            const TaskSpec& task) {
  for (const MeasurementPoint& p : series.points) {
    if (p.metric_value >= task.cutoff) {
      return CrossingPoint{p.elapsed_seconds, p.metric_value};
    }
  }
  return std::nullopt;
}

bool BudgetExhausted(const MeasurementSeries& series, const TaskSpec& task) {
  if (series.points.empty()) return false;
  if (DetectCrossing(series, task)) return false;
  return series.MaxEpochFraction() >= task.epoch_budget;
}

MeasurementSeries Smooth(const MeasurementSeries& series, int window) {
  if (window < 1 || window % 2 == 0) {
    throw UsageError("smooth: window must be odd and >= 1, got " +
                     std::to_string(window));
  }
  MeasurementSeries out = series;
  const auto n = static_cast<std::ptrdiff_t>(series.points.size());
  const std::ptrdiff_t half = window / 2;
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - half);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, i + half);
    double sum = 0.0;
    for (std::ptrdiff_t j = lo; j <= hi; ++j) {
      sum += series.points[j].metric_value;
    }
    out.points[i].metric_value = sum / static_cast<double>(hi - lo + 1);
  }
  return out;
}

}  // namespace effbench
