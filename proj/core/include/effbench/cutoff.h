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

#ifndef EFFBENCH_CUTOFF_H_
#define EFFBENCH_CUTOFF_H_

#include <optional>

#include "effbench/types.h"

namespace effbench {

/// First point whose metric is >= task.cutoff (no epsilon). Always run this
/// on the raw series; smoothing can move the crossing.
std::optional<CrossingPoint> DetectCrossing(const MeasurementSeries& series,
                                            const TaskSpec& task);

/// True iff the run consumed its epoch budget without crossing the cutoff.
bool BudgetExhausted(const MeasurementSeries& series, const TaskSpec& task);

/// Centered moving average over `window` points, truncated at the edges.
/// Elapsed and epoch values are left untouched. Throws UsageError for an
/// even or nonpositive window.
MeasurementSeries Smooth(const MeasurementSeries& series, int window = 3);

}  // namespace effbench

#endif  // EFFBENCH_CUTOFF_H_
