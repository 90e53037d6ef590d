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

// Independent reference implementations used to check the library.

#ifndef EFFBENCH_TESTS_SUPPORT_ORACLES_H_
#define EFFBENCH_TESTS_SUPPORT_ORACLES_H_

#include <random>
#include <string>
#include <vector>

#include "effbench/types.h"

namespace effbench::testing {

// Time at which m_inf * (1 - exp(-t / tau)) first reaches `cutoff`, found
// by bisection to within `tolerance` seconds. Requires cutoff < m_inf.
double BisectCrossingTime(double m_inf, double tau, double cutoff,
                          double tolerance = 1e-9);

// Micro-averaged exact-span F1 (in [0, 100]) by enumerating every
// (start, end, type) interval of every sentence and testing membership
// directly against the tag sequence.
double OracleEntityF1(const std::vector<std::vector<std::string>>& predicted,
                      const std::vector<std::vector<std::string>>& gold);

// Random BIO tag sequence over `types`, including bare I- starts and type
// switches inside runs.
std::vector<std::string> RandomBioSequence(std::mt19937_64& rng, size_t length,
                                           const std::vector<std::string>& types);

// Cost accumulated one second at a time from an hourly rate.
double AccumulatedCost(double hours, const HardwareProfile& profile);

}  // namespace effbench::testing

#endif  // EFFBENCH_TESTS_SUPPORT_ORACLES_H_
