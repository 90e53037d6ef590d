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

#include "oracles.h"

#include <cmath>
#include <stdexcept>

namespace effbench::testing {

double BisectCrossingTime(double m_inf, double tau, double cutoff,
                          double tolerance) {
  if (!(cutoff < m_inf)) throw std::invalid_argument("unreachable cutoff");
  auto f = [&](double t) { return m_inf * (1.0 - std::exp(-t / tau)); };
  double lo = 0.0;
  double hi = tau;
  while (f(hi) < cutoff) hi *= 2.0;
  while (hi - lo > tolerance) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) >= cutoff) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

namespace {

bool IsTag(const std::string& tag, char prefix, const std::string& type) {
  return tag.size() == type.size() + 2 && tag[0] == prefix && tag[1] == '-' &&
         tag.compare(2, std::string::npos, type) == 0;
}

bool Continues(const std::string& tag, const std::string& type) {
  return IsTag(tag, 'B', type) || IsTag(tag, 'I', type);
}

// True when [start, end] (inclusive) of `type` is an entity of `tags`.
bool IsEntity(const std::vector<std::string>& tags, size_t start, size_t end,
              const std::string& type) {
  const bool opens =
      IsTag(tags[start], 'B', type) ||
      (IsTag(tags[start], 'I', type) &&
       (start == 0 || !Continues(tags[start - 1], type)));
  if (!opens) return false;
  for (size_t k = start + 1; k <= end; ++k) {
    if (!IsTag(tags[k], 'I', type)) return false;
  }
  return end + 1 == tags.size() || !IsTag(tags[end + 1], 'I', type);
}

std::vector<std::string> TypesIn(const std::vector<std::string>& a,
                                 const std::vector<std::string>& b) {
  std::vector<std::string> types;
  for (const auto* seq : {&a, &b}) {
    for (const std::string& tag : *seq) {
      if (tag == "O") continue;
      const std::string type = tag.substr(2);
      bool seen = false;
      for (const std::string& t : types) seen = seen || t == type;
      if (!seen) types.push_back(type);
    }
  }
  return types;
}

}  // namespace

double OracleEntityF1(const std::vector<std::vector<std::string>>& predicted,
                      const std::vector<std::vector<std::string>>& gold) {
  if (predicted.size() != gold.size()) {
    throw std::invalid_argument("sentence count mismatch");
  }
  double n_pred = 0.0;
  double n_gold = 0.0;
  double n_both = 0.0;
  for (size_t s = 0; s < gold.size(); ++s) {
    const auto& p = predicted[s];
    const auto& g = gold[s];
    if (p.size() != g.size()) throw std::invalid_argument("length mismatch");
    for (const std::string& type : TypesIn(p, g)) {
      for (size_t i = 0; i < g.size(); ++i) {
        for (size_t j = i; j < g.size(); ++j) {
          const bool in_p = IsEntity(p, i, j, type);
          const bool in_g = IsEntity(g, i, j, type);
          n_pred += in_p;
          n_gold += in_g;
          n_both += in_p && in_g;
        }
      }
    }
  }
  if (n_both == 0.0) return 0.0;
  const double precision = n_both / n_pred;
  const double recall = n_both / n_gold;
  return 100.0 * 2.0 * precision * recall / (precision + recall);
}

std::vector<std::string> RandomBioSequence(
    std::mt19937_64& rng, size_t length, const std::vector<std::string>& types) {
  std::uniform_int_distribution<int> kind(0, 2);
  std::uniform_int_distribution<size_t> pick(0, types.size() - 1);
  std::vector<std::string> tags;
  tags.reserve(length);
  for (size_t i = 0; i < length; ++i) {
    switch (kind(rng)) {
      case 0:
        tags.push_back("O");
        break;
      case 1:
        tags.push_back("B-" + types[pick(rng)]);
        break;
      default:
        tags.push_back("I-" + types[pick(rng)]);
        break;
    }
  }
  return tags;
}

double AccumulatedCost(double hours, const HardwareProfile& profile) {
  const double units = profile.kind == HardwareKind::kGpuV100
                           ? static_cast<double>(profile.unit_count)
                           : static_cast<double>(profile.unit_count) /
                                 static_cast<double>(profile.chips_per_unit);
  const double per_second = units * profile.unit_price_per_hour / 3600.0;
  const auto whole_seconds = static_cast<int64_t>(std::floor(hours * 3600.0));
  long double total = 0.0L;
  for (int64_t s = 0; s < whole_seconds; ++s) total += per_second;
  total += per_second * (hours * 3600.0 - static_cast<double>(whole_seconds));
  return static_cast<double>(total);
}

}  // namespace effbench::testing
