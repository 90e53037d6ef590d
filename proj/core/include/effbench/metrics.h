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
/// \brief Task metrics recomputed from dev-set prediction files.
///
/// All metrics are percentages in [0, 100].

#ifndef EFFBENCH_METRICS_H_
#define EFFBENCH_METRICS_H_

#include <cstdint>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "effbench/types.h"

namespace effbench {

double Accuracy(std::span<const std::string> predictions,
                std::span<const std::string> gold);

double MnliAvgAccuracy(double matched_accuracy, double mismatched_accuracy);

/// Inclusive token range [start, end] labelled with an entity type.
struct EntitySpan {
  size_t start = 0;
  size_t end = 0;
  std::string type;

  auto operator<=>(const EntitySpan&) const = default;
};

/// "O", "B-X" or "I-X" with a nonempty type X.
bool IsValidBioTag(std::string_view tag);

/// Maximal entity spans. An I-X that does not continue an open X span starts
/// a new one. Throws UsageError for a syntactically invalid tag.
std::set<EntitySpan> ExtractSpans(std::span<const std::string> tags);

using TagSequence = std::vector<std::string>;

/// Micro-averaged exact-span F1 over all sentences and entity types.
/// 0/0 precision or recall counts as 0; F1 is 0 when both are 0.
double EntityF1(std::span<const TagSequence> predicted,
                std::span<const TagSequence> gold);

struct ConllPredictions {
  std::vector<std::vector<std::string>> tokens;
  std::vector<TagSequence> gold;
  std::vector<TagSequence> predicted;
};

struct LabelPredictions {
  std::vector<std::string> gold;
  std::vector<std::string> predicted;
};

/// `token gold_tag pred_tag` per line, blank line between sentences.
ConllPredictions ReadConllPredictions(const std::filesystem::path& path);
void WriteConllPredictions(const std::filesystem::path& path,
                           const ConllPredictions& data);

/// Tab-separated `index gold_label pred_label`; a header line is optional.
LabelPredictions ReadLabelPredictions(const std::filesystem::path& path);
void WriteLabelPredictions(const std::filesystem::path& path,
                           const LabelPredictions& data);

/// File names inside a task's prediction directory.
inline constexpr std::string_view kConllPredictionFile = "dev.conll";
inline constexpr std::string_view kLabelPredictionFile = "dev.tsv";
inline constexpr std::string_view kMnliMatchedFile = "dev_matched.tsv";
inline constexpr std::string_view kMnliMismatchedFile = "dev_mismatched.tsv";

struct RecomputedMetric {
  double value = 0.0;
  int64_t instances = 0;  // sentences or examples evaluated
};

/// Recomputes a task's metric from the files in `dir`. Throws ConfigError
/// when a file is missing or unreadable.
RecomputedMetric RecomputeMetric(MetricKind kind,
                                 const std::filesystem::path& dir);

}  // namespace effbench

#endif  // EFFBENCH_METRICS_H_
