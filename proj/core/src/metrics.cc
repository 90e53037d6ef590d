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

#include "effbench/metrics.h"

#include <charconv>
#include <fstream>
#include <sstream>

namespace effbench {
namespace {

std::vector<std::string> SplitWhitespace(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string field;
  while (in >> field) out.push_back(field);
  return out;
}

std::vector<std::string> SplitTabs(const std::string& line) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    const size_t tab = line.find('\t', start);
    out.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

bool IsInteger(std::string_view text) {
  int64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  return ec == std::errc() && ptr == text.data() + text.size();
}

std::ifstream OpenForRead(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read prediction file " + path.string());
  return in;
}

std::ofstream OpenForWrite(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write prediction file " + path.string());
  return out;
}

}  // namespace

double Accuracy(std::span<const std::string> predictions,
                std::span<const std::string> gold) {
  if (predictions.size() != gold.size()) {
    throw UsageError("accuracy: " + std::to_string(predictions.size()) +
                     " predictions vs " + std::to_string(gold.size()) +
                     " gold labels");
  }
  if (gold.empty()) throw UsageError("accuracy: empty input");
  size_t correct = 0;
  for (size_t i = 0; i < gold.size(); ++i) {
    if (predictions[i] == gold[i]) ++correct;
  }
  return 100.0 * static_cast<double>(correct) / static_cast<double>(gold.size());
}

double MnliAvgAccuracy(double matched_accuracy, double mismatched_accuracy) {
  for (double v : {matched_accuracy, mismatched_accuracy}) {
    if (!(v >= 0.0 && v <= 100.0)) {
      throw UsageError("mnli accuracy must lie in [0, 100]");
    }
  }
  return (matched_accuracy + mismatched_accuracy) / 2.0;
}

bool IsValidBioTag(std::string_view tag) {
  if (tag == "O") return true;
  return tag.size() > 2 && (tag[0] == 'B' || tag[0] == 'I') && tag[1] == '-';
}

std::set<EntitySpan> ExtractSpans(std::span<const std::string> tags) {
  std::set<EntitySpan> spans;
  bool open = false;
  EntitySpan current;
  auto close = [&] {
    if (open) spans.insert(current);
    open = false;
  };
  for (size_t i = 0; i < tags.size(); ++i) {
    const std::string& tag = tags[i];
    if (!IsValidBioTag(tag)) {
      throw UsageError("invalid BIO tag '" + tag + "' at position " +
                       std::to_string(i));
    }
    if (tag == "O") {
      close();
      continue;
    }
    const std::string type = tag.substr(2);
    if (tag[0] == 'I' && open && current.type == type) {
      current.end = i;
      continue;
    }
    close();
    current = EntitySpan{i, i, type};
    open = true;
  }
  close();
  return spans;
}

double EntityF1(std::span<const TagSequence> predicted,
                std::span<const TagSequence> gold) {
  if (predicted.size() != gold.size()) {
    throw UsageError("entity_f1: " + std::to_string(predicted.size()) +
                     " predicted sentences vs " + std::to_string(gold.size()) +
                     " gold");
  }
  size_t n_pred = 0;
  size_t n_gold = 0;
  size_t n_match = 0;
  for (size_t s = 0; s < gold.size(); ++s) {
    if (predicted[s].size() != gold[s].size()) {
      throw UsageError("entity_f1: sentence " + std::to_string(s) +
                       " has mismatched lengths");
    }
    const std::set<EntitySpan> p = ExtractSpans(predicted[s]);
    const std::set<EntitySpan> g = ExtractSpans(gold[s]);
    n_pred += p.size();
    n_gold += g.size();
    for (const EntitySpan& span : p) n_match += g.count(span);
  }
  const double precision =
      n_pred == 0 ? 0.0 : static_cast<double>(n_match) / n_pred;
  const double recall =
      n_gold == 0 ? 0.0 : static_cast<double>(n_match) / n_gold;
  if (precision + recall == 0.0) return 0.0;
  return 100.0 * 2.0 * precision * recall / (precision + recall);
}

ConllPredictions ReadConllPredictions(const std::filesystem::path& path) {
  std::ifstream in = OpenForRead(path);
  ConllPredictions data;
  std::vector<std::string> tokens;
  TagSequence gold;
  TagSequence predicted;
  auto flush = [&] {
    if (tokens.empty()) return;
    data.tokens.push_back(std::move(tokens));
    data.gold.push_back(std::move(gold));
    data.predicted.push_back(std::move(predicted));
    tokens.clear();
    gold.clear();
    predicted.clear();
  };
  std::string line;
  size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const std::vector<std::string> fields = SplitWhitespace(line);
    if (fields.empty()) {
      flush();
      continue;
    }
    if (fields[0] == "-DOCSTART-") continue;
    if (fields.size() < 3) {
      throw ConfigError(path.string() + ":" + std::to_string(line_number) +
                        ": expected 'token gold_tag pred_tag'");
    }
    const std::string& g = fields[fields.size() - 2];
    const std::string& p = fields[fields.size() - 1];
    if (!IsValidBioTag(g) || !IsValidBioTag(p)) {
      throw ConfigError(path.string() + ":" + std::to_string(line_number) +
                        ": invalid BIO tag");
    }
    tokens.push_back(fields[0]);
    gold.push_back(g);
    predicted.push_back(p);
  }
  flush();
  return data;
}

void WriteConllPredictions(const std::filesystem::path& path,
                           const ConllPredictions& data) {
  std::ofstream out = OpenForWrite(path);
  for (size_t s = 0; s < data.gold.size(); ++s) {
    if (s > 0) out << '\n';
    for (size_t i = 0; i < data.gold[s].size(); ++i) {
      out << data.tokens[s][i] << ' ' << data.gold[s][i] << ' '
          << data.predicted[s][i] << '\n';
    }
  }
}

LabelPredictions ReadLabelPredictions(const std::filesystem::path& path) {
  std::ifstream in = OpenForRead(path);
  LabelPredictions data;
  std::string line;
  size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = SplitTabs(line);
    if (fields.size() != 3) {
      throw ConfigError(path.string() + ":" + std::to_string(line_number) +
                        ": expected 'index<TAB>gold<TAB>pred'");
    }
    if (!IsInteger(fields[0])) {
      if (line_number == 1) continue;  // header
      throw ConfigError(path.string() + ":" + std::to_string(line_number) +
                        ": index is not an integer");
    }
    data.gold.push_back(fields[1]);
    data.predicted.push_back(fields[2]);
  }
  return data;
}

void WriteLabelPredictions(const std::filesystem::path& path,
                           const LabelPredictions& data) {
  std::ofstream out = OpenForWrite(path);
  out << "index\tgold\tpred\n";
  for (size_t i = 0; i < data.gold.size(); ++i) {
    out << i << '\t' << data.gold[i] << '\t' << data.predicted[i] << '\n';
  }
}

RecomputedMetric RecomputeMetric(MetricKind kind,
                                 const std::filesystem::path& dir) {
  try {
    switch (kind) {
      case MetricKind::kEntityF1: {
        const ConllPredictions data =
            ReadConllPredictions(dir / kConllPredictionFile);
        return {EntityF1(data.predicted, data.gold),
                static_cast<int64_t>(data.gold.size())};
      }
      case MetricKind::kAccuracy: {
        const LabelPredictions data =
            ReadLabelPredictions(dir / kLabelPredictionFile);
        return {Accuracy(data.predicted, data.gold),
                static_cast<int64_t>(data.gold.size())};
      }
      case MetricKind::kMnliAvgAccuracy: {
        const LabelPredictions matched =
            ReadLabelPredictions(dir / kMnliMatchedFile);
        const LabelPredictions mismatched =
            ReadLabelPredictions(dir / kMnliMismatchedFile);
        return {MnliAvgAccuracy(Accuracy(matched.predicted, matched.gold),
                                Accuracy(mismatched.predicted, mismatched.gold)),
                static_cast<int64_t>(matched.gold.size() +
                                     mismatched.gold.size())};
      }
    }
  } catch (const UsageError& e) {
    throw ConfigError(dir.string() + ": " + e.what());
  }
  return {};
}

}  // namespace effbench
