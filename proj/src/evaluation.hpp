/*
 * Copyright 2026 The Escalade Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Cross-validation harness, confusion-matrix metrics and per-snapshot
// escalation-risk timelines.

#ifndef ESCALADE_EVALUATION_HPP_
#define ESCALADE_EVALUATION_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "features.hpp"
#include "forest.hpp"
#include "ingest.hpp"

namespace escalade {

struct ConfusionMatrix {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const { return tp + fp + tn + fn; }
  void Add(bool actual, bool predicted);
  ConfusionMatrix& operator+=(const ConfusionMatrix& o);
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

// A ratio that is null, with a reason, when its denominator is zero.
struct Metric {
  std::optional<double> value;
  std::string undefined_reason;
};

struct MetricsReport {
  Metric recall;         // tp / (tp + fn)
  Metric precision;      // tp / (tp + fp)
  Metric summarization;  // (tn + fn) / total
  ConfusionMatrix matrix;
};

// Throws kValidation on an empty matrix.
MetricsReport ComputeMetrics(const ConfusionMatrix& matrix);

// Partition of the ids into k folds whose sizes differ by at most one.
std::vector<std::vector<std::string>> KFoldSplit(
    std::span<const std::string> ticket_ids, int k, std::uint64_t seed);

enum class Granularity {
  kFinalSnapshot,  // one row per ticket
  kAllSnapshots,   // every pre-outcome snapshot; for sensitivity analysis
};

struct CvOptions {
  int k = 10;
  std::uint64_t seed = 0;
  ProfileWindow window;
  Granularity granularity = Granularity::kFinalSnapshot;
};

struct ScoredRow {
  std::string ticket_id;
  std::int64_t upto_seq = 0;
  bool label = false;
  double confidence = 0;
  int fold = 0;
};

struct CvReport {
  MetricsReport metrics;
  std::vector<ConfusionMatrix> folds;
  // Held-out predictions in fold order.
  std::vector<ScoredRow> predictions;
  TrainConfig config;
  CvOptions options;
  std::size_t tickets = 0;
  std::size_t positives = 0;
};

CvReport CrossValidate(const Corpus& corpus, const TrainConfig& config,
                       const CvOptions& options);

// Recall when the highest-confidence (1 - summarization) share of rows is
// flagged. Ties are broken by ticket id then snapshot.
double RecallAtSummarization(std::span<const ScoredRow> rows,
                             double summarization);

std::string FormatReportJson(const CvReport& report);

struct ErTimeline {
  std::string ticket_id;
  std::vector<std::pair<std::int64_t, int>> points;  // (upto_seq, er)
};

ErTimeline ComputeErTimeline(const ForestModel& model, const FeatureContext& ctx,
                             std::string_view ticket_id, ProfileWindow window);

// Header "upto_seq,er".
void WriteTimelineCsv(std::ostream& out, const ErTimeline& timeline);

}  // namespace escalade

#endif  // ESCALADE_EVALUATION_HPP_
