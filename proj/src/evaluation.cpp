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

#include "evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <unordered_map>

#include "error.hpp"
#include "json.hpp"
#include "rng.hpp"

namespace escalade {

void ConfusionMatrix::Add(bool actual, bool predicted) {
  if (actual) {
    ++(predicted ? tp : fn);
  } else {
    ++(predicted ? fp : tn);
  }
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& o) {
  tp += o.tp;
  fp += o.fp;
  tn += o.tn;
  fn += o.fn;
  return *this;
}

namespace {

Metric Ratio(std::uint64_t num, std::uint64_t den, const char* reason) {
  if (den == 0) return Metric{std::nullopt, reason};
  return Metric{static_cast<double>(num) / static_cast<double>(den), {}};
}

}  // namespace

MetricsReport ComputeMetrics(const ConfusionMatrix& m) {
  if (m.total() == 0) {
    Fail(ErrorCode::kValidation, "cannot compute metrics of an empty matrix");
  }
  MetricsReport r;
  r.matrix = m;
  r.recall = Ratio(m.tp, m.tp + m.fn, "no actual positives (tp + fn = 0)");
  r.precision =
      Ratio(m.tp, m.tp + m.fp, "no predicted positives (tp + fp = 0)");
  r.summarization = Ratio(m.tn + m.fn, m.total(), "empty matrix");
  return r;
}

std::vector<std::vector<std::string>> KFoldSplit(
    std::span<const std::string> ticket_ids, int k, std::uint64_t seed) {
  if (k < 2) Fail(ErrorCode::kValidation, "k must be >= 2");
  if (ticket_ids.size() < static_cast<std::size_t>(k)) {
    Fail(ErrorCode::kValidation, "fewer tickets than folds");
  }
  std::vector<std::string> ids(ticket_ids.begin(), ticket_ids.end());
  std::sort(ids.begin(), ids.end());
  Rng rng(DeriveSeed(seed, 0x6b666f6c64ULL));
  for (std::size_t i = ids.size(); i > 1; --i) {
    std::swap(ids[i - 1], ids[rng.Uniform(i)]);
  }
  std::vector<std::vector<std::string>> folds(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < ids.size(); ++i) {
    folds[i % folds.size()].push_back(std::move(ids[i]));
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

CvReport CrossValidate(const Corpus& corpus, const TrainConfig& config,
                       const CvOptions& options) {
  config.Validate();
  std::vector<std::string> ids;
  ids.reserve(corpus.tickets().size());
  for (const auto& [id, t] : corpus.tickets()) ids.push_back(id);
  const auto folds = KFoldSplit(ids, options.k, options.seed);

  // Rows per ticket, computed once: the final snapshot, or snapshots
  // 0..final in per-snapshot mode.
  const FeatureContext ctx(corpus);
  struct TicketRows {
    std::vector<std::int64_t> seqs;
    std::vector<FeatureVector> vectors;
    bool label = false;
  };
  std::unordered_map<std::string, TicketRows> rows;
  for (const auto& [id, ticket] : corpus.tickets()) {
    TicketRows tr;
    tr.label = ticket.escalated();
    const std::size_t final_idx = FinalSnapshotIndex(corpus, ticket);
    if (options.granularity == Granularity::kFinalSnapshot) {
      tr.seqs.push_back(static_cast<std::int64_t>(final_idx));
      tr.vectors.push_back(ComputeFeatureVector(
          ctx, ticket, SnapshotAt(ticket, final_idx), options.window));
    } else {
      auto all = ComputeSnapshotVectors(ctx, ticket, options.window);
      all.resize(final_idx + 1);
      for (std::size_t i = 0; i <= final_idx; ++i) {
        tr.seqs.push_back(static_cast<std::int64_t>(i));
      }
      tr.vectors = std::move(all);
    }
    rows.emplace(id, std::move(tr));
  }

  CvReport report;
  report.config = config;
  report.options = options;
  report.tickets = corpus.tickets().size();
  report.positives = corpus.positives();
  ConfusionMatrix total;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    Dataset train;
    for (std::size_t g = 0; g < folds.size(); ++g) {
      if (g == f) continue;
      for (const auto& id : folds[g]) {
        const auto& tr = rows.at(id);
        for (const auto& v : tr.vectors) train.Add(v, tr.label);
      }
    }
    const std::size_t pos = train.positives();
    if (pos == 0 || pos == train.size()) {
      Fail(ErrorCode::kValidation, "training folds for fold " +
                                       std::to_string(f) +
                                       " contain a single class");
    }
    if (folds[f].empty()) {
      Fail(ErrorCode::kValidation, "fold " + std::to_string(f) + " is empty");
    }
    TrainConfig fold_config = config;
    fold_config.seed = DeriveSeed(config.seed, f);
    const ForestModel model = Train(train, fold_config);

    ConfusionMatrix m;
    for (const auto& id : folds[f]) {
      const auto& tr = rows.at(id);
      for (std::size_t i = 0; i < tr.vectors.size(); ++i) {
        const Prediction p = Predict(model, tr.vectors[i]);
        m.Add(tr.label, p.risk.predicted_crit);
        report.predictions.push_back(
            {id, tr.seqs[i], tr.label, p.confidence, static_cast<int>(f)});
      }
    }
    report.folds.push_back(m);
    total += m;
  }
  report.metrics = ComputeMetrics(total);
  return report;
}

double RecallAtSummarization(std::span<const ScoredRow> rows,
                             double summarization) {
  std::vector<const ScoredRow*> sorted;
  std::size_t positives = 0;
  for (const auto& r : rows) {
    sorted.push_back(&r);
    positives += r.label ? 1 : 0;
  }
  if (positives == 0) {
    Fail(ErrorCode::kValidation, "recall undefined: no positive rows");
  }
  std::sort(sorted.begin(), sorted.end(),
            [](const ScoredRow* a, const ScoredRow* b) {
              if (a->confidence != b->confidence) {
                return a->confidence > b->confidence;
              }
              if (a->ticket_id != b->ticket_id) return a->ticket_id < b->ticket_id;
              return a->upto_seq < b->upto_seq;
            });
  const auto flagged = static_cast<std::size_t>(std::llround(
      std::clamp(1.0 - summarization, 0.0, 1.0) *
      static_cast<double>(sorted.size())));
  std::size_t hits = 0;
  for (std::size_t i = 0; i < flagged; ++i) hits += sorted[i]->label ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(positives);
}

namespace {

using nlohmann::ordered_json;

void PutMetric(ordered_json& j, const char* name, const Metric& m) {
  if (m.value) {
    j[name] = *m.value;
  } else {
    j[name] = nullptr;
    j[std::string(name) + "_undefined_reason"] = m.undefined_reason;
  }
}

ordered_json MatrixJson(const ConfusionMatrix& m) {
  ordered_json j;
  j["tp"] = m.tp;
  j["fp"] = m.fp;
  j["tn"] = m.tn;
  j["fn"] = m.fn;
  return j;
}

}  // namespace

std::string FormatReportJson(const CvReport& report) {
  ordered_json j = MatrixJson(report.metrics.matrix);
  PutMetric(j, "recall", report.metrics.recall);
  PutMetric(j, "precision", report.metrics.precision);
  PutMetric(j, "summarization", report.metrics.summarization);
  j["tickets"] = report.tickets;
  j["positives"] = report.positives;
  j["k"] = report.options.k;
  j["seed"] = report.options.seed;
  j["window_months"] = report.options.window.months();
  j["granularity"] = report.options.granularity == Granularity::kFinalSnapshot
                         ? "final_snapshot"
                         : "all_snapshots";
  ordered_json cfg;
  cfg["n_trees"] = report.config.n_trees;
  cfg["max_depth"] = report.config.max_depth
                         ? ordered_json(*report.config.max_depth)
                         : ordered_json(nullptr);
  cfg["min_samples_split"] = report.config.min_samples_split;
  cfg["features_per_split"] = report.config.features_per_split;
  cfg["seed"] = report.config.seed;
  cfg["balance"] = report.config.balance;
  cfg["bootstrap"] = report.config.bootstrap;
  j["config"] = cfg;
  j["folds"] = ordered_json::array();
  for (const auto& m : report.folds) j["folds"].push_back(MatrixJson(m));
  return j.dump(2) + "\n";
}

ErTimeline ComputeErTimeline(const ForestModel& model, const FeatureContext& ctx,
                             std::string_view ticket_id, ProfileWindow window) {
  const SupportTicket& ticket = ctx.corpus().ticket(ticket_id);
  ErTimeline out;
  out.ticket_id = ticket.ticket_id;
  const auto vectors = ComputeSnapshotVectors(ctx, ticket, window);
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    out.points.emplace_back(static_cast<std::int64_t>(i),
                            Predict(model, vectors[i]).risk.er);
  }
  return out;
}

void WriteTimelineCsv(std::ostream& out, const ErTimeline& timeline) {
  out << "upto_seq,er\n";
  for (const auto& [seq, er] : timeline.points) out << seq << ',' << er << '\n';
}

}  // namespace escalade
