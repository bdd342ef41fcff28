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

// Live triage state behind the stand-up tool: open tickets ranked by
// escalation risk, change in risk between updates, and analyst-entered
// manual risk. Every accepted event batch and MER write is appended to a
// journal and fsync'd before it is acknowledged; the journal is replayed on
// startup.

#ifndef ESCALADE_TRIAGE_HPP_
#define ESCALADE_TRIAGE_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "features.hpp"
#include "forest.hpp"
#include "ingest.hpp"
#include "model.hpp"

namespace escalade {

struct TriageEntry {
  std::string ticket_id;
  int current_er = 0;
  bool predicted_crit = false;
  double confidence = 0;
  std::optional<int> previous_er;
  std::optional<int> cer;  // current_er - previous_er
  std::optional<int> mer;
  std::optional<std::string> mer_set_by;
  std::optional<Minutes> mer_set_at;
  FeatureVector features;
  Minutes last_event_ts = 0;
  bool open = true;
  // Store-wide update counter at the last ER recomputation.
  std::uint64_t updated_in = 0;
};

struct TicketDetail {
  TriageEntry entry;
  std::vector<TicketEvent> events;
};

struct UpdateSummary {
  std::size_t events = 0;
  std::uint64_t update = 0;
  std::vector<std::string> updated;  // sorted ticket ids
  std::vector<std::string> closed;
  std::vector<TriageEntry> entries;  // one per updated ticket
};

enum class SortKey { kEr, kCer, kMer };

std::optional<SortKey> ParseSortKey(std::string_view name);

struct TriageOptions {
  ProfileWindow window;
  std::string journal_path;  // empty: in-memory only
  // Background tickets and escalation records for customer profiles. They
  // are not journaled.
  std::vector<TicketEvent> history_events;
  std::vector<EscalationRecord> history_records;
  // Epoch-minute clock for MER timestamps.
  std::function<Minutes()> clock;
};

class TriageStore {
 public:
  // Replays the journal when one is configured. `model` may be null, in which
  // case event ingestion fails with a state error.
  TriageStore(std::shared_ptr<const ForestModel> model, TriageOptions options);
  ~TriageStore();

  TriageStore(const TriageStore&) = delete;
  TriageStore& operator=(const TriageStore&) = delete;

  // All-or-nothing: the batch is validated against the current state before
  // anything is journaled or applied.
  UpdateSummary IngestEvents(std::vector<TicketEvent> batch);

  std::vector<TriageEntry> ListOpen(SortKey key, bool descending) const;
  TicketDetail GetDetail(std::string_view ticket_id) const;
  TriageEntry SetMer(std::string_view ticket_id, int value,
                     const std::string& author);

  const ForestModel* model() const { return model_.get(); }
  ProfileWindow window() const { return options_.window; }
  std::size_t ticket_count() const;

 private:
  UpdateSummary ApplyEvents(std::vector<TicketEvent> batch, bool journal);
  TriageEntry ApplyMer(std::string_view ticket_id, int value,
                       const std::string& author, Minutes at, bool journal);
  void Replay();
  void AppendJournal(const std::string& line);

  std::shared_ptr<const ForestModel> model_;
  TriageOptions options_;
  int journal_fd_ = -1;
  std::uint64_t updates_ = 0;

  mutable std::shared_mutex mu_;
  std::map<std::string, SupportTicket> tickets_;
  std::map<std::string, TriageEntry> entries_;
};

}  // namespace escalade

#endif  // ESCALADE_TRIAGE_HPP_
