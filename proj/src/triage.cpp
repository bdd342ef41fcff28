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

#include "triage.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>

#include "error.hpp"
#include "json.hpp"

namespace escalade {

std::optional<SortKey> ParseSortKey(std::string_view name) {
  if (name == "er") return SortKey::kEr;
  if (name == "cer") return SortKey::kCer;
  if (name == "mer") return SortKey::kMer;
  return std::nullopt;
}

namespace {

Minutes WallClockMinutes() {
  using namespace std::chrono;
  return duration_cast<minutes>(system_clock::now().time_since_epoch()).count();
}

}  // namespace

TriageStore::TriageStore(std::shared_ptr<const ForestModel> model,
                         TriageOptions options)
    : model_(std::move(model)), options_(std::move(options)) {
  if (!options_.clock) options_.clock = WallClockMinutes;
  if (!options_.history_events.empty() || !options_.history_records.empty()) {
    // Validate the background once up front.
    Corpus::Build(options_.history_events, options_.history_records);
  }
  if (!options_.journal_path.empty()) {
    Replay();
    journal_fd_ = ::open(options_.journal_path.c_str(),
                         O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
    if (journal_fd_ < 0) {
      Fail(ErrorCode::kRuntime, "cannot open journal " + options_.journal_path +
                                    ": " + std::strerror(errno));
    }
  }
}

TriageStore::~TriageStore() {
  if (journal_fd_ >= 0) ::close(journal_fd_);
}

void TriageStore::AppendJournal(const std::string& line) {
  if (journal_fd_ < 0) return;
  std::string buf = line + "\n";
  const char* p = buf.data();
  std::size_t left = buf.size();
  while (left > 0) {
    const ssize_t n = ::write(journal_fd_, p, left);
    if (n < 0) {
      if (errno == EINTR) continue;
      Fail(ErrorCode::kRuntime,
           std::string("journal write failed: ") + std::strerror(errno));
    }
    p += n;
    left -= static_cast<std::size_t>(n);
  }
  if (::fsync(journal_fd_) != 0) {
    Fail(ErrorCode::kRuntime,
         std::string("journal fsync failed: ") + std::strerror(errno));
  }
}

void TriageStore::Replay() {
  std::ifstream in(options_.journal_path, std::ios::binary);
  if (!in) return;
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) {
      // Torn tail from an interrupted write; it was never acknowledged.
      if (::truncate(options_.journal_path.c_str(),
                     static_cast<off_t>(pos)) != 0) {
        Fail(ErrorCode::kRuntime, "cannot trim torn journal tail");
      }
      break;
    }
    ++line_no;
    const std::string_view line(text.data() + pos, nl - pos);
    pos = nl + 1;
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      Fail(ErrorCode::kRuntime,
           "corrupt journal line " + std::to_string(line_no));
    }
    const std::string type = j.value("type", std::string());
    if (type == "events") {
      std::vector<TicketEvent> batch;
      for (const auto& ev : j.at("events")) {
        batch.push_back(ParseEventLine(ev.dump(), line_no));
      }
      ApplyEvents(std::move(batch), /*journal=*/false);
    } else if (type == "mer") {
      ApplyMer(j.at("ticket_id").get<std::string>(), j.at("value").get<int>(),
               j.at("author").get<std::string>(), j.at("at").get<Minutes>(),
               /*journal=*/false);
    } else {
      Fail(ErrorCode::kRuntime, "unknown journal record type \"" + type +
                                    "\" at line " + std::to_string(line_no));
    }
  }
}

UpdateSummary TriageStore::IngestEvents(std::vector<TicketEvent> batch) {
  std::unique_lock lock(mu_);
  return ApplyEvents(std::move(batch), /*journal=*/true);
}

UpdateSummary TriageStore::ApplyEvents(std::vector<TicketEvent> batch,
                                       bool journal) {
  if (!model_) Fail(ErrorCode::kState, "no model loaded");
  UpdateSummary summary;
  summary.events = batch.size();
  if (batch.empty()) {
    summary.update = updates_;
    return summary;
  }

  std::set<std::string> history_ids;
  for (const auto& ev : options_.history_events) history_ids.insert(ev.ticket_id);
  std::map<std::string, std::int64_t> lowest_seq;
  for (const auto& ev : batch) {
    auto [it, inserted] = lowest_seq.emplace(ev.ticket_id, ev.seq);
    if (!inserted) it->second = std::min(it->second, ev.seq);
  }
  for (const auto& [id, seq] : lowest_seq) {
    if (history_ids.contains(id)) {
      Fail(ErrorCode::kState, "ticket " + id + " belongs to the read-only history");
    }
    const auto it = tickets_.find(id);
    const std::int64_t expected =
        it == tickets_.end() ? 0 : static_cast<std::int64_t>(it->second.events.size());
    if (it != tickets_.end() && it->second.closed()) {
      Fail(ErrorCode::kState, "ticket " + id + " is closed");
    }
    if (seq < expected) {
      Fail(ErrorCode::kValidation, "seq regression in " + id + ": got " +
                                       std::to_string(seq) + ", expected " +
                                       std::to_string(expected));
    }
  }

  std::vector<TicketEvent> all = options_.history_events;
  for (const auto& [id, t] : tickets_) {
    all.insert(all.end(), t.events.begin(), t.events.end());
  }
  std::vector<TicketEvent> journaled = batch;
  all.insert(all.end(), std::make_move_iterator(batch.begin()),
             std::make_move_iterator(batch.end()));
  const Corpus corpus = Corpus::Build(std::move(all), options_.history_records);

  if (journal) {
    nlohmann::json record;
    record["type"] = "events";
    record["events"] = nlohmann::json::array();
    for (const auto& ev : journaled) {
      record["events"].push_back(nlohmann::json::parse(FormatEventLine(ev)));
    }
    AppendJournal(record.dump());
  }

  ++updates_;
  summary.update = updates_;
  const FeatureContext ctx(corpus);
  for (const auto& [id, seq] : lowest_seq) {
    const SupportTicket& ticket = corpus.ticket(id);
    tickets_[id] = ticket;
    const Snapshot snap = SnapshotAt(ticket, ticket.events.size() - 1);
    const FeatureVector fv = ComputeFeatureVector(ctx, ticket, snap, options_.window);
    const Prediction p = Predict(*model_, fv);

    TriageEntry& e = entries_[id];
    const bool existed = !e.ticket_id.empty();
    e.ticket_id = id;
    if (existed) {
      e.previous_er = e.current_er;
    }
    e.current_er = p.risk.er;
    e.predicted_crit = p.risk.predicted_crit;
    e.confidence = p.confidence;
    if (e.previous_er) e.cer = e.current_er - *e.previous_er;
    e.features = fv;
    e.last_event_ts = ticket.events.back().timestamp;
    e.open = !ticket.closed();
    e.updated_in = updates_;
    summary.updated.push_back(id);
    if (!e.open) summary.closed.push_back(id);
    summary.entries.push_back(e);
  }
  return summary;
}

std::vector<TriageEntry> TriageStore::ListOpen(SortKey key,
                                               bool descending) const {
  std::shared_lock lock(mu_);
  std::vector<TriageEntry> out;
  for (const auto& [id, e] : entries_) {
    if (e.open) out.push_back(e);
  }
  const auto key_of = [key](const TriageEntry& e) -> std::optional<int> {
    switch (key) {
      case SortKey::kEr:
        return e.current_er;
      case SortKey::kCer:
        return e.cer;
      case SortKey::kMer:
        return e.mer;
    }
    return std::nullopt;
  };
  // entries_ is id-ordered, so a stable sort keeps id order within ties.
  std::stable_sort(out.begin(), out.end(),
                   [&](const TriageEntry& a, const TriageEntry& b) {
                     const auto ka = key_of(a), kb = key_of(b);
                     if (!ka || !kb) return ka.has_value() && !kb.has_value();
                     return descending ? *ka > *kb : *ka < *kb;
                   });
  return out;
}

TicketDetail TriageStore::GetDetail(std::string_view ticket_id) const {
  std::shared_lock lock(mu_);
  const auto it = entries_.find(std::string(ticket_id));
  if (it == entries_.end()) {
    Fail(ErrorCode::kNotFound, "unknown ticket " + std::string(ticket_id));
  }
  return TicketDetail{it->second, tickets_.at(it->first).events};
}

TriageEntry TriageStore::SetMer(std::string_view ticket_id, int value,
                                const std::string& author) {
  std::unique_lock lock(mu_);
  return ApplyMer(ticket_id, value, author, options_.clock(), /*journal=*/true);
}

TriageEntry TriageStore::ApplyMer(std::string_view ticket_id, int value,
                                  const std::string& author, Minutes at,
                                  bool journal) {
  if (value < 0 || value > 100) {
    Fail(ErrorCode::kValidation, "MER out of range [0,100]");
  }
  const auto it = entries_.find(std::string(ticket_id));
  if (it == entries_.end()) {
    Fail(ErrorCode::kNotFound, "unknown ticket " + std::string(ticket_id));
  }
  if (!it->second.open) {
    Fail(ErrorCode::kState, "ticket " + std::string(ticket_id) + " is closed");
  }
  if (journal) {
    nlohmann::json record;
    record["type"] = "mer";
    record["ticket_id"] = ticket_id;
    record["value"] = value;
    record["author"] = author;
    record["at"] = at;
    AppendJournal(record.dump());
  }
  TriageEntry& e = it->second;
  e.mer = value;
  e.mer_set_by = author;
  e.mer_set_at = at;
  return e;
}

std::size_t TriageStore::ticket_count() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

}  // namespace escalade
