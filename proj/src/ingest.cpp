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

#include "ingest.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "error.hpp"
#include "json.hpp"

namespace escalade {

namespace {

using nlohmann::json;

[[noreturn]] void LineError(std::size_t line_no, const std::string& what) {
  Fail(ErrorCode::kValidation,
       "line " + std::to_string(line_no) + ": " + what);
}

json ParseObject(std::string_view line, std::size_t line_no) {
  json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) LineError(line_no, "malformed JSON");
  if (!j.is_object()) LineError(line_no, "expected a JSON object");
  return j;
}

const json& Require(const json& j, const char* field, std::size_t line_no) {
  auto it = j.find(field);
  if (it == j.end()) {
    LineError(line_no, std::string("missing required field ") + field);
  }
  return *it;
}

std::string RequireString(const json& j, const char* field,
                          std::size_t line_no) {
  const json& v = Require(j, field, line_no);
  if (!v.is_string()) {
    LineError(line_no, std::string("field ") + field + " must be a string");
  }
  return v.get<std::string>();
}

std::int64_t RequireInt(const json& j, const char* field, std::size_t line_no) {
  const json& v = Require(j, field, line_no);
  if (!v.is_number_integer()) {
    LineError(line_no, std::string("field ") + field + " must be an integer");
  }
  return v.get<std::int64_t>();
}

template <typename Fn>
void ForEachLine(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    fn(line, line_no);
  }
}

constexpr std::string_view kEventFields[] = {
    "ticket_id", "seq", "ts", "kind", "actor_id", "severity", "level",
    "customer_id"};

}  // namespace

TicketEvent ParseEventLine(std::string_view line, std::size_t line_no,
                           std::size_t* unknown_fields) {
  const json j = ParseObject(line, line_no);
  TicketEvent ev;
  ev.ticket_id = RequireString(j, "ticket_id", line_no);
  if (ev.ticket_id.empty()) LineError(line_no, "empty ticket_id");
  ev.seq = RequireInt(j, "seq", line_no);
  if (ev.seq < 0) LineError(line_no, "seq must be >= 0");
  ev.timestamp = RequireInt(j, "ts", line_no);
  const std::string kind = RequireString(j, "kind", line_no);
  const auto parsed_kind = ParseEventKind(kind);
  if (!parsed_kind) LineError(line_no, "unknown kind \"" + kind + "\"");
  ev.kind = *parsed_kind;
  ev.actor_id = RequireString(j, "actor_id", line_no);

  try {
    if (KindCarriesSeverity(ev.kind)) {
      ev.severity = Severity(static_cast<int>(RequireInt(j, "severity", line_no)));
    } else if (j.contains("severity")) {
      LineError(line_no, "field severity not allowed for kind " + kind);
    }
    if (KindCarriesLevel(ev.kind)) {
      ev.level = SupportLevel(static_cast<int>(RequireInt(j, "level", line_no)));
    } else if (j.contains("level")) {
      LineError(line_no, "field level not allowed for kind " + kind);
    }
  } catch (const Error& e) {
    if (std::string_view(e.what()).starts_with("line ")) throw;
    LineError(line_no, e.what());
  }

  if (ev.kind == EventKind::kOpened) {
    ev.customer_id = RequireString(j, "customer_id", line_no);
    if (ev.customer_id.empty()) LineError(line_no, "empty customer_id");
  } else if (j.contains("customer_id")) {
    LineError(line_no, "field customer_id not allowed for kind " + kind);
  }

  if (unknown_fields != nullptr) {
    for (const auto& item : j.items()) {
      if (std::find(std::begin(kEventFields), std::end(kEventFields),
                    item.key()) == std::end(kEventFields)) {
        ++*unknown_fields;
      }
    }
  }
  return ev;
}

ParsedEvents ParseEventLog(std::istream& in) {
  ParsedEvents out;
  ForEachLine(in, [&](const std::string& line, std::size_t line_no) {
    out.events.push_back(ParseEventLine(line, line_no, &out.unknown_fields));
  });
  return out;
}

ParsedEvents ParseEventLog(std::string_view text) {
  std::istringstream in{std::string(text)};
  return ParseEventLog(in);
}

ParsedEscalations ParseEscalations(std::istream& in) {
  ParsedEscalations out;
  ForEachLine(in, [&](const std::string& line, std::size_t line_no) {
    const json j = ParseObject(line, line_no);
    EscalationRecord rec;
    rec.critsit_id = RequireString(j, "critsit_id", line_no);
    if (rec.critsit_id.empty()) LineError(line_no, "empty critsit_id");
    rec.opened_at = RequireInt(j, "opened_at", line_no);
    const json& ids = Require(j, "ticket_ids", line_no);
    if (!ids.is_array()) LineError(line_no, "field ticket_ids must be an array");
    for (const auto& id : ids) {
      if (!id.is_string()) LineError(line_no, "ticket_ids must hold strings");
      rec.attached_ticket_ids.insert(id.get<std::string>());
    }
    if (rec.attached_ticket_ids.empty()) {
      LineError(line_no, "record " + rec.critsit_id + " has no attached tickets");
    }
    for (const auto& item : j.items()) {
      const auto& key = item.key();
      if (key != "critsit_id" && key != "opened_at" && key != "ticket_ids") {
        ++out.unknown_fields;
      }
    }
    out.records.push_back(std::move(rec));
  });
  return out;
}

ParsedEscalations ParseEscalations(std::string_view text) {
  std::istringstream in{std::string(text)};
  return ParseEscalations(in);
}

std::string FormatEventLine(const TicketEvent& event) {
  nlohmann::ordered_json j;
  j["ticket_id"] = event.ticket_id;
  j["seq"] = event.seq;
  j["ts"] = event.timestamp;
  j["kind"] = EventKindName(event.kind);
  j["actor_id"] = event.actor_id;
  if (event.severity) j["severity"] = event.severity->value();
  if (event.level) j["level"] = event.level->level();
  if (event.kind == EventKind::kOpened) j["customer_id"] = event.customer_id;
  return j.dump();
}

std::string FormatEscalationLine(const EscalationRecord& record) {
  nlohmann::ordered_json j;
  j["critsit_id"] = record.critsit_id;
  j["opened_at"] = record.opened_at;
  j["ticket_ids"] = record.attached_ticket_ids;
  return j.dump();
}

void WriteEventLog(std::ostream& out, std::span<const TicketEvent> events) {
  for (const auto& ev : events) out << FormatEventLine(ev) << '\n';
}

void WriteEscalations(std::ostream& out,
                      std::span<const EscalationRecord> records) {
  for (const auto& rec : records) out << FormatEscalationLine(rec) << '\n';
}

Corpus Corpus::Build(std::vector<TicketEvent> events,
                     std::vector<EscalationRecord> records) {
  Corpus corpus;

  std::unordered_map<std::string, std::vector<TicketEvent>> grouped;
  for (auto& ev : events) grouped[ev.ticket_id].push_back(std::move(ev));

  for (auto& [id, evs] : grouped) {
    std::sort(evs.begin(), evs.end(),
              [](const TicketEvent& a, const TicketEvent& b) {
                return a.seq < b.seq;
              });
    for (std::size_t i = 0; i < evs.size(); ++i) {
      if (i > 0 && evs[i].seq == evs[i - 1].seq) {
        Fail(ErrorCode::kValidation, "duplicate seq " +
                                         std::to_string(evs[i].seq) + " in " +
                                         id);
      }
      if (evs[i].seq != static_cast<std::int64_t>(i)) {
        Fail(ErrorCode::kValidation, "seq gap in " + id);
      }
      if (i > 0 && evs[i].timestamp < evs[i - 1].timestamp) {
        Fail(ErrorCode::kValidation,
             "timestamp decreases at seq " + std::to_string(i) + " in " + id);
      }
      if (evs[i].kind == EventKind::kOpened && i != 0) {
        Fail(ErrorCode::kValidation, "opened event not first in " + id);
      }
      if (evs[i].kind == EventKind::kClosed && i + 1 != evs.size()) {
        Fail(ErrorCode::kValidation, "closed event not last in " + id);
      }
    }
    if (evs.front().kind != EventKind::kOpened) {
      Fail(ErrorCode::kValidation, "ticket " + id + " has no opened event");
    }
    SupportTicket t;
    t.ticket_id = id;
    t.customer_id = evs.front().customer_id;
    t.events = std::move(evs);
    corpus.tickets_.emplace(id, std::move(t));
  }

  std::sort(records.begin(), records.end(),
            [](const EscalationRecord& a, const EscalationRecord& b) {
              return a.critsit_id < b.critsit_id;
            });
  std::unordered_map<std::string, std::vector<EscalationRecord>> by_ticket;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    if (rec.attached_ticket_ids.empty()) {
      Fail(ErrorCode::kValidation,
           "record " + rec.critsit_id + " has no attached tickets");
    }
    if (i > 0 && records[i - 1].critsit_id == rec.critsit_id) {
      Fail(ErrorCode::kValidation, "duplicate record " + rec.critsit_id);
    }
    for (const auto& tid : rec.attached_ticket_ids) {
      if (!corpus.tickets_.contains(tid)) {
        Fail(ErrorCode::kValidation, "dangling attachment " + tid +
                                         " in record " + rec.critsit_id);
      }
      by_ticket[tid].push_back(rec);
    }
  }
  for (const auto& [tid, recs] : by_ticket) {
    auto& t = corpus.tickets_.at(tid);
    t.escalation_type = ClassifyEscalationType(tid, recs);
    Minutes first = recs.front().opened_at;
    for (const auto& r : recs) first = std::min(first, r.opened_at);
    corpus.escalated_at_.emplace(tid, first);
  }
  corpus.escalations_ = std::move(records);

  for (const auto& [id, t] : corpus.tickets_) {
    corpus.customers_[t.customer_id].push_back(id);
  }
  for (auto& [cid, ids] : corpus.customers_) {
    std::sort(ids.begin(), ids.end(),
              [&](const std::string& a, const std::string& b) {
                const Minutes ta = corpus.tickets_.at(a).opened_at();
                const Minutes tb = corpus.tickets_.at(b).opened_at();
                return ta != tb ? ta < tb : a < b;
              });
  }
  return corpus;
}

const SupportTicket& Corpus::ticket(std::string_view ticket_id) const {
  auto it = tickets_.find(std::string(ticket_id));
  if (it == tickets_.end()) {
    Fail(ErrorCode::kNotFound, "unknown ticket " + std::string(ticket_id));
  }
  return it->second;
}

const std::vector<std::string>& Corpus::customer_tickets(
    std::string_view customer_id) const {
  auto it = customers_.find(std::string(customer_id));
  if (it == customers_.end()) {
    Fail(ErrorCode::kNotFound, "unknown customer " + std::string(customer_id));
  }
  return it->second;
}

std::optional<Minutes> Corpus::escalated_at(std::string_view ticket_id) const {
  auto it = escalated_at_.find(ticket_id);
  if (it == escalated_at_.end()) return std::nullopt;
  return it->second;
}

std::vector<TicketEvent> Corpus::AllEvents() const {
  std::vector<TicketEvent> out;
  for (const auto& [id, t] : tickets_) {
    out.insert(out.end(), t.events.begin(), t.events.end());
  }
  return out;
}

std::size_t Corpus::positives() const {
  return static_cast<std::size_t>(
      std::count_if(tickets_.begin(), tickets_.end(),
                    [](const auto& kv) { return kv.second.escalated(); }));
}

Corpus FilterCascades(const Corpus& corpus) {
  std::vector<EscalationRecord> kept_records;
  for (const auto& rec : corpus.escalations()) {
    if (rec.attached_ticket_ids.size() == 1) kept_records.push_back(rec);
  }
  std::vector<TicketEvent> events;
  for (const auto& [id, t] : corpus.tickets()) {
    if (t.escalation_type == EscalationType::kCascade) continue;
    events.insert(events.end(), t.events.begin(), t.events.end());
  }
  return Corpus::Build(std::move(events), std::move(kept_records));
}

IngestSummary Summarize(const Corpus& corpus, std::size_t unknown_fields) {
  IngestSummary s;
  s.tickets = corpus.tickets().size();
  s.customers = corpus.customers().size();
  s.records = corpus.escalations().size();
  s.unknown_fields = unknown_fields;
  for (const auto& [id, t] : corpus.tickets()) {
    s.events += t.events.size();
    if (t.escalation_type == EscalationType::kCause) ++s.cause;
    if (t.escalation_type == EscalationType::kCascade) ++s.cascade;
  }
  return s;
}

Corpus LoadCorpus(const std::string& events_path,
                  const std::string& escalations_path,
                  std::size_t* unknown_fields) {
  std::ifstream events_in(events_path);
  if (!events_in) {
    Fail(ErrorCode::kUsage, "cannot open events file " + events_path);
  }
  auto events = ParseEventLog(events_in);
  std::vector<EscalationRecord> records;
  std::size_t unknown = events.unknown_fields;
  if (!escalations_path.empty()) {
    std::ifstream crits_in(escalations_path);
    if (!crits_in) {
      Fail(ErrorCode::kUsage, "cannot open escalations file " + escalations_path);
    }
    auto parsed = ParseEscalations(crits_in);
    unknown += parsed.unknown_fields;
    records = std::move(parsed.records);
  }
  if (unknown_fields != nullptr) *unknown_fields = unknown;
  return Corpus::Build(std::move(events.events), std::move(records));
}

}  // namespace escalade
