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

// Event-log and escalation-record parsing, corpus validation and the
// cascade filter.

#ifndef ESCALADE_INGEST_HPP_
#define ESCALADE_INGEST_HPP_

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "model.hpp"

namespace escalade {

struct ParsedEvents {
  std::vector<TicketEvent> events;
  // Count of unknown extra fields that were ignored.
  std::size_t unknown_fields = 0;
};

struct ParsedEscalations {
  std::vector<EscalationRecord> records;
  std::size_t unknown_fields = 0;
};

// JSON-lines event log. Blank lines are skipped; errors carry the 1-based
// line number.
ParsedEvents ParseEventLog(std::istream& in);
ParsedEvents ParseEventLog(std::string_view text);
TicketEvent ParseEventLine(std::string_view line, std::size_t line_no,
                           std::size_t* unknown_fields = nullptr);

ParsedEscalations ParseEscalations(std::istream& in);
ParsedEscalations ParseEscalations(std::string_view text);

std::string FormatEventLine(const TicketEvent& event);
std::string FormatEscalationLine(const EscalationRecord& record);
void WriteEventLog(std::ostream& out, std::span<const TicketEvent> events);
void WriteEscalations(std::ostream& out,
                      std::span<const EscalationRecord> records);

// Validated, immutable set of tickets and escalation records with a
// per-customer index ordered by open time.
class Corpus {
 public:
  static Corpus Build(std::vector<TicketEvent> events,
                      std::vector<EscalationRecord> records);

  const std::map<std::string, SupportTicket>& tickets() const {
    return tickets_;
  }
  // Sorted by critsit_id.
  const std::vector<EscalationRecord>& escalations() const {
    return escalations_;
  }
  const std::map<std::string, std::vector<std::string>>& customers() const {
    return customers_;
  }

  // Throws kNotFound.
  const SupportTicket& ticket(std::string_view ticket_id) const;
  const std::vector<std::string>& customer_tickets(
      std::string_view customer_id) const;

  // Earliest opening time of any record the ticket is attached to.
  std::optional<Minutes> escalated_at(std::string_view ticket_id) const;

  // All events of all tickets, grouped by ticket id then seq.
  std::vector<TicketEvent> AllEvents() const;

  std::size_t positives() const;

  friend bool operator==(const Corpus&, const Corpus&) = default;

 private:
  Corpus() = default;

  std::map<std::string, SupportTicket> tickets_;
  std::vector<EscalationRecord> escalations_;
  std::map<std::string, std::vector<std::string>> customers_;
  std::map<std::string, Minutes, std::less<>> escalated_at_;
};

// Drops every ticket whose escalation type is Cascade, and the records left
// without attachments. Cause tickets keep their single-attachment records.
Corpus FilterCascades(const Corpus& corpus);

// Cheap schema and invariant check over files without featurization.
struct IngestSummary {
  std::size_t events = 0;
  std::size_t tickets = 0;
  std::size_t customers = 0;
  std::size_t records = 0;
  std::size_t cause = 0;
  std::size_t cascade = 0;
  std::size_t unknown_fields = 0;
};

IngestSummary Summarize(const Corpus& corpus, std::size_t unknown_fields);

Corpus LoadCorpus(const std::string& events_path,
                  const std::string& escalations_path,
                  std::size_t* unknown_fields = nullptr);

}  // namespace escalade

#endif  // ESCALADE_INGEST_HPP_
