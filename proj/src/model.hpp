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

// Domain types shared by every stage of the escalation pipeline: ticket
// events, tickets, escalation records, the fixed-order feature vector and the
// escalation-risk score.

#ifndef ESCALADE_MODEL_HPP_
#define ESCALADE_MODEL_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace escalade {

// UTC epoch minutes.
using Minutes = std::int64_t;

inline constexpr Minutes kMinutesPerDay = 1440;
inline constexpr Minutes kMinutesPerMonth = 30 * kMinutesPerDay;

// Customer-set urgency, 1 is the most severe and 4 the least.
class Severity {
 public:
  explicit Severity(int value);
  int value() const { return value_; }
  friend bool operator==(Severity, Severity) = default;

 private:
  int value_;
};

// Support level L0..L3 in charge of a ticket.
class SupportLevel {
 public:
  explicit SupportLevel(int level);
  int level() const { return level_; }
  friend bool operator==(SupportLevel, SupportLevel) = default;

 private:
  int level_;
};

enum class EventKind {
  kOpened,
  kCustomerMessage,
  kSupportMessage,
  kSeverityChange,
  kOwnershipChange,
  kClosed,
};

// Wire names used by the event-log format.
std::string_view EventKindName(EventKind kind);
std::optional<EventKind> ParseEventKind(std::string_view name);

bool KindCarriesSeverity(EventKind kind);
bool KindCarriesLevel(EventKind kind);

struct TicketEvent {
  std::string ticket_id;
  std::int64_t seq = 0;
  Minutes timestamp = 0;
  EventKind kind = EventKind::kOpened;
  // Support person for support messages and ownership changes, customer
  // otherwise.
  std::string actor_id;
  std::optional<Severity> severity;
  std::optional<SupportLevel> level;
  // Only set on kOpened.
  std::string customer_id;

  friend bool operator==(const TicketEvent&, const TicketEvent&) = default;
};

enum class EscalationType { kNone, kCause, kCascade };

std::string_view EscalationTypeName(EscalationType type);

struct SupportTicket {
  std::string ticket_id;
  std::string customer_id;
  std::vector<TicketEvent> events;
  EscalationType escalation_type = EscalationType::kNone;

  bool escalated() const { return escalation_type != EscalationType::kNone; }
  Minutes opened_at() const { return events.front().timestamp; }
  bool closed() const { return events.back().kind == EventKind::kClosed; }

  friend bool operator==(const SupportTicket&, const SupportTicket&) = default;
};

struct EscalationRecord {
  std::string critsit_id;
  Minutes opened_at = 0;
  std::set<std::string> attached_ticket_ids;

  friend bool operator==(const EscalationRecord&,
                         const EscalationRecord&) = default;
};

// Cause when the ticket is the sole attachment of a record, Cascade when every
// record holding it has two or more attachments, None when it is in no record.
// A ticket that is the sole attachment of two different records is ambiguous
// and raises a validation error naming both records.
EscalationType ClassifyEscalationType(
    std::string_view ticket_id, std::span<const EscalationRecord> records);

inline constexpr std::size_t kFeatureCount = 22;

enum class Feature : std::size_t {
  kNumberOfEntries,
  kDaysOpen,
  kPmrOwnershipLevel,
  kNumSupportContacts,
  kNumSeverityIncreases,
  kNumSeverityDecreases,
  kNumSevXToSev1,
  kTimeUntilFirstContactMin,
  kAvgSupportResponseMin,
  kDiffAvgVsExpectedMin,
  kDaysSinceLastContact,
  kNumClosedPmrs,
  kNumClosedCritsits,
  kCritsitToPmrRatio,
  kExpectedResponseMin,
  kNumOpenPmrs,
  kPmrsOpenedLastX,
  kPmrsClosedLastX,
  kCritsitsOpen,
  kCritsitsOpenedLastX,
  kCritsitsClosedLastX,
  kExpectedResponseLastXMin,
};

inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "number_of_entries",
    "days_open",
    "pmr_ownership_level",
    "num_support_contacts",
    "num_severity_increases",
    "num_severity_decreases",
    "num_sevX_to_sev1",
    "time_until_first_contact_min",
    "avg_support_response_min",
    "diff_avg_vs_expected_min",
    "days_since_last_contact",
    "num_closed_pmrs",
    "num_closed_critsits",
    "critsit_to_pmr_ratio",
    "expected_response_min",
    "num_open_pmrs",
    "pmrs_opened_last_X",
    "pmrs_closed_last_X",
    "critsits_open",
    "critsits_opened_last_X",
    "critsits_closed_last_X",
    "expected_response_last_X_min",
};

// Human-readable labels matching the support ticket model's feature table.
extern const std::array<std::string_view, kFeatureCount> kFeatureLabels;

// First index of the customer-profile block.
inline constexpr std::size_t kFirstProfileFeature =
    static_cast<std::size_t>(Feature::kNumClosedPmrs);

struct FeatureVector {
  std::array<double, kFeatureCount> values{};

  double& operator[](Feature f) { return values[static_cast<std::size_t>(f)]; }
  double operator[](Feature f) const {
    return values[static_cast<std::size_t>(f)];
  }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

// Classifier confidence expressed as a whole percentage.
struct EscalationRisk {
  int er = 0;
  bool predicted_crit = false;

  static EscalationRisk FromConfidence(double confidence);
  static EscalationRisk FromPercent(int er);
};

}  // namespace escalade

#endif  // ESCALADE_MODEL_HPP_
