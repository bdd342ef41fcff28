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

#include "model.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"

namespace escalade {

Severity::Severity(int value) : value_(value) {
  if (value < 1 || value > 4) {
    Fail(ErrorCode::kValidation, "severity out of range [1,4]: " +
                                     std::to_string(value));
  }
}

SupportLevel::SupportLevel(int level) : level_(level) {
  if (level < 0 || level > 3) {
    Fail(ErrorCode::kValidation,
         "level out of range [0,3]: " + std::to_string(level));
  }
}

namespace {
constexpr std::array<std::pair<EventKind, std::string_view>, 6> kKindNames = {{
    {EventKind::kOpened, "opened"},
    {EventKind::kCustomerMessage, "customer_msg"},
    {EventKind::kSupportMessage, "support_msg"},
    {EventKind::kSeverityChange, "severity_change"},
    {EventKind::kOwnershipChange, "ownership_change"},
    {EventKind::kClosed, "closed"},
}};
}  // namespace

std::string_view EventKindName(EventKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<EventKind> ParseEventKind(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

bool KindCarriesSeverity(EventKind kind) {
  return kind == EventKind::kOpened || kind == EventKind::kSeverityChange;
}

bool KindCarriesLevel(EventKind kind) {
  return kind == EventKind::kOpened || kind == EventKind::kOwnershipChange;
}

std::string_view EscalationTypeName(EscalationType type) {
  switch (type) {
    case EscalationType::kNone:
      return "none";
    case EscalationType::kCause:
      return "cause";
    case EscalationType::kCascade:
      return "cascade";
  }
  return "none";
}

EscalationType ClassifyEscalationType(
    std::string_view ticket_id, std::span<const EscalationRecord> records) {
  std::vector<std::string_view> sole_owner_of;
  bool seen = false;
  for (const auto& record : records) {
    if (!record.attached_ticket_ids.contains(std::string(ticket_id))) continue;
    seen = true;
    if (record.attached_ticket_ids.size() == 1) {
      sole_owner_of.push_back(record.critsit_id);
    }
  }
  if (!seen) return EscalationType::kNone;
  if (sole_owner_of.size() > 1) {
    std::sort(sole_owner_of.begin(), sole_owner_of.end());
    std::string ids;
    for (const auto id : sole_owner_of) {
      if (!ids.empty()) ids += ",";
      ids += id;
    }
    Fail(ErrorCode::kValidation, "ambiguous escalation for ticket " +
                                     std::string(ticket_id) +
                                     ": sole attachment of records " + ids);
  }
  return sole_owner_of.empty() ? EscalationType::kCascade
                               : EscalationType::kCause;
}

const std::array<std::string_view, kFeatureCount> kFeatureLabels = {
    "Number of entries",
    "Days open",
    "PMR ownership level",
    "Number of support people in contact with customer",
    "Number of increases in severity",
    "Number of decreases in severity",
    "Number of sev4/sev3/sev2 to sev1 transitions",
    "Time until first contact",
    "Average support response time",
    "Difference in average vs expected response time",
    "Days since last contact",
    "Number of closed PMRs",
    "Number of closed CritSits",
    "CritSit to PMR ratio",
    "Expectation of support response time",
    "Number of open PMRs",
    "Number of PMRs opened in the last X months",
    "Number of PMRs closed in the last X months",
    "Number of open CritSits",
    "Number of CritSits opened in the last X months",
    "Number of CritSits closed in the last X months",
    "Expected support response time given the last X months",
};

EscalationRisk EscalationRisk::FromConfidence(double confidence) {
  return FromPercent(static_cast<int>(std::lround(confidence * 100.0)));
}

EscalationRisk EscalationRisk::FromPercent(int er) {
  er = std::clamp(er, 0, 100);
  return EscalationRisk{er, er > 50};
}

}  // namespace escalade
