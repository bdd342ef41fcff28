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

// Snapshot expansion and computation of the 22-field feature vector.
//
// Ticket-level features (basic, process, time) are replayed from the events
// of a snapshot prefix. Customer-profile features are frozen at the ticket's
// open time and only look at other tickets strictly before it.

#ifndef ESCALADE_FEATURES_HPP_
#define ESCALADE_FEATURES_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "ingest.hpp"
#include "model.hpp"

namespace escalade {

struct Snapshot {
  std::string ticket_id;
  std::int64_t upto_seq = 0;
  Minutes as_of = 0;

  friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

// The "X months" of the windowed profile features. A month is 30 days.
class ProfileWindow {
 public:
  static constexpr int kDefaultMonths = 6;

  explicit ProfileWindow(int months = kDefaultMonths);
  int months() const { return months_; }
  Minutes minutes() const { return months_ * kMinutesPerMonth; }

 private:
  int months_;
};

std::vector<Snapshot> Snapshots(const SupportTicket& ticket);
Snapshot SnapshotAt(const SupportTicket& ticket, std::size_t index);

// Copy of the ticket keeping events 0..index.
SupportTicket Truncate(const SupportTicket& ticket, std::size_t index);

struct BasicFeatures {
  double number_of_entries = 0;
  double days_open = 0;
  double pmr_ownership_level = 0;
};

struct ProcessFeatures {
  double num_support_contacts = 0;
  // An increase moves the severity value toward 1.
  double num_severity_increases = 0;
  double num_severity_decreases = 0;
  double num_sevX_to_sev1 = 0;
};

struct TimeFeatures {
  double time_until_first_contact_min = 0;
  double avg_support_response_min = 0;
  double diff_avg_vs_expected_min = 0;
  double days_since_last_contact = 0;
};

struct ProfileFeatures {
  double num_closed_pmrs = 0;
  double num_closed_critsits = 0;
  double critsit_to_pmr_ratio = 0;
  double expected_response_min = 0;
  double num_open_pmrs = 0;
  double pmrs_opened_last_x = 0;
  double pmrs_closed_last_x = 0;
  double critsits_open = 0;
  double critsits_opened_last_x = 0;
  double critsits_closed_last_x = 0;
  double expected_response_last_x_min = 0;
};

// Incremental replay of one ticket's events. Feeding events 0..i yields the
// features of snapshot i.
class TicketReplay {
 public:
  void Apply(const TicketEvent& event);

  BasicFeatures basic() const;
  ProcessFeatures process() const;
  // `expected_response_min` comes from the customer profile.
  TimeFeatures time(double expected_response_min) const;

  // Response-pair statistics so far.
  std::int64_t response_pairs() const { return response_pairs_; }
  double avg_response_min() const;

 private:
  std::int64_t entries_ = 0;
  Minutes opened_at_ = 0;
  Minutes as_of_ = 0;
  int level_ = 0;
  std::optional<int> severity_;
  std::int64_t increases_ = 0;
  std::int64_t decreases_ = 0;
  std::int64_t to_sev1_ = 0;
  std::set<std::string> support_actors_;
  std::optional<Minutes> first_support_;
  std::optional<Minutes> pending_run_start_;
  std::optional<Minutes> last_contact_;
  double response_sum_ = 0;
  std::int64_t response_pairs_ = 0;
};

BasicFeatures ComputeBasicFeatures(const SupportTicket& ticket,
                                   const Snapshot& snap);
ProcessFeatures ComputeProcessFeatures(const SupportTicket& ticket,
                                       const Snapshot& snap);
TimeFeatures ComputeTimeFeatures(const SupportTicket& ticket,
                                 const Snapshot& snap,
                                 const ProfileFeatures& profile);

// Per-ticket history summaries plus the corpus-wide expected-response
// fallback, computed once per corpus.
class FeatureContext {
 public:
  explicit FeatureContext(const Corpus& corpus);

  const Corpus& corpus() const { return *corpus_; }
  double global_expected_response_min() const { return global_expected_; }

  // `as_of` is the open time of the ticket being featurized.
  ProfileFeatures Profile(std::string_view customer_id, Minutes as_of,
                          ProfileWindow window) const;

 private:
  struct History {
    Minutes opened_at = 0;
    std::optional<Minutes> closed_at;
    std::optional<Minutes> critsit_at;
    std::optional<double> avg_response_min;
  };

  const Corpus* corpus_;
  std::unordered_map<std::string, std::vector<History>> by_customer_;
  double global_expected_ = 0;
};

FeatureVector AssembleFeatureVector(const BasicFeatures& basic,
                                    const ProcessFeatures& process,
                                    const TimeFeatures& time,
                                    const ProfileFeatures& profile);

FeatureVector ComputeFeatureVector(const FeatureContext& ctx,
                                   const SupportTicket& ticket,
                                   const Snapshot& snap, ProfileWindow window);

// One vector per snapshot, in a single replay pass.
std::vector<FeatureVector> ComputeSnapshotVectors(const FeatureContext& ctx,
                                                  const SupportTicket& ticket,
                                                  ProfileWindow window);

// Index of the snapshot used as a ticket's training row: the last event
// strictly before the escalation for escalated tickets, the event before the
// closing event for closed tickets, the last event otherwise.
std::size_t FinalSnapshotIndex(const Corpus& corpus,
                               const SupportTicket& ticket);

struct LabeledSnapshot {
  std::string ticket_id;
  std::int64_t upto_seq = 0;
  FeatureVector features;
  bool label = false;
};

// Final-snapshot rows, or every snapshot when `all_snapshots` is set.
// Tickets are visited in id order.
std::vector<LabeledSnapshot> ExtractRows(const FeatureContext& ctx,
                                         ProfileWindow window,
                                         bool all_snapshots);

// Header: the 22 feature names, then ticket_id, upto_seq, label.
void WriteFeatureCsv(std::ostream& out, std::span<const LabeledSnapshot> rows);

// Shortest round-trip decimal form.
std::string FormatNumber(double value);

}  // namespace escalade

#endif  // ESCALADE_FEATURES_HPP_
