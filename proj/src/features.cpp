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

#include "features.hpp"

#include <algorithm>
#include <charconv>
#include <ostream>

#include "error.hpp"

namespace escalade {

ProfileWindow::ProfileWindow(int months) : months_(months) {
  if (months < 1) {
    Fail(ErrorCode::kValidation,
         "profile window must be >= 1 month, got " + std::to_string(months));
  }
}

std::vector<Snapshot> Snapshots(const SupportTicket& ticket) {
  std::vector<Snapshot> out;
  out.reserve(ticket.events.size());
  for (std::size_t i = 0; i < ticket.events.size(); ++i) {
    out.push_back(SnapshotAt(ticket, i));
  }
  return out;
}

Snapshot SnapshotAt(const SupportTicket& ticket, std::size_t index) {
  if (index >= ticket.events.size()) {
    Fail(ErrorCode::kValidation, "snapshot " + std::to_string(index) +
                                     " out of range for " + ticket.ticket_id);
  }
  return Snapshot{ticket.ticket_id, static_cast<std::int64_t>(index),
                  ticket.events[index].timestamp};
}

SupportTicket Truncate(const SupportTicket& ticket, std::size_t index) {
  SupportTicket out = ticket;
  out.events.resize(std::min(index + 1, ticket.events.size()));
  return out;
}

void TicketReplay::Apply(const TicketEvent& event) {
  ++entries_;
  as_of_ = event.timestamp;
  switch (event.kind) {
    case EventKind::kOpened:
      opened_at_ = event.timestamp;
      severity_ = event.severity->value();
      level_ = event.level->level();
      break;
    case EventKind::kCustomerMessage:
      if (!pending_run_start_) pending_run_start_ = event.timestamp;
      last_contact_ = event.timestamp;
      break;
    case EventKind::kSupportMessage:
      support_actors_.insert(event.actor_id);
      if (!first_support_) first_support_ = event.timestamp;
      if (pending_run_start_) {
        response_sum_ += static_cast<double>(event.timestamp - *pending_run_start_);
        ++response_pairs_;
        pending_run_start_.reset();
      }
      last_contact_ = event.timestamp;
      break;
    case EventKind::kSeverityChange: {
      const int next = event.severity->value();
      if (severity_) {
        if (next < *severity_) {
          ++increases_;
          if (next == 1) ++to_sev1_;
        } else if (next > *severity_) {
          ++decreases_;
        }
      }
      severity_ = next;
      break;
    }
    case EventKind::kOwnershipChange:
      level_ = event.level->level();
      break;
    case EventKind::kClosed:
      break;
  }
}

BasicFeatures TicketReplay::basic() const {
  return BasicFeatures{
      static_cast<double>(entries_),
      static_cast<double>(as_of_ - opened_at_) / kMinutesPerDay,
      static_cast<double>(level_),
  };
}

ProcessFeatures TicketReplay::process() const {
  return ProcessFeatures{
      static_cast<double>(support_actors_.size()),
      static_cast<double>(increases_),
      static_cast<double>(decreases_),
      static_cast<double>(to_sev1_),
  };
}

double TicketReplay::avg_response_min() const {
  return response_pairs_ == 0 ? 0.0
                              : response_sum_ / static_cast<double>(response_pairs_);
}

TimeFeatures TicketReplay::time(double expected_response_min) const {
  TimeFeatures out;
  // Before any support contact the customer is still waiting: report the
  // elapsed time so far.
  out.time_until_first_contact_min =
      static_cast<double>(first_support_.value_or(as_of_) - opened_at_);
  out.avg_support_response_min = avg_response_min();
  out.diff_avg_vs_expected_min =
      expected_response_min - out.avg_support_response_min;
  out.days_since_last_contact =
      static_cast<double>(as_of_ - last_contact_.value_or(opened_at_)) /
      kMinutesPerDay;
  return out;
}

namespace {

TicketReplay ReplayPrefix(const SupportTicket& ticket, const Snapshot& snap) {
  if (snap.ticket_id != ticket.ticket_id || snap.upto_seq < 0 ||
      static_cast<std::size_t>(snap.upto_seq) >= ticket.events.size()) {
    Fail(ErrorCode::kValidation, "snapshot does not belong to ticket " +
                                     ticket.ticket_id);
  }
  TicketReplay replay;
  for (std::int64_t i = 0; i <= snap.upto_seq; ++i) {
    replay.Apply(ticket.events[static_cast<std::size_t>(i)]);
  }
  return replay;
}

}  // namespace

BasicFeatures ComputeBasicFeatures(const SupportTicket& ticket,
                                   const Snapshot& snap) {
  return ReplayPrefix(ticket, snap).basic();
}

ProcessFeatures ComputeProcessFeatures(const SupportTicket& ticket,
                                       const Snapshot& snap) {
  return ReplayPrefix(ticket, snap).process();
}

TimeFeatures ComputeTimeFeatures(const SupportTicket& ticket,
                                 const Snapshot& snap,
                                 const ProfileFeatures& profile) {
  return ReplayPrefix(ticket, snap).time(profile.expected_response_min);
}

FeatureContext::FeatureContext(const Corpus& corpus) : corpus_(&corpus) {
  double sum = 0;
  std::int64_t n = 0;
  for (const auto& [cid, ids] : corpus.customers()) {
    auto& list = by_customer_[cid];
    list.reserve(ids.size());
    for (const auto& id : ids) {
      const SupportTicket& t = corpus.ticket(id);
      History h;
      h.opened_at = t.opened_at();
      if (t.closed()) h.closed_at = t.events.back().timestamp;
      h.critsit_at = corpus.escalated_at(id);
      TicketReplay replay;
      for (const auto& ev : t.events) replay.Apply(ev);
      if (replay.response_pairs() > 0) {
        h.avg_response_min = replay.avg_response_min();
        if (h.closed_at) {
          sum += *h.avg_response_min;
          ++n;
        }
      }
      list.push_back(h);
    }
  }
  global_expected_ = n == 0 ? 0.0 : sum / static_cast<double>(n);
}

ProfileFeatures FeatureContext::Profile(std::string_view customer_id,
                                        Minutes as_of,
                                        ProfileWindow window) const {
  auto it = by_customer_.find(std::string(customer_id));
  if (it == by_customer_.end()) {
    Fail(ErrorCode::kNotFound, "unknown customer " + std::string(customer_id));
  }
  const Minutes window_start = as_of - window.minutes();
  const auto in_window = [&](Minutes t) {
    return t >= window_start && t < as_of;
  };

  ProfileFeatures p;
  double expected_sum = 0, expected_window_sum = 0;
  std::int64_t expected_n = 0, expected_window_n = 0;
  for (const History& h : it->second) {
    if (h.opened_at >= as_of) break;  // sorted by open time
    const bool closed = h.closed_at && *h.closed_at < as_of;
    const bool crit = h.critsit_at && *h.critsit_at < as_of;
    if (in_window(h.opened_at)) ++p.pmrs_opened_last_x;
    if (closed) {
      ++p.num_closed_pmrs;
      const bool closed_in_window = in_window(*h.closed_at);
      if (closed_in_window) ++p.pmrs_closed_last_x;
      if (crit) {
        ++p.num_closed_critsits;
        if (closed_in_window) ++p.critsits_closed_last_x;
      }
      if (h.avg_response_min) {
        expected_sum += *h.avg_response_min;
        ++expected_n;
        if (closed_in_window) {
          expected_window_sum += *h.avg_response_min;
          ++expected_window_n;
        }
      }
    } else {
      ++p.num_open_pmrs;
      if (crit) ++p.critsits_open;
    }
    if (crit && in_window(*h.critsit_at)) ++p.critsits_opened_last_x;
  }
  p.critsit_to_pmr_ratio =
      p.num_closed_pmrs == 0 ? 0.0 : p.num_closed_critsits / p.num_closed_pmrs;
  p.expected_response_min = expected_n == 0
                                ? global_expected_
                                : expected_sum / static_cast<double>(expected_n);
  p.expected_response_last_x_min =
      expected_window_n == 0
          ? p.expected_response_min
          : expected_window_sum / static_cast<double>(expected_window_n);
  return p;
}

FeatureVector AssembleFeatureVector(const BasicFeatures& basic,
                                    const ProcessFeatures& process,
                                    const TimeFeatures& time,
                                    const ProfileFeatures& profile) {
  return FeatureVector{{
      basic.number_of_entries,
      basic.days_open,
      basic.pmr_ownership_level,
      process.num_support_contacts,
      process.num_severity_increases,
      process.num_severity_decreases,
      process.num_sevX_to_sev1,
      time.time_until_first_contact_min,
      time.avg_support_response_min,
      time.diff_avg_vs_expected_min,
      time.days_since_last_contact,
      profile.num_closed_pmrs,
      profile.num_closed_critsits,
      profile.critsit_to_pmr_ratio,
      profile.expected_response_min,
      profile.num_open_pmrs,
      profile.pmrs_opened_last_x,
      profile.pmrs_closed_last_x,
      profile.critsits_open,
      profile.critsits_opened_last_x,
      profile.critsits_closed_last_x,
      profile.expected_response_last_x_min,
  }};
}

FeatureVector ComputeFeatureVector(const FeatureContext& ctx,
                                   const SupportTicket& ticket,
                                   const Snapshot& snap, ProfileWindow window) {
  const TicketReplay replay = ReplayPrefix(ticket, snap);
  const ProfileFeatures profile =
      ctx.Profile(ticket.customer_id, ticket.opened_at(), window);
  return AssembleFeatureVector(replay.basic(), replay.process(),
                               replay.time(profile.expected_response_min),
                               profile);
}

std::vector<FeatureVector> ComputeSnapshotVectors(const FeatureContext& ctx,
                                                  const SupportTicket& ticket,
                                                  ProfileWindow window) {
  const ProfileFeatures profile =
      ctx.Profile(ticket.customer_id, ticket.opened_at(), window);
  std::vector<FeatureVector> out;
  out.reserve(ticket.events.size());
  TicketReplay replay;
  for (const auto& ev : ticket.events) {
    replay.Apply(ev);
    out.push_back(AssembleFeatureVector(
        replay.basic(), replay.process(),
        replay.time(profile.expected_response_min), profile));
  }
  return out;
}

std::size_t FinalSnapshotIndex(const Corpus& corpus,
                               const SupportTicket& ticket) {
  const std::size_t n = ticket.events.size();
  if (const auto crit_at = corpus.escalated_at(ticket.ticket_id)) {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (ticket.events[i].timestamp < *crit_at) idx = i;
    }
    return idx;
  }
  if (ticket.closed() && n > 1) return n - 2;
  return n - 1;
}

std::vector<LabeledSnapshot> ExtractRows(const FeatureContext& ctx,
                                         ProfileWindow window,
                                         bool all_snapshots) {
  std::vector<LabeledSnapshot> rows;
  const Corpus& corpus = ctx.corpus();
  for (const auto& [id, ticket] : corpus.tickets()) {
    if (all_snapshots) {
      const auto vectors = ComputeSnapshotVectors(ctx, ticket, window);
      for (std::size_t i = 0; i < vectors.size(); ++i) {
        rows.push_back({id, static_cast<std::int64_t>(i), vectors[i],
                        ticket.escalated()});
      }
    } else {
      const std::size_t idx = FinalSnapshotIndex(corpus, ticket);
      rows.push_back({id, static_cast<std::int64_t>(idx),
                      ComputeFeatureVector(ctx, ticket,
                                           SnapshotAt(ticket, idx), window),
                      ticket.escalated()});
    }
  }
  return rows;
}

std::string FormatNumber(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

void WriteFeatureCsv(std::ostream& out, std::span<const LabeledSnapshot> rows) {
  for (const auto name : kFeatureNames) out << name << ',';
  out << "ticket_id,upto_seq,label\n";
  for (const auto& row : rows) {
    for (const double v : row.features.values) out << FormatNumber(v) << ',';
    out << row.ticket_id << ',' << row.upto_seq << ',' << (row.label ? 1 : 0)
        << '\n';
  }
}

}  // namespace escalade
