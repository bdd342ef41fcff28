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

#include <gtest/gtest.h>

#include <sstream>

#include "features.hpp"
#include "ingest.hpp"
#include "rng.hpp"
#include "synth.hpp"
#include "test_util.hpp"

namespace escalade {
namespace {

using testing::Ev;
using testing::ExpectError;
using testing::Open;

constexpr Minutes kDay = kMinutesPerDay;

SupportTicket MakeTicket(std::vector<TicketEvent> events) {
  SupportTicket t;
  t.ticket_id = events.front().ticket_id;
  t.customer_id = events.front().customer_id;
  t.events = std::move(events);
  return t;
}

Corpus GeneratedCorpus(std::uint64_t seed, bool cascades = false) {
  GenConfig g;
  g.n_customers = 15;
  g.tickets_mean = 25;
  g.target_imbalance = 8;
  g.cascade_enabled = cascades;
  g.seed = seed;
  auto gen = Generate(g);
  return Corpus::Build(std::move(gen.events), std::move(gen.records));
}

TEST(Snapshots, OnePerEvent) {
  auto one = MakeTicket({Open("T1", 0, "C1")});
  EXPECT_EQ(Snapshots(one).size(), 1u);
  std::vector<TicketEvent> events = {Open("T1", 0, "C1")};
  for (int i = 1; i < 16; ++i) {
    events.push_back(Ev("T1", i, i * 10, EventKind::kCustomerMessage, "C1"));
  }
  const auto snaps = Snapshots(MakeTicket(events));
  ASSERT_EQ(snaps.size(), 16u);
  for (std::size_t i = 0; i < snaps.size(); ++i) {
    EXPECT_EQ(snaps[i].upto_seq, static_cast<std::int64_t>(i));
    EXPECT_EQ(snaps[i].as_of, static_cast<Minutes>(i * 10));
  }
  ExpectError([&] { SnapshotAt(one, 1); }, ErrorCode::kValidation, "out of range");
}

TEST(ProfileWindow, RejectsZero) {
  ExpectError([] { ProfileWindow(0); }, ErrorCode::kValidation);
  EXPECT_EQ(ProfileWindow().months(), 6);
  EXPECT_EQ(ProfileWindow(2).minutes(), 2 * 43200);
}

TEST(BasicFeatures, SnapshotZero) {
  auto t = MakeTicket({Open("T1", 500, "C1", 2, 2),
                       Ev("T1", 1, 900, EventKind::kCustomerMessage, "C1")});
  const auto b = ComputeBasicFeatures(t, SnapshotAt(t, 0));
  EXPECT_EQ(b.number_of_entries, 1);
  EXPECT_EQ(b.days_open, 0);
  EXPECT_EQ(b.pmr_ownership_level, 2);
}

TEST(BasicFeatures, OwnershipChange) {
  auto t = MakeTicket({Open("T1", 0, "C1", 3, 2),
                       Ev("T1", 1, 2 * kDay, EventKind::kOwnershipChange, "S1",
                          std::nullopt, 3)});
  const auto b = ComputeBasicFeatures(t, SnapshotAt(t, 1));
  EXPECT_EQ(b.number_of_entries, 2);
  EXPECT_DOUBLE_EQ(b.days_open, 2.0);
  EXPECT_EQ(b.pmr_ownership_level, 3);
}

TEST(BasicFeatures, FractionalDays) {
  auto t = MakeTicket({Open("T1", 0, "C1"),
                       Ev("T1", 1, 36 * 60, EventKind::kCustomerMessage, "C1")});
  EXPECT_DOUBLE_EQ(ComputeBasicFeatures(t, SnapshotAt(t, 1)).days_open, 1.5);
}

TEST(ProcessFeatures, SeverityPath) {
  // 4 -> 3 -> 1 -> 2 -> 1
  auto t = MakeTicket({Open("T1", 0, "C1", 4),
                       Ev("T1", 1, 1, EventKind::kSeverityChange, "C1", 3),
                       Ev("T1", 2, 2, EventKind::kSeverityChange, "C1", 1),
                       Ev("T1", 3, 3, EventKind::kSeverityChange, "C1", 2),
                       Ev("T1", 4, 4, EventKind::kSeverityChange, "C1", 1)});
  const auto p = ComputeProcessFeatures(t, SnapshotAt(t, 4));
  EXPECT_EQ(p.num_severity_increases, 3);
  EXPECT_EQ(p.num_severity_decreases, 1);
  EXPECT_EQ(p.num_sevX_to_sev1, 2);
  EXPECT_EQ(p.num_support_contacts, 0);
}

TEST(ProcessFeatures, DistinctSupportContacts) {
  auto t = MakeTicket({Open("T1", 0, "C1"),
                       Ev("T1", 1, 1, EventKind::kSupportMessage, "S1"),
                       Ev("T1", 2, 2, EventKind::kSupportMessage, "S1"),
                       Ev("T1", 3, 3, EventKind::kOwnershipChange, "S2", std::nullopt, 2)});
  EXPECT_EQ(ComputeProcessFeatures(t, SnapshotAt(t, 2)).num_support_contacts, 1);
  // Ownership changes do not count as contact.
  EXPECT_EQ(ComputeProcessFeatures(t, SnapshotAt(t, 3)).num_support_contacts, 1);
}

TEST(ProcessFeatures, UnitStepTransitionIdentity) {
  // increases - decreases = initial - current, on paths that move one
  // severity step at a time.
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    int sev = 1 + static_cast<int>(rng.Uniform(4));
    const int initial = sev;
    std::vector<TicketEvent> events = {Open("T1", 0, "C1", sev)};
    for (int i = 1; i < 20; ++i) {
      int next = sev + (rng.Bernoulli(0.5) ? 1 : -1);
      if (next < 1 || next > 4) next = sev + (sev == 1 ? 1 : -1);
      sev = next;
      events.push_back(Ev("T1", i, i, EventKind::kSeverityChange, "C1", sev));
    }
    const auto t = MakeTicket(events);
    int current = initial;
    for (std::size_t i = 0; i < t.events.size(); ++i) {
      if (t.events[i].severity) current = t.events[i].severity->value();
      const auto p = ComputeProcessFeatures(t, SnapshotAt(t, i));
      ASSERT_EQ(p.num_severity_increases - p.num_severity_decreases, initial - current);
    }
  }
}

TEST(ProcessFeatures, MultiStepJumpBreaksNaiveIdentity) {
  // A direct 4 -> 1 jump is one increase but three severity steps.
  auto t = MakeTicket({Open("T1", 0, "C1", 4),
                       Ev("T1", 1, 1, EventKind::kSeverityChange, "C1", 1)});
  const auto p = ComputeProcessFeatures(t, SnapshotAt(t, 1));
  EXPECT_EQ(p.num_severity_increases, 1);
  EXPECT_EQ(p.num_sevX_to_sev1, 1);
}

TEST(TimeFeatures, FirstContact) {
  auto t = MakeTicket({Open("T1", 0, "C1"),
                       Ev("T1", 1, 120, EventKind::kSupportMessage, "S1")});
  EXPECT_EQ(ComputeTimeFeatures(t, SnapshotAt(t, 1), {}).time_until_first_contact_min,
            120);
}

TEST(TimeFeatures, ElapsedSentinelBeforeContact) {
  auto t = MakeTicket({Open("T1", 0, "C1"),
                       Ev("T1", 1, 300, EventKind::kCustomerMessage, "C1")});
  const auto tf = ComputeTimeFeatures(t, SnapshotAt(t, 1), {});
  EXPECT_EQ(tf.time_until_first_contact_min, 300);
  EXPECT_EQ(tf.avg_support_response_min, 0);
}

TEST(TimeFeatures, ResponsePairing) {
  auto t = MakeTicket({Open("T1", 0, "C1"),
                       Ev("T1", 1, 10, EventKind::kCustomerMessage, "C1"),
                       Ev("T1", 2, 20, EventKind::kCustomerMessage, "C1"),
                       Ev("T1", 3, 50, EventKind::kSupportMessage, "S1")});
  ProfileFeatures profile;
  profile.expected_response_min = 100;
  const auto tf = ComputeTimeFeatures(t, SnapshotAt(t, 3), profile);
  EXPECT_DOUBLE_EQ(tf.avg_support_response_min, 40);
  EXPECT_DOUBLE_EQ(tf.diff_avg_vs_expected_min, 60);
  EXPECT_DOUBLE_EQ(tf.days_since_last_contact, 0);
}

TEST(TimeFeatures, ZeroPairsUsesZeroAverage) {
  auto t = MakeTicket({Open("T1", 0, "C1"),
                       Ev("T1", 1, 30, EventKind::kSupportMessage, "S1")});
  ProfileFeatures profile;
  profile.expected_response_min = 75;
  const auto tf = ComputeTimeFeatures(t, SnapshotAt(t, 1), profile);
  EXPECT_EQ(tf.avg_support_response_min, 0);
  EXPECT_EQ(tf.diff_avg_vs_expected_min, 75);
}

// Builds a customer with `closed` closed tickets, `crits` of which escalated,
// then one new ticket opened afterwards.
Corpus HistoryCorpus(int closed, int crits) {
  std::vector<TicketEvent> events;
  std::vector<EscalationRecord> records;
  for (int i = 0; i < closed; ++i) {
    const std::string id = "H" + std::to_string(i);
    const Minutes t0 = i * kDay;
    events.push_back(Open(id, t0, "C1"));
    events.push_back(Ev(id, 1, t0 + 10, EventKind::kCustomerMessage, "C1"));
    events.push_back(Ev(id, 2, t0 + 10 + 20 * (i + 1), EventKind::kSupportMessage, "S1"));
    events.push_back(Ev(id, 3, t0 + 600, EventKind::kClosed, "S1"));
    if (i < crits) records.push_back({"X" + std::to_string(i), t0 + 300, {id}});
  }
  events.push_back(Open("NEW", 100 * kDay, "C1"));
  events.push_back(Ev("NEW", 1, 100 * kDay + 5, EventKind::kCustomerMessage, "C1"));
  events.push_back(Open("OTHER", 0, "C2"));
  return Corpus::Build(events, records);
}

TEST(ProfileFeatures, Ratio) {
  const auto corpus = HistoryCorpus(4, 1);
  const FeatureContext ctx(corpus);
  const auto p = ctx.Profile("C1", corpus.ticket("NEW").opened_at(), ProfileWindow());
  EXPECT_EQ(p.num_closed_pmrs, 4);
  EXPECT_EQ(p.num_closed_critsits, 1);
  EXPECT_DOUBLE_EQ(p.critsit_to_pmr_ratio, 0.25);
  EXPECT_EQ(p.num_open_pmrs, 0);
  // Per-ticket averages 20, 40, 60, 80.
  EXPECT_DOUBLE_EQ(p.expected_response_min, 50);
}

TEST(ProfileFeatures, BrandNewCustomer) {
  const auto corpus = HistoryCorpus(4, 1);
  const FeatureContext ctx(corpus);
  const auto p = ctx.Profile("C2", 0, ProfileWindow());
  EXPECT_EQ(p.num_closed_pmrs, 0);
  EXPECT_EQ(p.num_closed_critsits, 0);
  EXPECT_EQ(p.critsit_to_pmr_ratio, 0);
  EXPECT_EQ(p.num_open_pmrs, 0);
  EXPECT_EQ(p.pmrs_opened_last_x, 0);
  EXPECT_EQ(p.critsits_open, 0);
  EXPECT_DOUBLE_EQ(p.expected_response_min, ctx.global_expected_response_min());
  EXPECT_DOUBLE_EQ(p.expected_response_last_x_min, p.expected_response_min);
  EXPECT_DOUBLE_EQ(ctx.global_expected_response_min(), 50);
  ExpectError([&] { ctx.Profile("C9", 0, ProfileWindow()); }, ErrorCode::kNotFound,
              "C9");
}

TEST(ProfileFeatures, WindowedCounts) {
  const auto corpus = HistoryCorpus(4, 2);
  const FeatureContext ctx(corpus);
  // As of day 3.5: tickets H0..H3 opened on days 0..3; H3 still open until
  // day 3 + 600 minutes, which is before 3.5 days.
  const Minutes as_of = 3 * kDay + 720;
  const auto wide = ctx.Profile("C1", as_of, ProfileWindow(1));
  EXPECT_EQ(wide.pmrs_opened_last_x, 4);
  EXPECT_EQ(wide.pmrs_closed_last_x, 4);
  EXPECT_EQ(wide.critsits_opened_last_x, 2);
  EXPECT_EQ(wide.critsits_closed_last_x, 2);
  // Only tickets opened strictly before as_of count.
  const auto early = ctx.Profile("C1", 2 * kDay, ProfileWindow(1));
  EXPECT_EQ(early.pmrs_opened_last_x, 2);
  EXPECT_EQ(early.num_closed_pmrs, 2);
}

TEST(ProfileFeatures, OpenTicketsAndOpenCritsits) {
  std::vector<TicketEvent> events = {
      Open("A", 0, "C1"), Ev("A", 1, 50, EventKind::kCustomerMessage, "C1"),
      Open("B", 100, "C1")};
  const auto corpus = Corpus::Build(events, {{"X1", 20, {"A"}}});
  const FeatureContext ctx(corpus);
  const auto p = ctx.Profile("C1", 100, ProfileWindow());
  EXPECT_EQ(p.num_open_pmrs, 1);
  EXPECT_EQ(p.critsits_open, 1);
  EXPECT_EQ(p.critsits_opened_last_x, 1);
  EXPECT_EQ(p.num_closed_critsits, 0);
  EXPECT_EQ(p.critsit_to_pmr_ratio, 0);
}

TEST(FeatureVector, HandReplayOfSixEvents) {
  // Customer history: one closed ticket with a 30 minute response.
  std::vector<TicketEvent> events = {
      Open("H1", 0, "C1", 3, 1), Ev("H1", 1, 10, EventKind::kCustomerMessage, "C1"),
      Ev("H1", 2, 40, EventKind::kSupportMessage, "S9"),
      Ev("H1", 3, 100, EventKind::kClosed, "S9"),
      // Ticket under test, opened on day 10.
      Open("T1", 10 * kDay, "C1", 3, 1),
      Ev("T1", 1, 10 * kDay + 60, EventKind::kCustomerMessage, "C1"),
      Ev("T1", 2, 10 * kDay + 150, EventKind::kSupportMessage, "S1"),
      Ev("T1", 3, 10 * kDay + 200, EventKind::kSeverityChange, "C1", 1),
      Ev("T1", 4, 10 * kDay + 1440, EventKind::kOwnershipChange, "S2", std::nullopt, 2),
      Ev("T1", 5, 11 * kDay + 720, EventKind::kSupportMessage, "S2"),
  };
  const auto corpus = Corpus::Build(events, {});
  const FeatureContext ctx(corpus);
  const auto& t = corpus.ticket("T1");
  const auto x = ComputeFeatureVector(ctx, t, SnapshotAt(t, 5), ProfileWindow());
  // Worked by hand: one response pair (60 -> 150), the ownership change is
  // not a support contact, the history ticket responded in 30 minutes.
  const FeatureVector expected{{
      6, 1.5, 2,                     // basic
      2, 1, 0, 1,                    // process
      150, 90, 30 - 90, 0,           // time
      1, 0, 0, 30, 0, 1, 1, 0, 0, 0, 30,  // profile
  }};
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    EXPECT_DOUBLE_EQ(x[i], expected[i]) << kFeatureNames[i];
  }
  // Severity and ownership changes are not contact.
  const auto y = ComputeFeatureVector(ctx, t, SnapshotAt(t, 4), ProfileWindow());
  EXPECT_DOUBLE_EQ(y[Feature::kDaysSinceLastContact], (1440.0 - 150.0) / 1440.0);
}

TEST(FeatureVector, NewCustomerSnapshotZero) {
  const auto corpus = Corpus::Build({Open("T1", 0, "C1", 2, 0)}, {});
  const FeatureContext ctx(corpus);
  const auto& t = corpus.ticket("T1");
  const auto x = ComputeFeatureVector(ctx, t, SnapshotAt(t, 0), ProfileWindow());
  EXPECT_EQ(x[Feature::kNumberOfEntries], 1);
  EXPECT_EQ(x[Feature::kDaysOpen], 0);
  for (std::size_t i = static_cast<std::size_t>(Feature::kNumSupportContacts);
       i < kFeatureCount; ++i) {
    EXPECT_EQ(x[i], 0) << kFeatureNames[i];
  }
}

TEST(FeatureProperties, NoLookaheadAndSinglePassAgree) {
  const auto corpus = GeneratedCorpus(31, true);
  const FeatureContext ctx(corpus);
  for (const auto& [id, t] : corpus.tickets()) {
    const auto fast = ComputeSnapshotVectors(ctx, t, ProfileWindow());
    ASSERT_EQ(fast.size(), t.events.size());
    for (std::size_t i = 0; i < t.events.size(); ++i) {
      const auto cut = Truncate(t, i);
      const auto oracle =
          ComputeFeatureVector(ctx, cut, SnapshotAt(cut, cut.events.size() - 1),
                               ProfileWindow());
      ASSERT_EQ(fast[i], oracle) << id << "@" << i;
    }
  }
}

TEST(FeatureProperties, MonotoneCountersAndProfileFreeze) {
  const auto corpus = GeneratedCorpus(32);
  const FeatureContext ctx(corpus);
  const Feature counters[] = {Feature::kNumberOfEntries, Feature::kNumSeverityIncreases,
                              Feature::kNumSeverityDecreases, Feature::kNumSevXToSev1,
                              Feature::kNumSupportContacts};
  for (const auto& [id, t] : corpus.tickets()) {
    const auto v = ComputeSnapshotVectors(ctx, t, ProfileWindow());
    for (std::size_t i = 1; i < v.size(); ++i) {
      for (auto f : counters) ASSERT_GE(v[i][f], v[i - 1][f]) << id;
      for (std::size_t f = kFirstProfileFeature; f < kFeatureCount; ++f) {
        ASSERT_EQ(v[i][f], v[0][f]) << id << " " << kFeatureNames[f];
      }
    }
    for (const auto& x : v) {
      ASSERT_GE(x[Feature::kDaysOpen], 0);
      ASSERT_GE(x[Feature::kCritsitToPmrRatio], 0);
      ASSERT_LE(x[Feature::kCritsitToPmrRatio], 1);
    }
  }
}

TEST(FeatureProperties, WindowNesting) {
  const auto corpus = GeneratedCorpus(33, true);
  const FeatureContext ctx(corpus);
  for (const auto& [id, t] : corpus.tickets()) {
    for (int x1 = 1; x1 <= 12; x1 += 3) {
      const auto a = ctx.Profile(t.customer_id, t.opened_at(), ProfileWindow(x1));
      const auto b = ctx.Profile(t.customer_id, t.opened_at(), ProfileWindow(x1 + 2));
      ASSERT_LE(a.pmrs_opened_last_x, b.pmrs_opened_last_x);
      ASSERT_LE(a.pmrs_closed_last_x, b.pmrs_closed_last_x);
      ASSERT_LE(a.critsits_opened_last_x, b.critsits_opened_last_x);
      ASSERT_LE(a.critsits_closed_last_x, b.critsits_closed_last_x);
    }
  }
}

TEST(FinalSnapshot, EscalatedClosedAndOpenTickets) {
  std::vector<TicketEvent> events = {
      Open("E", 0, "C1"), Ev("E", 1, 10, EventKind::kCustomerMessage, "C1"),
      Ev("E", 2, 20, EventKind::kSupportMessage, "S1"),
      Ev("E", 3, 30, EventKind::kCustomerMessage, "C1"),
      Ev("E", 4, 40, EventKind::kClosed, "S1"),
      Open("N", 0, "C1"), Ev("N", 1, 5, EventKind::kCustomerMessage, "C1"),
      Ev("N", 2, 9, EventKind::kClosed, "S1"),
      Open("O", 0, "C1"), Ev("O", 1, 5, EventKind::kCustomerMessage, "C1")};
  const auto corpus = Corpus::Build(events, {{"X1", 30, {"E"}}});
  // Last event strictly before the escalation at t=30.
  EXPECT_EQ(FinalSnapshotIndex(corpus, corpus.ticket("E")), 2u);
  EXPECT_EQ(FinalSnapshotIndex(corpus, corpus.ticket("N")), 1u);
  EXPECT_EQ(FinalSnapshotIndex(corpus, corpus.ticket("O")), 1u);
}

TEST(ExtractRows, CsvLayout) {
  const auto corpus = GeneratedCorpus(34);
  const FeatureContext ctx(corpus);
  const auto rows = ExtractRows(ctx, ProfileWindow(), false);
  EXPECT_EQ(rows.size(), corpus.tickets().size());
  std::size_t snapshots = 0;
  for (const auto& [id, t] : corpus.tickets()) snapshots += t.events.size();
  EXPECT_EQ(ExtractRows(ctx, ProfileWindow(), true).size(), snapshots);

  std::ostringstream out;
  WriteFeatureCsv(out, rows);
  std::istringstream in(out.str());
  std::string header;
  std::getline(in, header);
  std::string expected;
  for (auto name : kFeatureNames) expected += std::string(name) + ",";
  expected += "ticket_id,upto_seq,label";
  EXPECT_EQ(header, expected);
  std::size_t lines = 0;
  for (std::string line; std::getline(in, line);) ++lines;
  EXPECT_EQ(lines, rows.size());
}

TEST(FormatNumber, ShortestRoundTrip) {
  EXPECT_EQ(FormatNumber(0.1), "0.1");
  EXPECT_EQ(FormatNumber(3), "3");
  EXPECT_EQ(FormatNumber(-60), "-60");
  EXPECT_EQ(std::stod(FormatNumber(1.0 / 3)), 1.0 / 3);
}

}  // namespace
}  // namespace escalade
