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

#include <set>
#include <vector>

#include "error.hpp"
#include "model.hpp"
#include "rng.hpp"
#include "test_util.hpp"

namespace escalade {
namespace {

using testing::ExpectError;

EscalationRecord Rec(const std::string& id, std::set<std::string> tickets,
                     Minutes at = 0) {
  return EscalationRecord{id, at, std::move(tickets)};
}

TEST(Severity, AcceptsOneToFour) {
  for (int v = 1; v <= 4; ++v) EXPECT_EQ(Severity(v).value(), v);
}

TEST(Severity, RejectsOutOfRange) {
  ExpectError([] { Severity(5); }, ErrorCode::kValidation,
              "severity out of range [1,4]");
  ExpectError([] { Severity(0); }, ErrorCode::kValidation,
              "severity out of range [1,4]");
}

TEST(SupportLevel, AcceptsZeroToThree) {
  for (int v = 0; v <= 3; ++v) EXPECT_EQ(SupportLevel(v).level(), v);
  ExpectError([] { SupportLevel(4); }, ErrorCode::kValidation, "level out of range");
  ExpectError([] { SupportLevel(-1); }, ErrorCode::kValidation, "level out of range");
}

TEST(EventKind, WireNamesRoundTrip) {
  for (auto k : {EventKind::kOpened, EventKind::kCustomerMessage,
                 EventKind::kSupportMessage, EventKind::kSeverityChange,
                 EventKind::kOwnershipChange, EventKind::kClosed}) {
    EXPECT_EQ(ParseEventKind(EventKindName(k)), k);
  }
  EXPECT_EQ(EventKindName(EventKind::kCustomerMessage), "customer_msg");
  EXPECT_FALSE(ParseEventKind("reopened").has_value());
}

TEST(EventKind, ConditionalFields) {
  EXPECT_TRUE(KindCarriesSeverity(EventKind::kOpened));
  EXPECT_TRUE(KindCarriesSeverity(EventKind::kSeverityChange));
  EXPECT_FALSE(KindCarriesSeverity(EventKind::kOwnershipChange));
  EXPECT_TRUE(KindCarriesLevel(EventKind::kOpened));
  EXPECT_TRUE(KindCarriesLevel(EventKind::kOwnershipChange));
  EXPECT_FALSE(KindCarriesLevel(EventKind::kSupportMessage));
}

TEST(ClassifyEscalationType, AbsentTicketIsNone) {
  std::vector<EscalationRecord> recs = {Rec("C1", {"T2"})};
  EXPECT_EQ(ClassifyEscalationType("T1", recs), EscalationType::kNone);
  EXPECT_EQ(ClassifyEscalationType("T1", {}), EscalationType::kNone);
}

TEST(ClassifyEscalationType, SoleAttachmentIsCause) {
  std::vector<EscalationRecord> recs = {Rec("C1", {"T1"})};
  EXPECT_EQ(ClassifyEscalationType("T1", recs), EscalationType::kCause);
}

TEST(ClassifyEscalationType, MultiAttachmentIsCascade) {
  std::vector<EscalationRecord> recs = {Rec("C2", {"T2", "T3", "T4"})};
  for (const char* t : {"T2", "T3", "T4"}) {
    EXPECT_EQ(ClassifyEscalationType(t, recs), EscalationType::kCascade) << t;
  }
}

TEST(ClassifyEscalationType, CauseBeatsCascade) {
  std::vector<EscalationRecord> recs = {Rec("C1", {"T1", "T2"}), Rec("C2", {"T1"})};
  EXPECT_EQ(ClassifyEscalationType("T1", recs), EscalationType::kCause);
  EXPECT_EQ(ClassifyEscalationType("T2", recs), EscalationType::kCascade);
}

TEST(ClassifyEscalationType, TwoSoleAttachmentsAreAmbiguous) {
  std::vector<EscalationRecord> recs = {Rec("C7", {"T1"}), Rec("C9", {"T1"})};
  ExpectError([&] { ClassifyEscalationType("T1", recs); }, ErrorCode::kValidation,
              "C7,C9");
}

TEST(ClassifyEscalationType, CauseCountMatchesSingleRecordsWhenDisjoint) {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<EscalationRecord> recs;
    int next_ticket = 0;
    std::size_t singles = 0;
    const int n = 1 + static_cast<int>(rng.Uniform(12));
    for (int r = 0; r < n; ++r) {
      std::set<std::string> ids;
      const int size = 1 + static_cast<int>(rng.Uniform(4));
      for (int i = 0; i < size; ++i) ids.insert("T" + std::to_string(next_ticket++));
      singles += size == 1;
      recs.push_back(Rec("C" + std::to_string(r), ids));
    }
    std::size_t causes = 0;
    for (int t = 0; t < next_ticket + 3; ++t) {
      const auto type = ClassifyEscalationType("T" + std::to_string(t), recs);
      causes += type == EscalationType::kCause;
      // Pure function: the same inputs give the same answer.
      EXPECT_EQ(type, ClassifyEscalationType("T" + std::to_string(t), recs));
    }
    EXPECT_EQ(causes, singles);
  }
}

TEST(FeatureVector, FixedOrder) {
  ASSERT_EQ(kFeatureNames.size(), 22u);
  EXPECT_EQ(kFeatureNames.front(), "number_of_entries");
  EXPECT_EQ(kFeatureNames[static_cast<std::size_t>(Feature::kDiffAvgVsExpectedMin)],
            "diff_avg_vs_expected_min");
  EXPECT_EQ(kFeatureNames[kFirstProfileFeature], "num_closed_pmrs");
  EXPECT_EQ(kFeatureNames.back(), "expected_response_last_X_min");
  std::set<std::string_view> unique(kFeatureNames.begin(), kFeatureNames.end());
  EXPECT_EQ(unique.size(), 22u);
  for (auto label : kFeatureLabels) EXPECT_FALSE(label.empty());
}

TEST(EscalationRisk, FromConfidence) {
  auto r = EscalationRisk::FromConfidence(0.88);
  EXPECT_EQ(r.er, 88);
  EXPECT_TRUE(r.predicted_crit);
  r = EscalationRisk::FromConfidence(0.0);
  EXPECT_EQ(r.er, 0);
  EXPECT_FALSE(r.predicted_crit);
  r = EscalationRisk::FromConfidence(0.5);
  EXPECT_EQ(r.er, 50);
  EXPECT_FALSE(r.predicted_crit);
  r = EscalationRisk::FromConfidence(0.51);
  EXPECT_EQ(r.er, 51);
  EXPECT_TRUE(r.predicted_crit);
}

TEST(EscalationRisk, CritIffOverFiftyForEveryVoteFraction) {
  for (int n = 1; n <= 200; ++n) {
    for (int k = 0; k <= n; ++k) {
      const auto r = EscalationRisk::FromConfidence(double(k) / n);
      ASSERT_GE(r.er, 0);
      ASSERT_LE(r.er, 100);
      ASSERT_EQ(r.predicted_crit, r.er > 50) << k << "/" << n;
    }
  }
  EXPECT_EQ(EscalationRisk::FromPercent(150).er, 100);
  EXPECT_EQ(EscalationRisk::FromPercent(-3).er, 0);
}

TEST(Rng, DerivedStreamsDiffer) {
  EXPECT_NE(DeriveSeed(1, 0), DeriveSeed(1, 1));
  EXPECT_NE(DeriveSeed(1, 0), DeriveSeed(2, 0));
  Rng a(5), b(5);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(a.Next(), b.Next());
}

TEST(Rng, UniformStaysInBounds) {
  Rng rng(11);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) ++counts[rng.Uniform(7)];
  for (int c : counts) {
    EXPECT_GT(c, 9000);
    EXPECT_LT(c, 11000);
  }
}

}  // namespace
}  // namespace escalade
