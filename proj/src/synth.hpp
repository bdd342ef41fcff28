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

// Synthetic ticket corpora with a planted, learnable escalation signal.
//
// Each ticket is generated up to an outcome point. Its escalation odds are a
// logistic function of three planted families: a latent customer propensity
// (surfaces as CritSit history), severity escalation on the ticket, and slow
// support responses. The intercept is solved so the expected number of
// escalations matches the target imbalance. Escalated and non-escalated
// tickets share the same pre-outcome process, so a zero-weight corpus has no
// learnable signal.

#ifndef ESCALADE_SYNTH_HPP_
#define ESCALADE_SYNTH_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "model.hpp"

namespace escalade {

struct SignalWeights {
  double profile = 1.0;
  double process = 1.0;
  double time = 1.0;

  bool null() const { return profile == 0 && process == 0 && time == 0; }
};

struct GenConfig {
  int n_customers = 400;
  // Customer volumes are gamma distributed with this mean and squared
  // coefficient of variation; the total is exactly n_customers * mean.
  double tickets_mean = 125;
  double tickets_dispersion = 1.0;
  // Non-escalated tickets per cause escalation.
  double target_imbalance = 250;
  bool cascade_enabled = false;
  SignalWeights signal_weights;
  std::uint64_t seed = 1;
  Minutes start_minute = 23667840;  // 2015-01-01T00:00Z
  int horizon_days = 730;

  void Validate() const;
  std::size_t total_tickets() const;

  // Missing keys keep their defaults; unknown keys are rejected.
  static GenConfig FromJson(std::string_view text);
  std::string ToJson() const;
};

struct GeneratedCorpus {
  std::vector<TicketEvent> events;       // grouped by ticket id, seq order
  std::vector<EscalationRecord> records;  // by critsit id
  std::size_t cause_escalations = 0;
  double intercept = 0;
};

GeneratedCorpus Generate(const GenConfig& config);

// Attaches escalations for one customer. `escalations` holds (ticket index,
// time) cause events; a ticket already attached is skipped. With cascades,
// every other ticket open at the escalation time joins the same record.
struct TicketSpan {
  std::string ticket_id;
  Minutes opened_at = 0;
  Minutes closed_at = 0;
};
struct CauseEvent {
  std::size_t ticket = 0;
  Minutes at = 0;
};
std::vector<EscalationRecord> AttachEscalations(
    const std::vector<TicketSpan>& tickets, std::vector<CauseEvent> causes,
    bool cascade_enabled);

std::string Describe(const GenConfig& config);

}  // namespace escalade

#endif  // ESCALADE_SYNTH_HPP_
