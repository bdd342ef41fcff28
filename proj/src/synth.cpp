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

#include "synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "error.hpp"
#include "features.hpp"
#include "json.hpp"
#include "rng.hpp"

namespace escalade {

void GenConfig::Validate() const {
  if (n_customers < 1) Fail(ErrorCode::kValidation, "n_customers must be >= 1");
  if (!(tickets_mean > 0)) {
    Fail(ErrorCode::kValidation, "tickets_per_customer.mean must be > 0");
  }
  if (!(tickets_dispersion >= 0)) {
    Fail(ErrorCode::kValidation, "tickets_per_customer.dispersion must be >= 0");
  }
  if (!(target_imbalance >= 1)) {
    Fail(ErrorCode::kValidation, "target_imbalance must be >= 1");
  }
  if (horizon_days < 1) Fail(ErrorCode::kValidation, "horizon_days must be >= 1");
  for (const double w : {signal_weights.profile, signal_weights.process,
                         signal_weights.time}) {
    if (!std::isfinite(w)) {
      Fail(ErrorCode::kValidation, "signal weights must be finite");
    }
  }
  const double expected_positives =
      static_cast<double>(total_tickets()) / (1.0 + target_imbalance);
  if (expected_positives < 1.0) {
    Fail(ErrorCode::kValidation,
         "infeasible config: imbalance 1:" + FormatNumber(target_imbalance) +
             " is unreachable with " + std::to_string(total_tickets()) +
             " tickets");
  }
}

std::size_t GenConfig::total_tickets() const {
  return static_cast<std::size_t>(
      std::llround(static_cast<double>(n_customers) * tickets_mean));
}

GenConfig GenConfig::FromJson(std::string_view text) {
  const auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    Fail(ErrorCode::kValidation, "generator config must be a JSON object");
  }
  GenConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "n_customers") {
        c.n_customers = v.get<int>();
      } else if (key == "tickets_per_customer") {
        for (const auto& [k2, v2] : v.items()) {
          if (k2 == "mean") {
            c.tickets_mean = v2.get<double>();
          } else if (k2 == "dispersion") {
            c.tickets_dispersion = v2.get<double>();
          } else {
            Fail(ErrorCode::kValidation,
                 "unknown tickets_per_customer key \"" + k2 + "\"");
          }
        }
      } else if (key == "target_imbalance") {
        c.target_imbalance = v.get<double>();
      } else if (key == "cascade_enabled") {
        c.cascade_enabled = v.get<bool>();
      } else if (key == "signal_weights") {
        for (const auto& [family, w] : v.items()) {
          if (family == "profile") {
            c.signal_weights.profile = w.get<double>();
          } else if (family == "process") {
            c.signal_weights.process = w.get<double>();
          } else if (family == "time") {
            c.signal_weights.time = w.get<double>();
          } else {
            Fail(ErrorCode::kValidation,
                 "unknown signal family \"" + family + "\"");
          }
        }
      } else if (key == "seed") {
        c.seed = v.get<std::uint64_t>();
      } else if (key == "start_minute") {
        c.start_minute = v.get<Minutes>();
      } else if (key == "horizon_days") {
        c.horizon_days = v.get<int>();
      } else {
        Fail(ErrorCode::kValidation, "unknown generator config key \"" + key + "\"");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kValidation, std::string("generator config: ") + e.what());
  }
  return c;
}

std::string GenConfig::ToJson() const {
  nlohmann::ordered_json j;
  j["n_customers"] = n_customers;
  j["tickets_per_customer"] = {{"mean", tickets_mean},
                               {"dispersion", tickets_dispersion}};
  j["target_imbalance"] = target_imbalance;
  j["cascade_enabled"] = cascade_enabled;
  j["signal_weights"] = {{"profile", signal_weights.profile},
                         {"process", signal_weights.process},
                         {"time", signal_weights.time}};
  j["seed"] = seed;
  j["start_minute"] = start_minute;
  j["horizon_days"] = horizon_days;
  return j.dump(2) + "\n";
}

namespace {

// Generator tuning. Means are in minutes.
constexpr double kVolatileShare = 0.06;
constexpr double kVolatileShift = 4.0;
constexpr double kFirstContactMean = 240;
constexpr double kResponseMean = 180;
constexpr double kCustomerPauseMean = 2160;
constexpr double kOutcomeGapMean = 720;
constexpr double kPrefixRounds = 5;
constexpr double kPostEscalationRounds = 2;
constexpr int kSupportStaff = 60;

double Sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Minutes Gap(Rng& rng, double mean) {
  return 1 + static_cast<Minutes>(rng.Exponential(mean));
}

std::string PaddedId(char prefix, std::size_t n, int width) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%c%0*zu", prefix, width, n);
  return buf;
}

struct Draft {
  std::string ticket_id;
  std::string customer_id;
  std::vector<TicketEvent> events;
  Minutes t = 0;  // clock of the last appended event
  int severity = 4;
  int level = 1;
  double slowness = 1;
  double agitation = 0;
  std::vector<std::string> staff;
  double score = 0;
  double draw = 0;
  bool escalate = false;
  Minutes outcome_at = 0;

  void Push(EventKind kind, const std::string& actor) {
    TicketEvent ev;
    ev.ticket_id = ticket_id;
    ev.seq = static_cast<std::int64_t>(events.size());
    ev.timestamp = t;
    ev.kind = kind;
    ev.actor_id = actor;
    events.push_back(std::move(ev));
  }

  const std::string& Staff(Rng& rng) {
    if (staff.empty() || rng.Bernoulli(0.25)) {
      staff.push_back(PaddedId('S', rng.Uniform(kSupportStaff), 3));
    }
    return staff[rng.Uniform(staff.size())];
  }
};

void AppendRound(Draft& d, Rng& rng) {
  d.t += Gap(rng, kCustomerPauseMean);
  const Minutes run_start = d.t;
  d.Push(EventKind::kCustomerMessage, d.customer_id);
  if (rng.Bernoulli(0.3)) {
    d.t += Gap(rng, 45);
    d.Push(EventKind::kCustomerMessage, d.customer_id);
  }
  if (rng.Bernoulli(Sigmoid(d.agitation - 1.8))) {
    int next = d.severity;
    const bool toward_one =
        d.severity == 4 || (d.severity > 1 && rng.Bernoulli(Sigmoid(0.5 + d.agitation)));
    if (toward_one) {
      next = rng.Bernoulli(Sigmoid(d.agitation - 0.5)) ? 1 : d.severity - 1;
    } else if (d.severity < 4) {
      next = d.severity + 1;
    }
    if (next != d.severity) {
      d.t += Gap(rng, 30);
      d.severity = next;
      d.Push(EventKind::kSeverityChange, d.customer_id);
      d.events.back().severity = Severity(next);
    }
  }
  d.t = std::max(d.t, run_start + Gap(rng, kResponseMean * d.slowness));
  d.Push(EventKind::kSupportMessage, d.Staff(rng));
  if (d.level < 3 && rng.Bernoulli(0.1)) {
    d.t += Gap(rng, 60);
    ++d.level;
    d.Push(EventKind::kOwnershipChange, d.Staff(rng));
    d.events.back().level = SupportLevel(d.level);
  }
}

// Planted process and time terms, read off the generated prefix.
std::pair<double, double> PlantedTerms(const Draft& d) {
  TicketReplay replay;
  for (const auto& ev : d.events) replay.Apply(ev);
  const ProcessFeatures p = replay.process();
  const TimeFeatures t = replay.time(0);
  const double process = 1.5 * p.num_sevX_to_sev1 + 0.6 * p.num_severity_increases -
                          0.4 * p.num_severity_decreases;
  const double time =
      1.5 * std::log((t.avg_support_response_min + 30) / (kResponseMean + 30)) +
      0.5 * std::log((t.time_until_first_contact_min + 30) /
                     (kFirstContactMean + 30));
  return {process, time};
}

double SolveIntercept(const std::vector<Draft>& drafts, double target) {
  double lo = -60, hi = 60;
  for (int i = 0; i < 200; ++i) {
    const double mid = (lo + hi) / 2;
    double expected = 0;
    for (const auto& d : drafts) expected += Sigmoid(mid + d.score);
    (expected < target ? lo : hi) = mid;
  }
  return (lo + hi) / 2;
}

}  // namespace

std::vector<EscalationRecord> AttachEscalations(
    const std::vector<TicketSpan>& tickets, std::vector<CauseEvent> causes,
    bool cascade_enabled) {
  std::sort(causes.begin(), causes.end(),
            [](const CauseEvent& a, const CauseEvent& b) {
              return a.at != b.at ? a.at < b.at : a.ticket < b.ticket;
            });
  std::vector<bool> attached(tickets.size(), false);
  std::vector<EscalationRecord> out;
  for (const auto& cause : causes) {
    if (attached[cause.ticket]) continue;
    EscalationRecord rec;
    rec.opened_at = cause.at;
    rec.attached_ticket_ids.insert(tickets[cause.ticket].ticket_id);
    attached[cause.ticket] = true;
    if (cascade_enabled) {
      for (std::size_t i = 0; i < tickets.size(); ++i) {
        if (attached[i]) continue;
        if (tickets[i].opened_at < cause.at && tickets[i].closed_at > cause.at) {
          rec.attached_ticket_ids.insert(tickets[i].ticket_id);
          attached[i] = true;
        }
      }
    }
    out.push_back(std::move(rec));
  }
  return out;
}

GeneratedCorpus Generate(const GenConfig& config) {
  config.Validate();
  const std::size_t total = config.total_tickets();
  const auto n_customers = static_cast<std::size_t>(config.n_customers);
  Rng top(DeriveSeed(config.seed, 0));

  // Customer volumes by largest remainder over gamma weights.
  std::vector<double> weight(n_customers, 1.0);
  if (config.tickets_dispersion > 0) {
    for (auto& w : weight) w = top.Gamma(1.0 / config.tickets_dispersion);
  }
  double weight_sum = 0;
  for (const double w : weight) weight_sum += w;
  std::vector<std::size_t> volume(n_customers);
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < n_customers; ++c) {
    const double exact = static_cast<double>(total) * weight[c] / weight_sum;
    volume[c] = static_cast<std::size_t>(exact);
    assigned += volume[c];
    remainders.emplace_back(-(exact - std::floor(exact)), c);
  }
  std::sort(remainders.begin(), remainders.end());
  for (std::size_t i = 0; assigned < total; ++i, ++assigned) {
    ++volume[remainders[i % n_customers].second];
  }

  // Pre-outcome prefixes, per customer with derived streams.
  const Minutes horizon = static_cast<Minutes>(config.horizon_days) * kMinutesPerDay;
  std::vector<Draft> drafts;
  drafts.reserve(total);
  std::vector<std::size_t> customer_begin(n_customers + 1, 0);
  const SignalWeights& w = config.signal_weights;
  for (std::size_t c = 0; c < n_customers; ++c) {
    customer_begin[c] = drafts.size();
    Rng rng(DeriveSeed(config.seed, 1 + c));
    const std::string customer_id = PaddedId('C', c + 1, 4);
    const bool volatile_customer = rng.Bernoulli(kVolatileShare);
    const double propensity =
        (volatile_customer ? kVolatileShift : 0.0) + rng.Normal(0, 0.5);
    std::vector<Minutes> opens(volume[c]);
    for (auto& t : opens) {
      t = config.start_minute + static_cast<Minutes>(rng.Uniform(
                                    static_cast<std::uint64_t>(horizon)));
    }
    std::sort(opens.begin(), opens.end());
    for (const Minutes open : opens) {
      Draft d;
      d.ticket_id = PaddedId('T', drafts.size() + 1, 6);
      d.customer_id = customer_id;
      d.t = open;
      d.slowness = std::exp(rng.Normal(0, 0.6));
      d.agitation = rng.Normal();
      const double sev_draw = rng.UniformReal();
      d.severity = sev_draw < 0.3 ? 4 : sev_draw < 0.7 ? 3 : sev_draw < 0.95 ? 2 : 1;
      const double level_draw = rng.UniformReal();
      d.level = level_draw < 0.1 ? 0 : level_draw < 0.8 ? 1 : 2;
      d.Push(EventKind::kOpened, customer_id);
      d.events.back().severity = Severity(d.severity);
      d.events.back().level = SupportLevel(d.level);
      d.events.back().customer_id = customer_id;

      d.t += Gap(rng, kFirstContactMean * d.slowness);
      d.Push(EventKind::kSupportMessage, d.Staff(rng));
      const int rounds = 1 + rng.Poisson(kPrefixRounds);
      for (int r = 0; r < rounds; ++r) AppendRound(d, rng);

      const auto [process, time] = PlantedTerms(d);
      d.score = w.profile * propensity + w.process * process + w.time * time;
      d.draw = rng.UniformReal();
      d.outcome_at = d.t + Gap(rng, kOutcomeGapMean);
      drafts.push_back(std::move(d));
    }
  }
  customer_begin[n_customers] = drafts.size();

  GeneratedCorpus out;
  out.intercept = SolveIntercept(
      drafts, static_cast<double>(total) / (1.0 + config.target_imbalance));

  // Outcomes: close at the outcome point, or escalate there and keep going.
  for (std::size_t i = 0; i < drafts.size(); ++i) {
    Draft& d = drafts[i];
    Rng rng(DeriveSeed(config.seed, 0x100000000ULL + i));
    d.escalate = d.draw < Sigmoid(out.intercept + d.score);
    d.t = d.outcome_at;
    if (d.escalate) {
      ++out.cause_escalations;
      const int rounds = 1 + rng.Poisson(kPostEscalationRounds);
      for (int r = 0; r < rounds; ++r) AppendRound(d, rng);
      d.t += Gap(rng, kOutcomeGapMean);
    }
    d.Push(EventKind::kClosed, d.Staff(rng));
  }

  std::vector<EscalationRecord> records;
  for (std::size_t c = 0; c < n_customers; ++c) {
    std::vector<TicketSpan> spans;
    std::vector<CauseEvent> causes;
    for (std::size_t i = customer_begin[c]; i < customer_begin[c + 1]; ++i) {
      const Draft& d = drafts[i];
      spans.push_back({d.ticket_id, d.events.front().timestamp,
                       d.events.back().timestamp});
      if (d.escalate) causes.push_back({i - customer_begin[c], d.outcome_at});
    }
    auto recs = AttachEscalations(spans, std::move(causes), config.cascade_enabled);
    records.insert(records.end(), std::make_move_iterator(recs.begin()),
                   std::make_move_iterator(recs.end()));
  }
  std::sort(records.begin(), records.end(),
            [](const EscalationRecord& a, const EscalationRecord& b) {
              return a.opened_at != b.opened_at
                         ? a.opened_at < b.opened_at
                         : *a.attached_ticket_ids.begin() <
                               *b.attached_ticket_ids.begin();
            });
  for (std::size_t i = 0; i < records.size(); ++i) {
    records[i].critsit_id = PaddedId('X', i + 1, 6);
  }
  out.records = std::move(records);
  for (auto& d : drafts) {
    out.events.insert(out.events.end(), std::make_move_iterator(d.events.begin()),
                      std::make_move_iterator(d.events.end()));
  }
  return out;
}

std::string Describe(const GenConfig& config) {
  std::ostringstream out;
  out << "synthetic corpus: " << config.n_customers << " customers, "
      << config.total_tickets() << " tickets (mean "
      << FormatNumber(config.tickets_mean) << " per customer, dispersion "
      << FormatNumber(config.tickets_dispersion) << ")\n";
  out << "target imbalance: 1:" << FormatNumber(config.target_imbalance)
      << " cause escalations\n";
  out << "cascade escalations: "
      << (config.cascade_enabled ? "enabled (open sibling tickets attach)"
                                 : "disabled")
      << "\n";
  out << "seed: " << config.seed << "\n";
  const SignalWeights& w = config.signal_weights;
  if (w.null()) {
    out << "no planted signal (null corpus)\n";
    return out.str();
  }
  out << "planted signal:\n";
  out << "  profile weight " << FormatNumber(w.profile)
      << ": latent customer propensity, visible as CritSit history\n";
  out << "  process weight " << FormatNumber(w.process)
      << ": severity increases and sev4/sev3/sev2 to sev1 transitions\n";
  out << "  time weight " << FormatNumber(w.time)
      << ": slow first contact and support responses\n";
  return out.str();
}

}  // namespace escalade
