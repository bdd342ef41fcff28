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

// escalade command-line tool. Links only the C interface.

#include <escalade/escalade.h>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

namespace {

using nlohmann::json;

struct CliError {
  esc_status status;
  std::string message;
};

int ExitCode(esc_status s) {
  switch (s) {
    case ESC_OK:
      return 0;
    case ESC_ERR_USAGE:
      return 1;
    case ESC_ERR_VALIDATION:
    case ESC_ERR_NOT_FOUND:
      return 2;
    case ESC_ERR_RUNTIME:
    case ESC_ERR_STATE:
      return 3;
  }
  return 3;
}

void ReportError(esc_status status, const std::string& message) {
  json j;
  j["error"] = esc_status_name(status);
  j["message"] = message;
  std::cerr << j.dump() << std::endl;
}

void Check(esc_status s) {
  if (s != ESC_OK) throw CliError{s, esc_last_error()};
}

struct StringDeleter {
  void operator()(char* s) const { esc_string_free(s); }
};
using OwnedString = std::unique_ptr<char, StringDeleter>;

struct CorpusDeleter {
  void operator()(esc_corpus* c) const { esc_corpus_free(c); }
};
using Corpus = std::unique_ptr<esc_corpus, CorpusDeleter>;

struct ModelDeleter {
  void operator()(esc_model* m) const { esc_model_free(m); }
};
using Model = std::unique_ptr<esc_model, ModelDeleter>;

json ReadConfig(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw CliError{ESC_ERR_USAGE, "cannot open config file " + path};
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw CliError{ESC_ERR_VALIDATION, "config file " + path + " is not a JSON object"};
  }
  return j;
}

Corpus LoadCorpus(const std::string& events, const std::string& crits,
                  bool filter_cascades) {
  esc_corpus* raw = nullptr;
  Check(esc_corpus_load(events.c_str(), crits.c_str(), &raw));
  Corpus corpus(raw);
  if (filter_cascades) {
    esc_corpus* filtered = nullptr;
    Check(esc_corpus_filter_cascades(corpus.get(), &filtered));
    corpus.reset(filtered);
  }
  return corpus;
}

Model LoadModel(const std::string& path) {
  esc_model* raw = nullptr;
  Check(esc_model_load(path.c_str(), &raw));
  return Model(raw);
}

// Inputs shared by every corpus-reading subcommand.
struct CorpusArgs {
  std::string events;
  std::string crits;
  bool filter_cascades = false;

  void Add(CLI::App* cmd) {
    cmd->add_option("--events", events, "Ticket event log (JSON lines)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--crits", crits, "Escalation records (JSON lines)")
        ->check(CLI::ExistingFile);
    cmd->add_flag("--filter-cascades", filter_cascades,
                  "Drop cascade-escalated tickets before use");
  }
  Corpus Load() const { return LoadCorpus(events, crits, filter_cascades); }
};

// Forest hyperparameters; only flags given on the command line override the
// config file.
struct TrainArgs {
  CLI::Option* trees = nullptr;
  CLI::Option* max_depth = nullptr;
  CLI::Option* min_split = nullptr;
  CLI::Option* features = nullptr;
  CLI::Option* no_balance = nullptr;
  int n_trees = 100;
  int depth = 0;
  int min_samples_split = 2;
  int features_per_split = 5;
  bool unbalanced = false;

  void Add(CLI::App* cmd) {
    trees = cmd->add_option("--trees", n_trees, "Number of trees (default 100)");
    max_depth = cmd->add_option("--max-depth", depth,
                                "Maximum tree depth (default unlimited)");
    min_split = cmd->add_option("--min-samples-split", min_samples_split,
                                "Minimum rows to split a node (default 2)");
    features = cmd->add_option("--features-per-split", features_per_split,
                               "Features tried per split (default 5)");
    no_balance = cmd->add_flag("--no-balance", unbalanced,
                               "Train without minority oversampling");
  }

  void Apply(json& j) const {
    if (trees->count()) j["n_trees"] = n_trees;
    if (max_depth->count()) j["max_depth"] = depth;
    if (min_split->count()) j["min_samples_split"] = min_samples_split;
    if (features->count()) j["features_per_split"] = features_per_split;
    if (no_balance->count()) j["balance"] = false;
  }
};

void WriteText(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CliError{ESC_ERR_USAGE, "cannot write " + path};
  out << text;
  out.close();
  if (!out) throw CliError{ESC_ERR_RUNTIME, "write failed: " + path};
}

std::string FormatPercent(const json& v) {
  if (v.is_null()) return "undefined";
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(2);
  s << v.get<double>() * 100 << "%";
  return s.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"escalade: escalation-risk prediction for support tickets"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", esc_version());

  std::string config_path;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  std::string out_path;

  // generate
  auto* gen = app.add_subcommand("generate", "Write a synthetic ticket corpus");
  std::string gen_events, gen_crits;
  int customers = 0;
  double tickets_mean = 0, dispersion = 0, imbalance = 0;
  double w_profile = 0, w_process = 0, w_time = 0;
  bool cascades = false, null_signal = false, describe = false;
  gen->add_option("--config", config_path, "Generator config (JSON)")
      ->check(CLI::ExistingFile);
  gen->add_option("--seed", seed, "Random seed");
  auto* o_customers = gen->add_option("--customers", customers, "Number of customers");
  auto* o_mean = gen->add_option("--tickets-mean", tickets_mean, "Mean tickets per customer");
  auto* o_disp = gen->add_option("--tickets-dispersion", dispersion,
                                 "Squared coefficient of variation of tickets per customer");
  auto* o_imb = gen->add_option("--imbalance", imbalance,
                                "Non-escalated tickets per cause escalation");
  auto* o_casc = gen->add_flag("--cascades", cascades, "Enable cascade escalations");
  auto* o_null = gen->add_flag("--null-signal", null_signal,
                               "Zero all signal weights (no learnable signal)");
  auto* o_wp = gen->add_option("--weight-profile", w_profile, "Customer-profile signal weight");
  auto* o_wr = gen->add_option("--weight-process", w_process, "Severity-process signal weight");
  auto* o_wt = gen->add_option("--weight-time", w_time, "Response-time signal weight");
  gen->add_flag("--describe", describe, "Print the planted signal and exit");
  gen->add_option("--events", gen_events, "Output event log");
  gen->add_option("--crits", gen_crits, "Output escalation records");

  // ingest-check
  auto* check = app.add_subcommand("ingest-check",
                                   "Validate an event log and escalation records");
  CorpusArgs check_args;
  check_args.Add(check);

  // extract
  auto* extract = app.add_subcommand("extract", "Write feature vectors as CSV");
  CorpusArgs extract_args;
  extract_args.Add(extract);
  int window = 6;
  bool all_snapshots = false;
  extract->add_option("--window", window, "Profile window in months (default 6)");
  extract->add_flag("--all-snapshots", all_snapshots,
                    "One row per snapshot instead of per ticket");
  extract->add_option("--out", out_path, "Output CSV")->required();

  // train
  auto* train = app.add_subcommand("train", "Train a random forest model");
  CorpusArgs train_args;
  train_args.Add(train);
  TrainArgs train_hp;
  train_hp.Add(train);
  train->add_option("--config", config_path, "Training config (JSON)")
      ->check(CLI::ExistingFile);
  train->add_option("--seed", seed, "Random seed");
  train->add_option("--threads", threads, "Worker threads (default all cores)");
  auto* o_train_window =
      train->add_option("--window", window, "Profile window in months (default 6)");
  train->add_option("--out", out_path, "Output model file")->required();

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "k-fold cross-validation");
  CorpusArgs eval_args;
  eval_args.Add(evaluate);
  TrainArgs eval_hp;
  eval_hp.Add(evaluate);
  int k = 10;
  bool per_snapshot = false;
  evaluate->add_option("--config", config_path, "Evaluation config (JSON)")
      ->check(CLI::ExistingFile);
  evaluate->add_option("--seed", seed, "Random seed");
  evaluate->add_option("--threads", threads, "Worker threads (default all cores)");
  auto* o_k = evaluate->add_option("--k", k, "Number of folds (default 10)");
  auto* o_eval_window =
      evaluate->add_option("--window", window, "Profile window in months (default 6)");
  auto* o_per_snapshot = evaluate->add_flag(
      "--per-snapshot", per_snapshot, "Score every pre-outcome snapshot");
  evaluate->add_option("--out", out_path, "Output metrics report (JSON)")->required();

  // score
  auto* score = app.add_subcommand("score", "Score every ticket at its latest event");
  CorpusArgs score_args;
  score_args.Add(score);
  std::string model_path;
  score->add_option("--model", model_path, "Model file")->required()->check(CLI::ExistingFile);
  auto* o_score_window = score->add_option(
      "--window", window, "Profile window in months (default: the model's)");
  score->add_option("--out", out_path, "Output CSV")->required();

  // timeline
  auto* timeline = app.add_subcommand("timeline", "ER of one ticket at every snapshot");
  CorpusArgs timeline_args;
  timeline_args.Add(timeline);
  std::string ticket;
  timeline->add_option("--model", model_path, "Model file")
      ->required()
      ->check(CLI::ExistingFile);
  timeline->add_option("--ticket", ticket, "Ticket id")->required();
  auto* o_timeline_window = timeline->add_option(
      "--window", window, "Profile window in months (default: the model's)");
  timeline->add_option("--out", out_path, "Output CSV")->required();

  // serve
  auto* serve = app.add_subcommand("serve", "Run the triage HTTP service");
  std::string addr = "127.0.0.1:8080", journal, history_events, history_crits;
  serve->add_option("--addr", addr, "Listen address host:port")
      ->envname("ESCALADE_ADDR")
      ->capture_default_str();
  serve->add_option("--model", model_path, "Model file")->envname("ESCALADE_MODEL");
  serve->add_option("--journal", journal, "Journal file for durable state")
      ->envname("ESCALADE_JOURNAL");
  serve->add_option("--history-events", history_events,
                    "Background event log for customer profiles")
      ->check(CLI::ExistingFile);
  serve->add_option("--history-crits", history_crits,
                    "Background escalation records")
      ->check(CLI::ExistingFile);
  auto* o_serve_window = serve->add_option(
      "--window", window, "Profile window in months (default: the model's)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    ReportError(ESC_ERR_USAGE, e.what());
    return 1;
  }

  try {
    if (gen->parsed()) {
      json j = ReadConfig(config_path);
      if (seed) j["seed"] = *seed;
      if (o_customers->count()) j["n_customers"] = customers;
      if (o_mean->count()) j["tickets_per_customer"]["mean"] = tickets_mean;
      if (o_disp->count()) j["tickets_per_customer"]["dispersion"] = dispersion;
      if (o_imb->count()) j["target_imbalance"] = imbalance;
      if (o_casc->count()) j["cascade_enabled"] = true;
      if (o_null->count()) {
        j["signal_weights"] = {{"profile", 0.0}, {"process", 0.0}, {"time", 0.0}};
      }
      if (o_wp->count()) j["signal_weights"]["profile"] = w_profile;
      if (o_wr->count()) j["signal_weights"]["process"] = w_process;
      if (o_wt->count()) j["signal_weights"]["time"] = w_time;
      const std::string text = j.dump();
      if (describe) {
        char* raw = nullptr;
        Check(esc_generator_describe(text.c_str(), &raw));
        OwnedString d(raw);
        std::cout << d.get();
        return 0;
      }
      if (gen_events.empty() || gen_crits.empty()) {
        throw CliError{ESC_ERR_USAGE, "generate requires --events and --crits"};
      }
      char* raw = nullptr;
      Check(esc_generate(text.c_str(), gen_events.c_str(), gen_crits.c_str(), &raw));
      OwnedString summary(raw);
      auto s = json::parse(summary.get());
      std::cout << "generated " << s["tickets"] << " tickets, " << s["events"]
                << " events, " << s["records"] << " escalation records ("
                << s["cause_escalations"] << " cause)\n";
    } else if (check->parsed()) {
      auto corpus = check_args.Load();
      char* raw = nullptr;
      Check(esc_corpus_summary(corpus.get(), &raw));
      OwnedString summary(raw);
      auto s = json::parse(summary.get());
      std::cout << "ok: " << s["events"] << " events, " << s["tickets"]
                << " tickets, " << s["customers"] << " customers, "
                << s["records"] << " escalation records (" << s["cause"]
                << " cause, " << s["cascade"] << " cascade tickets)\n";
    } else if (extract->parsed()) {
      auto corpus = extract_args.Load();
      Check(esc_extract_csv(corpus.get(), window, all_snapshots ? 1 : 0,
                            out_path.c_str()));
      std::cout << "wrote " << out_path << "\n";
    } else if (train->parsed()) {
      json j = ReadConfig(config_path);
      train_hp.Apply(j);
      if (seed) j["seed"] = *seed;
      if (threads > 0) j["threads"] = threads;
      if (o_train_window->count()) j["window_months"] = window;
      auto corpus = train_args.Load();
      esc_model* raw = nullptr;
      Check(esc_train(corpus.get(), j.dump().c_str(), &raw));
      Model model(raw);
      Check(esc_model_save(model.get(), out_path.c_str()));
      std::cout << "wrote " << out_path << "\n";
    } else if (evaluate->parsed()) {
      json j = ReadConfig(config_path);
      json& t = j["train"];
      if (t.is_null()) t = json::object();
      eval_hp.Apply(t);
      if (seed) {
        j["seed"] = *seed;
        t["seed"] = *seed;
      }
      if (threads > 0) t["threads"] = threads;
      if (o_k->count()) j["k"] = k;
      if (o_eval_window->count()) j["window_months"] = window;
      if (o_per_snapshot->count()) j["per_snapshot"] = true;
      auto corpus = eval_args.Load();
      char* raw = nullptr;
      Check(esc_evaluate(corpus.get(), j.dump().c_str(), &raw));
      OwnedString report(raw);
      WriteText(out_path, std::string(report.get()) + "\n");
      auto r = json::parse(report.get());
      std::cout << "recall " << FormatPercent(r["recall"]) << ", precision "
                << FormatPercent(r["precision"]) << ", summarization "
                << FormatPercent(r["summarization"]) << "\n";
    } else if (score->parsed()) {
      auto model = LoadModel(model_path);
      auto corpus = score_args.Load();
      int w = o_score_window->count() ? window : esc_model_window_months(model.get());
      Check(esc_score_csv(model.get(), corpus.get(), w, out_path.c_str()));
      std::cout << "wrote " << out_path << "\n";
    } else if (timeline->parsed()) {
      auto model = LoadModel(model_path);
      auto corpus = timeline_args.Load();
      int w = o_timeline_window->count() ? window
                                         : esc_model_window_months(model.get());
      char* raw = nullptr;
      Check(esc_timeline_csv(model.get(), corpus.get(), ticket.c_str(), w, &raw));
      OwnedString csv(raw);
      WriteText(out_path, csv.get());
      std::cout << "wrote " << out_path << "\n";
    } else if (serve->parsed()) {
      auto colon = addr.rfind(':');
      if (colon == std::string::npos) {
        throw CliError{ESC_ERR_USAGE, "--addr must be host:port"};
      }
      int port = 0;
      try {
        port = std::stoi(addr.substr(colon + 1));
      } catch (const std::exception&) {
        throw CliError{ESC_ERR_USAGE, "invalid port in --addr " + addr};
      }
      json j;
      j["host"] = addr.substr(0, colon);
      j["port"] = port;
      if (!model_path.empty()) j["model_path"] = model_path;
      if (!journal.empty()) j["journal_path"] = journal;
      if (!history_events.empty()) j["history_events"] = history_events;
      if (!history_crits.empty()) j["history_crits"] = history_crits;
      if (o_serve_window->count()) j["window_months"] = window;
      esc_service* raw = nullptr;
      Check(esc_service_start(j.dump().c_str(), &raw));
      std::cout << "listening on " << j["host"].get<std::string>() << ":"
                << esc_service_port(raw) << std::endl;
      esc_service_wait(raw);
      esc_service_free(raw);
    }
  } catch (const CliError& e) {
    ReportError(e.status, e.message);
    return ExitCode(e.status);
  } catch (const std::exception& e) {
    ReportError(ESC_ERR_RUNTIME, e.what());
    return 3;
  }
  return 0;
}
