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

#include "escalade/escalade.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <fstream>
#include <memory>
#include <new>
#include <optional>
#include <sstream>
#include <string>

#include "error.hpp"
#include "evaluation.hpp"
#include "features.hpp"
#include "forest.hpp"
#include "ingest.hpp"
#include "json.hpp"
#include "server.hpp"
#include "synth.hpp"
#include "triage.hpp"

struct esc_corpus {
  escalade::Corpus corpus;
};

struct esc_model {
  escalade::ForestModel model;
};

struct esc_service {
  std::unique_ptr<escalade::TriageStore> store;
  std::unique_ptr<escalade::TriageServer> server;
  int port = 0;
};

namespace {

using escalade::ErrorCode;
using escalade::Fail;
using nlohmann::json;

thread_local std::string last_error;

esc_status ToStatus(ErrorCode code) {
  return static_cast<esc_status>(static_cast<int>(code));
}

template <typename F>
esc_status Guard(F&& body) {
  try {
    body();
    last_error.clear();
    return ESC_OK;
  } catch (const escalade::Error& e) {
    last_error = e.what();
    return ToStatus(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return ESC_ERR_RUNTIME;
  } catch (const std::exception& e) {
    last_error = e.what();
    return ESC_ERR_RUNTIME;
  }
}

void Require(const void* p, const char* what) {
  if (p == nullptr) Fail(ErrorCode::kUsage, std::string(what) + " is null");
}

char* Dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

json ParseOptions(const char* text, const char* what) {
  if (text == nullptr || *text == '\0') return json::object();
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    Fail(ErrorCode::kUsage, std::string(what) + ": expected a JSON object");
  }
  return j;
}

void CheckKeys(const json& j, std::initializer_list<const char*> allowed,
               const char* what) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) Fail(ErrorCode::kUsage, std::string(what) + ": unknown key " + key);
  }
}

template <typename T>
T Get(const json& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    Fail(ErrorCode::kUsage, std::string("option ") + key + " has the wrong type");
  }
}

escalade::TrainConfig TrainConfigFrom(const json& j) {
  CheckKeys(j,
            {"n_trees", "max_depth", "min_samples_split", "features_per_split",
             "seed", "balance", "bootstrap", "threads", "window_months"},
            "train config");
  escalade::TrainConfig c;
  c.n_trees = Get(j, "n_trees", c.n_trees);
  if (auto it = j.find("max_depth"); it != j.end() && !it->is_null()) {
    c.max_depth = Get<int>(j, "max_depth", 0);
  }
  c.min_samples_split = Get(j, "min_samples_split", c.min_samples_split);
  c.features_per_split = Get(j, "features_per_split", c.features_per_split);
  c.seed = Get(j, "seed", c.seed);
  c.balance = Get(j, "balance", c.balance);
  c.bootstrap = Get(j, "bootstrap", c.bootstrap);
  c.threads = Get(j, "threads", c.threads);
  c.Validate();
  return c;
}

escalade::ProfileWindow WindowFrom(int months) {
  try {
    return escalade::ProfileWindow(months);
  } catch (const escalade::Error& e) {
    Fail(ErrorCode::kUsage, e.what());
  }
}

std::string OptString(const char* s) { return s == nullptr ? "" : s; }

std::string GenText(const char* s) {
  return s == nullptr || *s == '\0' ? "{}" : s;
}

}  // namespace

extern "C" {

const char* esc_version(void) { return "1.0.0"; }

const char* esc_last_error(void) { return last_error.c_str(); }

const char* esc_status_name(esc_status status) {
  switch (status) {
    case ESC_OK:
      return "ok";
    case ESC_ERR_USAGE:
    case ESC_ERR_VALIDATION:
    case ESC_ERR_RUNTIME:
    case ESC_ERR_NOT_FOUND:
    case ESC_ERR_STATE:
      return escalade::ErrorCodeName(static_cast<ErrorCode>(status)).data();
  }
  return "unknown";
}

void esc_string_free(char* s) { std::free(s); }

esc_status esc_generate(const char* config_json, const char* events_path,
                        const char* crits_path, char** summary_json) {
  return Guard([&] {
    Require(events_path, "events_path");
    Require(crits_path, "crits_path");
    auto config = escalade::GenConfig::FromJson(GenText(config_json));
    auto generated = escalade::Generate(config);
    std::ofstream ev(events_path, std::ios::binary);
    if (!ev) Fail(ErrorCode::kUsage, std::string("cannot write ") + events_path);
    escalade::WriteEventLog(ev, generated.events);
    std::ofstream cr(crits_path, std::ios::binary);
    if (!cr) Fail(ErrorCode::kUsage, std::string("cannot write ") + crits_path);
    escalade::WriteEscalations(cr, generated.records);
    ev.close();
    cr.close();
    if (!ev || !cr) Fail(ErrorCode::kRuntime, "write failed");
    if (summary_json != nullptr) {
      nlohmann::ordered_json s;
      s["tickets"] = config.total_tickets();
      s["events"] = generated.events.size();
      s["records"] = generated.records.size();
      s["cause_escalations"] = generated.cause_escalations;
      s["intercept"] = generated.intercept;
      *summary_json = Dup(s.dump());
    }
  });
}

esc_status esc_generator_describe(const char* config_json, char** text) {
  return Guard([&] {
    Require(text, "text");
    auto config = escalade::GenConfig::FromJson(GenText(config_json));
    *text = Dup(escalade::Describe(config));
  });
}

esc_status esc_corpus_load(const char* events_path, const char* crits_path,
                           esc_corpus** out) {
  return Guard([&] {
    Require(events_path, "events_path");
    Require(out, "out");
    *out = new esc_corpus{
        escalade::LoadCorpus(events_path, OptString(crits_path))};
  });
}

esc_status esc_corpus_filter_cascades(const esc_corpus* corpus,
                                      esc_corpus** out) {
  return Guard([&] {
    Require(corpus, "corpus");
    Require(out, "out");
    *out = new esc_corpus{escalade::FilterCascades(corpus->corpus)};
  });
}

esc_status esc_corpus_summary(const esc_corpus* corpus, char** json_out) {
  return Guard([&] {
    Require(corpus, "corpus");
    Require(json_out, "json");
    auto s = escalade::Summarize(corpus->corpus, 0);
    nlohmann::ordered_json j;
    j["events"] = s.events;
    j["tickets"] = s.tickets;
    j["customers"] = s.customers;
    j["records"] = s.records;
    j["cause"] = s.cause;
    j["cascade"] = s.cascade;
    j["positives"] = corpus->corpus.positives();
    *json_out = Dup(j.dump());
  });
}

void esc_corpus_free(esc_corpus* corpus) { delete corpus; }

esc_status esc_extract_csv(const esc_corpus* corpus, int window_months,
                           int all_snapshots, const char* out_path) {
  return Guard([&] {
    Require(corpus, "corpus");
    Require(out_path, "out_path");
    auto window = WindowFrom(window_months);
    escalade::FeatureContext ctx(corpus->corpus);
    auto rows = escalade::ExtractRows(ctx, window, all_snapshots != 0);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) Fail(ErrorCode::kUsage, std::string("cannot write ") + out_path);
    escalade::WriteFeatureCsv(out, rows);
    out.close();
    if (!out) Fail(ErrorCode::kRuntime, "write failed");
  });
}

esc_status esc_train(const esc_corpus* corpus, const char* config_json,
                     esc_model** out) {
  return Guard([&] {
    Require(corpus, "corpus");
    Require(out, "out");
    json j = ParseOptions(config_json, "train config");
    auto config = TrainConfigFrom(j);
    auto window = WindowFrom(
        Get(j, "window_months", escalade::ProfileWindow::kDefaultMonths));
    escalade::FeatureContext ctx(corpus->corpus);
    escalade::Dataset data;
    for (auto& row : escalade::ExtractRows(ctx, window, false)) {
      data.Add(row.features, row.label);
    }
    auto model = escalade::Train(data, config);
    model.window_months = window.months();
    *out = new esc_model{std::move(model)};
  });
}

esc_status esc_model_save(const esc_model* model, const char* path) {
  return Guard([&] {
    Require(model, "model");
    Require(path, "path");
    escalade::SaveModel(model->model, path);
  });
}

esc_status esc_model_load(const char* path, esc_model** out) {
  return Guard([&] {
    Require(path, "path");
    Require(out, "out");
    *out = new esc_model{escalade::LoadModel(path)};
  });
}

esc_status esc_model_info(const esc_model* model, char** json_out) {
  return Guard([&] {
    Require(model, "model");
    Require(json_out, "json");
    *json_out = Dup(
        escalade::ModelJson(model->model,
                            escalade::ProfileWindow(model->model.window_months))
            .dump());
  });
}

int esc_model_window_months(const esc_model* model) {
  return model == nullptr ? 0 : model->model.window_months;
}

esc_status esc_model_predict(const esc_model* model, const double* features,
                             size_t n, int* er, int* predicted_crit,
                             double* confidence) {
  return Guard([&] {
    Require(model, "model");
    Require(features, "features");
    auto p = escalade::Predict(model->model, std::span<const double>(features, n));
    if (er != nullptr) *er = p.risk.er;
    if (predicted_crit != nullptr) *predicted_crit = p.risk.predicted_crit ? 1 : 0;
    if (confidence != nullptr) *confidence = p.confidence;
  });
}

void esc_model_free(esc_model* model) { delete model; }

esc_status esc_evaluate(const esc_corpus* corpus, const char* options_json,
                        char** report_json) {
  return Guard([&] {
    Require(corpus, "corpus");
    Require(report_json, "report_json");
    json j = ParseOptions(options_json, "evaluate options");
    CheckKeys(j, {"k", "seed", "window_months", "per_snapshot", "train"},
              "evaluate options");
    escalade::CvOptions opts;
    opts.k = Get(j, "k", opts.k);
    opts.seed = Get(j, "seed", opts.seed);
    opts.window = WindowFrom(
        Get(j, "window_months", escalade::ProfileWindow::kDefaultMonths));
    opts.granularity = Get(j, "per_snapshot", false)
                           ? escalade::Granularity::kAllSnapshots
                           : escalade::Granularity::kFinalSnapshot;
    json train = j.contains("train") ? j["train"] : json::object();
    if (!train.is_object()) Fail(ErrorCode::kUsage, "train: expected an object");
    train.erase("window_months");
    auto config = TrainConfigFrom(train);
    auto report = escalade::CrossValidate(corpus->corpus, config, opts);
    *report_json = Dup(escalade::FormatReportJson(report));
  });
}

esc_status esc_score_csv(const esc_model* model, const esc_corpus* corpus,
                         int window_months, const char* out_path) {
  return Guard([&] {
    Require(model, "model");
    Require(corpus, "corpus");
    Require(out_path, "out_path");
    auto window = WindowFrom(window_months);
    escalade::FeatureContext ctx(corpus->corpus);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) Fail(ErrorCode::kUsage, std::string("cannot write ") + out_path);
    out << "ticket_id,upto_seq,er,predicted_crit,confidence\n";
    for (const auto& [id, ticket] : corpus->corpus.tickets()) {
      auto snap = escalade::SnapshotAt(ticket, ticket.events.size() - 1);
      auto x = escalade::ComputeFeatureVector(ctx, ticket, snap, window);
      auto p = escalade::Predict(model->model, x);
      out << id << ',' << snap.upto_seq << ',' << p.risk.er << ','
          << (p.risk.predicted_crit ? 1 : 0) << ','
          << escalade::FormatNumber(p.confidence) << '\n';
    }
    out.close();
    if (!out) Fail(ErrorCode::kRuntime, "write failed");
  });
}

esc_status esc_timeline_csv(const esc_model* model, const esc_corpus* corpus,
                            const char* ticket_id, int window_months,
                            char** csv) {
  return Guard([&] {
    Require(model, "model");
    Require(corpus, "corpus");
    Require(ticket_id, "ticket_id");
    Require(csv, "csv");
    auto window = WindowFrom(window_months);
    escalade::FeatureContext ctx(corpus->corpus);
    auto timeline =
        escalade::ComputeErTimeline(model->model, ctx, ticket_id, window);
    std::ostringstream out;
    escalade::WriteTimelineCsv(out, timeline);
    *csv = Dup(out.str());
  });
}

esc_status esc_service_start(const char* options_json, esc_service** out) {
  return Guard([&] {
    Require(out, "out");
    json j = ParseOptions(options_json, "service options");
    CheckKeys(j,
              {"host", "port", "model_path", "journal_path", "window_months",
               "history_events", "history_crits"},
              "service options");
    auto host = Get<std::string>(j, "host", "127.0.0.1");
    int port = Get(j, "port", 8080);
    if (port < 0 || port > 65535) Fail(ErrorCode::kUsage, "port out of range");
    std::shared_ptr<const escalade::ForestModel> model;
    auto model_path = Get<std::string>(j, "model_path", "");
    if (!model_path.empty()) {
      model = std::make_shared<escalade::ForestModel>(
          escalade::LoadModel(model_path));
    }
    escalade::TriageOptions topts;
    int default_window = model ? model->window_months
                               : escalade::ProfileWindow::kDefaultMonths;
    topts.window = WindowFrom(Get(j, "window_months", default_window));
    topts.journal_path = Get<std::string>(j, "journal_path", "");
    auto history_events = Get<std::string>(j, "history_events", "");
    if (!history_events.empty()) {
      auto history = escalade::LoadCorpus(
          history_events, Get<std::string>(j, "history_crits", ""));
      topts.history_events = history.AllEvents();
      topts.history_records = history.escalations();
    }
    auto service = std::make_unique<esc_service>();
    service->store =
        std::make_unique<escalade::TriageStore>(model, std::move(topts));
    service->server = std::make_unique<escalade::TriageServer>(*service->store);
    service->port = service->server->Start(host, port);
    *out = service.release();
  });
}

int esc_service_port(const esc_service* service) {
  return service == nullptr ? 0 : service->port;
}

void esc_service_wait(esc_service* service) {
  if (service != nullptr) service->server->Wait();
}

void esc_service_stop(esc_service* service) {
  if (service != nullptr) service->server->Stop();
}

void esc_service_free(esc_service* service) {
  if (service == nullptr) return;
  service->server->Stop();
  delete service;
}

}  // extern "C"
