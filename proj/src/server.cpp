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

#include "server.hpp"

#include "error.hpp"
#include "httplib.h"

namespace escalade {

using nlohmann::ordered_json;

namespace {

template <typename T>
ordered_json Nullable(const std::optional<T>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

int HttpStatus(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUsage:
    case ErrorCode::kValidation:
      return 400;
    case ErrorCode::kNotFound:
      return 404;
    case ErrorCode::kState:
      return 409;
    case ErrorCode::kRuntime:
      return 500;
  }
  return 500;
}

void Reply(httplib::Response& res, int status, const ordered_json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void ReplyError(httplib::Response& res, int status, std::string_view code,
                const std::string& message) {
  ordered_json j;
  j["code"] = code;
  j["message"] = message;
  Reply(res, status, j);
}

template <typename Fn>
auto Guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const Error& e) {
      ReplyError(res, HttpStatus(e.code()), ErrorCodeName(e.code()), e.what());
    } catch (const std::exception& e) {
      ReplyError(res, 500, "runtime", e.what());
    }
  };
}

}  // namespace

ordered_json EntryJson(const TriageEntry& e) {
  ordered_json j;
  j["ticket_id"] = e.ticket_id;
  j["current_er"] = e.current_er;
  j["predicted_crit"] = e.predicted_crit;
  j["confidence"] = e.confidence;
  j["previous_er"] = Nullable(e.previous_er);
  j["cer"] = Nullable(e.cer);
  j["mer"] = Nullable(e.mer);
  j["mer_set_by"] = Nullable(e.mer_set_by);
  j["mer_set_at"] = Nullable(e.mer_set_at);
  j["last_event_ts"] = e.last_event_ts;
  j["open"] = e.open;
  j["updated_in"] = e.updated_in;
  j["days_since_last_contact"] = e.features[Feature::kDaysSinceLastContact];
  j["ownership_level"] = e.features[Feature::kPmrOwnershipLevel];
  return j;
}

ordered_json DetailJson(const TicketDetail& d) {
  ordered_json j = EntryJson(d.entry);
  ordered_json features = ordered_json::array();
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    ordered_json f;
    f["name"] = kFeatureNames[i];
    f["label"] = kFeatureLabels[i];
    f["value"] = d.entry.features.values[i];
    features.push_back(std::move(f));
  }
  j["features"] = std::move(features);
  ordered_json events = ordered_json::array();
  for (const auto& ev : d.events) {
    ordered_json e;
    e["seq"] = ev.seq;
    e["ts"] = ev.timestamp;
    e["kind"] = EventKindName(ev.kind);
    e["actor_id"] = ev.actor_id;
    if (ev.severity) e["severity"] = ev.severity->value();
    if (ev.level) e["level"] = ev.level->level();
    events.push_back(std::move(e));
  }
  j["events"] = std::move(events);
  return j;
}

ordered_json ModelJson(const ForestModel& model, ProfileWindow window) {
  ordered_json j;
  j["format_version"] = model.format_version;
  j["n_trees"] = model.trees.size();
  j["max_depth"] = Nullable(model.config.max_depth);
  j["min_samples_split"] = model.config.min_samples_split;
  j["features_per_split"] = model.config.features_per_split;
  j["seed"] = model.config.seed;
  j["balance"] = model.config.balance;
  j["window_months"] = window.months();
  j["feature_names"] = ordered_json::array();
  for (const auto name : kFeatureNames) j["feature_names"].push_back(name);
  return j;
}

TriageServer::TriageServer(TriageStore& store)
    : store_(store), http_(std::make_unique<httplib::Server>()) {
  Routes();
}

TriageServer::~TriageServer() { Stop(); }

void TriageServer::Routes() {
  http_->Get("/healthz", Guarded([](const httplib::Request&, httplib::Response& res) {
    Reply(res, 200, ordered_json{{"status", "ok"}});
  }));

  http_->Get("/model", Guarded([this](const httplib::Request&, httplib::Response& res) {
    if (store_.model() == nullptr) Fail(ErrorCode::kState, "no model loaded");
    Reply(res, 200, ModelJson(*store_.model(), store_.window()));
  }));

  http_->Get("/tickets", Guarded([this](const httplib::Request& req,
                                        httplib::Response& res) {
    const std::string sort_name =
        req.has_param("sort") ? req.get_param_value("sort") : "er";
    const std::string order =
        req.has_param("order") ? req.get_param_value("order") : "desc";
    const auto key = ParseSortKey(sort_name);
    if (!key) Fail(ErrorCode::kValidation, "sort must be one of er, cer, mer");
    if (order != "desc" && order != "asc") {
      Fail(ErrorCode::kValidation, "order must be desc or asc");
    }
    ordered_json list = ordered_json::array();
    for (const auto& e : store_.ListOpen(*key, order == "desc")) {
      list.push_back(EntryJson(e));
    }
    Reply(res, 200, ordered_json{{"tickets", std::move(list)}});
  }));

  http_->Get(R"(/tickets/([^/]+))", Guarded([this](const httplib::Request& req,
                                                   httplib::Response& res) {
    Reply(res, 200, DetailJson(store_.GetDetail(req.matches[1].str())));
  }));

  http_->Put(R"(/tickets/([^/]+)/mer)", Guarded([this](const httplib::Request& req,
                                                       httplib::Response& res) {
    const auto body = nlohmann::json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.is_object()) {
      Fail(ErrorCode::kValidation, "body must be a JSON object");
    }
    if (!body.contains("value") || !body["value"].is_number_integer()) {
      Fail(ErrorCode::kValidation, "value must be an integer");
    }
    if (!body.contains("author") || !body["author"].is_string()) {
      Fail(ErrorCode::kValidation, "author must be a string");
    }
    const auto value = body["value"].get<std::int64_t>();
    if (value < 0 || value > 100) {
      Fail(ErrorCode::kValidation, "MER out of range [0,100]");
    }
    Reply(res, 200,
          EntryJson(store_.SetMer(req.matches[1].str(), static_cast<int>(value),
                                  body["author"].get<std::string>())));
  }));

  http_->Post("/events", Guarded([this](const httplib::Request& req,
                                        httplib::Response& res) {
    const UpdateSummary s = store_.IngestEvents(ParseEventLog(req.body).events);
    ordered_json j;
    j["events"] = s.events;
    j["update"] = s.update;
    j["updated"] = s.updated;
    j["closed"] = s.closed;
    ordered_json entries = ordered_json::array();
    for (const auto& e : s.entries) entries.push_back(EntryJson(e));
    j["entries"] = std::move(entries);
    Reply(res, 200, j);
  }));

  http_->set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) {
      ReplyError(res, res.status, res.status == 404 ? "not_found" : "http",
                 "no such endpoint");
    }
  });
}

int TriageServer::Start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = http_->bind_to_any_port(host);
  } else if (!http_->bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) {
    Fail(ErrorCode::kRuntime,
         "cannot bind " + host + ":" + std::to_string(port));
  }
  thread_ = std::thread([this] { http_->listen_after_bind(); });
  http_->wait_until_ready();
  return bound;
}

void TriageServer::Wait() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [this] { return stopped_ || !thread_.joinable(); });
}

void TriageServer::Stop() {
  std::lock_guard lock(mu_);
  if (stopped_) return;
  if (http_) http_->stop();
  if (thread_.joinable()) thread_.join();
  stopped_ = true;
  cv_.notify_all();
}

}  // namespace escalade
