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

#include "httplib.h"
#include "ingest.hpp"
#include "server.hpp"
#include "step_model.hpp"

namespace escalade {
namespace {

using testing::Messages;
using testing::StepModel;

std::string Lines(const std::vector<TicketEvent>& events) {
  std::string out;
  for (const auto& ev : events) out += FormatEventLine(ev) + "\n";
  return out;
}

class ServerTest : public ::testing::Test {
 protected:
  void SetUp() override {
    TriageOptions o;
    o.clock = [] { return Minutes{42}; };
    store_ = std::make_unique<TriageStore>(StepModel(), o);
    server_ = std::make_unique<TriageServer>(*store_);
    port_ = server_->Start("127.0.0.1", 0);
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
  }
  void TearDown() override {
    server_->Stop();
  }

  nlohmann::json Body(const httplib::Result& r) {
    EXPECT_TRUE(r);
    if (!r) return {};
    return nlohmann::json::parse(r->body);
  }

  std::unique_ptr<TriageStore> store_;
  std::unique_ptr<TriageServer> server_;
  std::unique_ptr<httplib::Client> client_;
  int port_ = 0;
};

TEST_F(ServerTest, HealthAndModel) {
  auto r = client_->Get("/healthz");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  r = client_->Get("/model");
  const auto j = Body(r);
  EXPECT_EQ(r->status, 200);
  EXPECT_EQ(j["n_trees"], 100);
  EXPECT_EQ(j["window_months"], 6);
  EXPECT_EQ(j["feature_names"].size(), kFeatureCount);
}

TEST_F(ServerTest, EventsListDetailAndMer) {
  auto r = client_->Post("/events", Lines(Messages("A", "C1", 0, 59)) +
                                        Lines(Messages("B", "C1", 0, 19)),
                         "application/x-ndjson");
  auto j = Body(r);
  ASSERT_EQ(r->status, 200) << r->body;
  EXPECT_EQ(j["events"], 80);
  EXPECT_EQ(j["update"], 1);
  EXPECT_EQ(j["updated"], nlohmann::json::array({"A", "B"}));
  ASSERT_EQ(j["entries"].size(), 2u);
  EXPECT_EQ(j["entries"][0]["current_er"], 60);
  EXPECT_EQ(j["entries"][0]["predicted_crit"], true);
  EXPECT_TRUE(j["entries"][0]["cer"].is_null());

  r = client_->Post("/events", Lines(Messages("B", "C1", 20, 29)), "application/x-ndjson");
  j = Body(r);
  EXPECT_EQ(j["entries"][0]["cer"], 10);
  EXPECT_EQ(j["entries"][0]["previous_er"], 20);

  j = Body(client_->Get("/tickets?sort=er&order=desc"));
  ASSERT_EQ(j["tickets"].size(), 2u);
  EXPECT_EQ(j["tickets"][0]["ticket_id"], "A");
  j = Body(client_->Get("/tickets?sort=er&order=asc"));
  EXPECT_EQ(j["tickets"][0]["ticket_id"], "B");
  for (const auto& e : j["tickets"]) {
    EXPECT_EQ(e["predicted_crit"], e["current_er"].get<int>() > 50);
    if (!e["cer"].is_null()) {
      EXPECT_EQ(e["cer"].get<int>(),
                e["current_er"].get<int>() - e["previous_er"].get<int>());
    }
  }

  j = Body(client_->Get("/tickets/B"));
  EXPECT_EQ(j["current_er"], 30);
  EXPECT_EQ(j["features"].size(), kFeatureCount);
  EXPECT_EQ(j["features"][0]["name"], "number_of_entries");
  EXPECT_EQ(j["features"][0]["value"], 30);
  EXPECT_EQ(j["events"].size(), 30u);
  EXPECT_EQ(j["events"][0]["kind"], "opened");

  r = client_->Put("/tickets/B/mer", R"({"value":75,"author":"ana"})", "application/json");
  j = Body(r);
  EXPECT_EQ(r->status, 200);
  EXPECT_EQ(j["mer"], 75);
  EXPECT_EQ(j["mer_set_by"], "ana");
  EXPECT_EQ(j["mer_set_at"], 42);
  EXPECT_EQ(j["current_er"], 30);
  j = Body(client_->Get("/tickets?sort=mer"));
  EXPECT_EQ(j["tickets"][0]["ticket_id"], "B");
}

TEST_F(ServerTest, ErrorStatuses) {
  client_->Post("/events", Lines(Messages("A", "C1", 0, 3)), "application/x-ndjson");
  const auto status = [](const httplib::Result& r) { return r ? r->status : -1; };
  const auto put = [&](const std::string& body) {
    return status(client_->Put("/tickets/A/mer", body, "application/json"));
  };
  EXPECT_EQ(put(R"({"value":0,"author":"a"})"), 200);
  EXPECT_EQ(put(R"({"value":100,"author":"a"})"), 200);
  EXPECT_EQ(put(R"({"value":-1,"author":"a"})"), 400);
  EXPECT_EQ(put(R"({"value":101,"author":"a"})"), 400);
  EXPECT_EQ(put(R"({"value":5.5,"author":"a"})"), 400);
  EXPECT_EQ(put(R"({"value":5})"), 400);
  EXPECT_EQ(put("nope"), 400);
  EXPECT_EQ(status(client_->Put("/tickets/Z/mer", R"({"value":5,"author":"a"})",
                                "application/json")),
            404);
  EXPECT_EQ(status(client_->Get("/tickets/Z")), 404);
  EXPECT_EQ(status(client_->Get("/tickets?sort=bogus")), 400);
  EXPECT_EQ(status(client_->Get("/tickets?order=sideways")), 400);
  EXPECT_EQ(status(client_->Get("/nowhere")), 404);
  EXPECT_EQ(status(client_->Post("/events", "{bad json\n", "application/x-ndjson")), 400);
  EXPECT_EQ(status(client_->Post("/events", Lines(Messages("A", "C1", 1, 1)),
                                 "application/x-ndjson")),
            400);
  client_->Post("/events", Lines({testing::Ev("A", 4, 5000, EventKind::kClosed, "S1")}),
                "application/x-ndjson");
  EXPECT_EQ(status(client_->Post("/events", Lines(Messages("A", "C1", 5, 5)),
                                 "application/x-ndjson")),
            409);
  const auto r = client_->Get("/tickets/Z");
  const auto j = Body(r);
  EXPECT_EQ(j["code"], "not_found");
  EXPECT_TRUE(j.contains("message"));
}

TEST(ServerNoModel, StateErrors) {
  TriageOptions options;
  TriageStore store(nullptr, options);
  TriageServer server(store);
  const int port = server.Start("127.0.0.1", 0);
  httplib::Client client("127.0.0.1", port);
  auto r = client.Get("/model");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 409);
  r = client.Post("/events", Lines(Messages("A", "C1", 0, 0)), "application/x-ndjson");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 409);
  server.Stop();
  server.Stop();  // idempotent
  server.Wait();
}

}  // namespace
}  // namespace escalade
