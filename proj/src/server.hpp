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

// HTTP+JSON front end for the triage store.

#ifndef ESCALADE_SERVER_HPP_
#define ESCALADE_SERVER_HPP_

#include <condition_variable>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "json.hpp"
#include "triage.hpp"

namespace httplib {
class Server;
}

namespace escalade {

nlohmann::ordered_json EntryJson(const TriageEntry& entry);
nlohmann::ordered_json DetailJson(const TicketDetail& detail);
nlohmann::ordered_json ModelJson(const ForestModel& model, ProfileWindow window);

class TriageServer {
 public:
  explicit TriageServer(TriageStore& store);
  ~TriageServer();

  // Binds and serves on a background thread. Port 0 picks a free port.
  // Returns the bound port.
  int Start(const std::string& host, int port);
  // Blocks until Stop() has been called from another thread.
  void Wait();
  void Stop();

 private:
  void Routes();

  TriageStore& store_;
  std::unique_ptr<httplib::Server> http_;
  std::thread thread_;
  std::mutex mu_;
  std::condition_variable cv_;
  bool stopped_ = false;
};

}  // namespace escalade

#endif  // ESCALADE_SERVER_HPP_
