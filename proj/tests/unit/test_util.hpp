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

#ifndef ESCALADE_TESTS_UNIT_TEST_UTIL_HPP_
#define ESCALADE_TESTS_UNIT_TEST_UTIL_HPP_

#include <gtest/gtest.h>

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unistd.h>

#include "error.hpp"
#include "model.hpp"

namespace escalade::testing {

// Runs `f` and checks it throws an Error with `code` whose message contains
// `fragment`.
template <typename F>
void ExpectError(F&& f, ErrorCode code, std::string_view fragment = {}) {
  try {
    f();
    ADD_FAILURE() << "expected an error containing \"" << fragment << "\"";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
    EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos)
        << "message: " << e.what();
  }
}

inline TicketEvent Ev(const std::string& ticket, std::int64_t seq, Minutes ts,
                      EventKind kind, const std::string& actor,
                      std::optional<int> severity = std::nullopt,
                      std::optional<int> level = std::nullopt,
                      const std::string& customer = {}) {
  TicketEvent e;
  e.ticket_id = ticket;
  e.seq = seq;
  e.timestamp = ts;
  e.kind = kind;
  e.actor_id = actor;
  if (severity) e.severity = Severity(*severity);
  if (level) e.level = SupportLevel(*level);
  e.customer_id = customer;
  return e;
}

inline TicketEvent Open(const std::string& ticket, Minutes ts,
                        const std::string& customer, int severity = 3,
                        int level = 1) {
  return Ev(ticket, 0, ts, EventKind::kOpened, customer, severity, level,
            customer);
}

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    path_ = std::filesystem::temp_directory_path() /
            ("escalade-test-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter_++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  static inline int counter_ = 0;
  std::filesystem::path path_;
};

}  // namespace escalade::testing

#endif  // ESCALADE_TESTS_UNIT_TEST_UTIL_HPP_
