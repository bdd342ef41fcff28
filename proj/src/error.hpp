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

#ifndef ESCALADE_ERROR_HPP_
#define ESCALADE_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace escalade {

// Numeric values double as CLI exit codes for the first three kinds.
enum class ErrorCode {
  kUsage = 1,
  kValidation = 2,
  kRuntime = 3,
  kNotFound = 4,
  kState = 5,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUsage:
      return "usage";
    case ErrorCode::kValidation:
      return "validation";
    case ErrorCode::kRuntime:
      return "runtime";
    case ErrorCode::kNotFound:
      return "not_found";
    case ErrorCode::kState:
      return "state";
  }
  return "runtime";
}

}  // namespace escalade

#endif  // ESCALADE_ERROR_HPP_
