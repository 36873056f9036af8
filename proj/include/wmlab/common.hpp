/*
 * Copyright 2026 The wmlab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace wmlab {

using TokenId = std::uint32_t;

inline constexpr TokenId kBosId = 0;
inline constexpr TokenId kUnkId = 1;

enum class ErrorCode {
  kInvalidParameter,
  kInvalidInput,
  kCorpusTooSmall,
  kInsufficientText,
  kInvalidDataset,
  kUndefinedBaseline,
  kInsufficientPrompts,
  kParse,
  kMissingFile,
  kMissingCells,
  kIo,
};

inline std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidParameter: return "invalid-parameter";
    case ErrorCode::kInvalidInput: return "invalid-input";
    case ErrorCode::kCorpusTooSmall: return "corpus-too-small";
    case ErrorCode::kInsufficientText: return "insufficient-text";
    case ErrorCode::kInvalidDataset: return "invalid-dataset";
    case ErrorCode::kUndefinedBaseline: return "undefined-baseline";
    case ErrorCode::kInsufficientPrompts: return "insufficient-prompts";
    case ErrorCode::kParse: return "parse-error";
    case ErrorCode::kMissingFile: return "missing-file";
    case ErrorCode::kMissingCells: return "missing-cells";
    case ErrorCode::kIo: return "io-error";
  }
  return "unknown";
}

// All library failures are reported as wmlab::Error. The code is stable and
// is what tests and the CLI dispatch on; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

// Literal messages bind here and cost nothing on the passing path.
inline void require(bool condition, ErrorCode code, const char* message) {
  if (!condition) [[unlikely]] fail(code, message);
}

}  // namespace wmlab
