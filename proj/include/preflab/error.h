// Copyright 2026 The Preflab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PREFLAB_ERROR_H_
#define PREFLAB_ERROR_H_

#include <stdexcept>
#include <string>

namespace preflab {

enum class ErrorCode {
  kInvalidArgument = 1,
  kPrecondition = 2,
  kParse = 3,
  kSchema = 4,
  kIo = 5,
  kTokenization = 6,
  kNumeric = 7,
  kUnsupported = 8,
  kCorruptCheckpoint = 9,
  kVersionMismatch = 10,
  kDegenerateChannel = 11,
  kHttp = 12,
  kProvider = 13,
};

// Single exception type used across the library. `code` maps 1:1 onto the
// C API status enum so errors survive the extern-C boundary.
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

const char* ErrorCodeName(ErrorCode code);

}  // namespace preflab

#endif  // PREFLAB_ERROR_H_
