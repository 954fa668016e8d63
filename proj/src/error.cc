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

#include "preflab/error.h"

namespace preflab {

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kPrecondition: return "precondition";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kSchema: return "schema";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kTokenization: return "tokenization";
    case ErrorCode::kNumeric: return "numeric";
    case ErrorCode::kUnsupported: return "unsupported";
    case ErrorCode::kCorruptCheckpoint: return "corrupt_checkpoint";
    case ErrorCode::kVersionMismatch: return "version_mismatch";
    case ErrorCode::kDegenerateChannel: return "degenerate_channel";
    case ErrorCode::kHttp: return "http";
    case ErrorCode::kProvider: return "provider";
  }
  return "unknown";
}

}  // namespace preflab
