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

#ifndef PREFLAB_CORPUS_H_
#define PREFLAB_CORPUS_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace preflab::corpus {

enum class RationaleKind { kNone = 0, kGeneral, kDetailed, kSynthetic };

const char* RationaleKindName(RationaleKind kind);
RationaleKind RationaleKindFromName(const std::string& name);

struct PreferenceRecord {
  std::string prompt;
  std::string chosen;
  std::string rejected;
  std::string rationale;  // meaningful only when rationale_kind != kNone
  RationaleKind rationale_kind = RationaleKind::kNone;
};

using Dataset = std::vector<PreferenceRecord>;

struct Violation {
  size_t index;
  std::string what;
};

// One JSON object per line; keys prompt/chosen/rejected required, rationale
// and rationale_kind optional, unknown keys ignored. Whitespace-only lines
// are skipped. Parse/schema errors carry the 1-based line number.
Dataset LoadJsonl(const std::string& path);
Dataset ParseJsonl(const std::string& text, const std::string& origin);

// Deterministic byte output: fixed key order, one record per line, trailing
// newline on every line.
void SaveJsonl(const Dataset& ds, const std::string& path);
std::string ToJsonl(const Dataset& ds);

// Data-level checks (empty fields, chosen == rejected, rationale/kind
// mismatches). Returns violations rather than throwing: odd data is data.
std::vector<Violation> Validate(const Dataset& ds);

// Rationale corruption: reassign rationales by a uniform derangement of the
// record indices (Fisher-Yates, redrawn until no index is fixed). Requires
// every record to carry a rationale and n >= 2.
Dataset PermuteRationales(const Dataset& ds, uint64_t seed);

// Rationale corruption: flip the polarity token PREFER:A <-> PREFER:B in
// every rationale. Requires synthetic-kind rationales throughout; errors
// name the first offending record index.
Dataset NegateRationales(const Dataset& ds);

struct Split {
  Dataset train;
  Dataset test;
};

// Deterministic shuffle-then-cut split. The test set depends only on
// (seed, dataset, n_test): re-splitting with a different n_train budget keeps
// the test records identical.
Split SplitDataset(const Dataset& ds, size_t n_train, size_t n_test, uint64_t seed);

}  // namespace preflab::corpus

#endif  // PREFLAB_CORPUS_H_
