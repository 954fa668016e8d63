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

#include "preflab/corpus.h"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "preflab/error.h"
#include "preflab/rng.h"

namespace preflab::corpus {

using nlohmann::ordered_json;

const char* RationaleKindName(RationaleKind kind) {
  switch (kind) {
    case RationaleKind::kNone: return "none";
    case RationaleKind::kGeneral: return "general";
    case RationaleKind::kDetailed: return "detailed";
    case RationaleKind::kSynthetic: return "synthetic";
  }
  return "none";
}

RationaleKind RationaleKindFromName(const std::string& name) {
  if (name == "none") return RationaleKind::kNone;
  if (name == "general") return RationaleKind::kGeneral;
  if (name == "detailed") return RationaleKind::kDetailed;
  if (name == "synthetic") return RationaleKind::kSynthetic;
  Fail(ErrorCode::kSchema, "unknown rationale_kind \"" + name + "\"");
}

namespace {

bool IsBlank(const std::string& line) {
  for (char c : line) {
    if (c != ' ' && c != '\t' && c != '\r') return false;
  }
  return true;
}

std::string RequireString(const ordered_json& obj, const char* key, size_t line_no,
                          const std::string& origin) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    Fail(ErrorCode::kSchema, origin + ":" + std::to_string(line_no) +
                                 ": missing required key \"" + key + "\"");
  }
  if (!it->is_string()) {
    Fail(ErrorCode::kSchema, origin + ":" + std::to_string(line_no) + ": key \"" + key +
                                 "\" must be a string");
  }
  return it->get<std::string>();
}

}  // namespace

Dataset ParseJsonl(const std::string& text, const std::string& origin) {
  Dataset ds;
  std::istringstream in(text);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (IsBlank(line)) continue;
    ordered_json obj;
    try {
      obj = ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      Fail(ErrorCode::kParse,
           origin + ":" + std::to_string(line_no) + ": malformed JSON: " + e.what());
    }
    if (!obj.is_object()) {
      Fail(ErrorCode::kSchema,
           origin + ":" + std::to_string(line_no) + ": line is not a JSON object");
    }
    PreferenceRecord rec;
    rec.prompt = RequireString(obj, "prompt", line_no, origin);
    rec.chosen = RequireString(obj, "chosen", line_no, origin);
    rec.rejected = RequireString(obj, "rejected", line_no, origin);
    if (auto it = obj.find("rationale"); it != obj.end()) {
      if (!it->is_string()) {
        Fail(ErrorCode::kSchema,
             origin + ":" + std::to_string(line_no) + ": key \"rationale\" must be a string");
      }
      rec.rationale = it->get<std::string>();
    }
    if (auto it = obj.find("rationale_kind"); it != obj.end()) {
      if (!it->is_string()) {
        Fail(ErrorCode::kSchema, origin + ":" + std::to_string(line_no) +
                                     ": key \"rationale_kind\" must be a string");
      }
      try {
        rec.rationale_kind = RationaleKindFromName(it->get<std::string>());
      } catch (const Error& e) {
        Fail(ErrorCode::kSchema, origin + ":" + std::to_string(line_no) + ": " + e.what());
      }
    }
    ds.push_back(std::move(rec));
  }
  return ds;
}

Dataset LoadJsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    Fail(ErrorCode::kIo, "cannot open \"" + path + "\" for reading");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return ParseJsonl(buf.str(), path);
}

std::string ToJsonl(const Dataset& ds) {
  std::string out;
  for (const PreferenceRecord& rec : ds) {
    ordered_json obj;
    obj["prompt"] = rec.prompt;
    obj["chosen"] = rec.chosen;
    obj["rejected"] = rec.rejected;
    if (rec.rationale_kind != RationaleKind::kNone) {
      obj["rationale"] = rec.rationale;
      obj["rationale_kind"] = RationaleKindName(rec.rationale_kind);
    }
    out += obj.dump();
    out += '\n';
  }
  return out;
}

void SaveJsonl(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    Fail(ErrorCode::kIo, "cannot open \"" + path + "\" for writing");
  }
  out << ToJsonl(ds);
  if (!out) {
    Fail(ErrorCode::kIo, "write to \"" + path + "\" failed");
  }
}

std::vector<Violation> Validate(const Dataset& ds) {
  std::vector<Violation> out;
  for (size_t i = 0; i < ds.size(); ++i) {
    const PreferenceRecord& r = ds[i];
    if (r.prompt.empty()) out.push_back({i, "empty prompt"});
    if (r.chosen.empty()) out.push_back({i, "empty chosen"});
    if (r.rejected.empty()) out.push_back({i, "empty rejected"});
    if (!r.chosen.empty() && r.chosen == r.rejected) {
      out.push_back({i, "distinct responses: chosen and rejected are identical"});
    }
    bool has_text = !r.rationale.empty();
    bool has_kind = r.rationale_kind != RationaleKind::kNone;
    if (has_text && !has_kind) {
      out.push_back({i, "kind/rationale consistency: rationale present but rationale_kind is none"});
    }
    if (!has_text && has_kind) {
      out.push_back({i, std::string("kind/rationale consistency: rationale_kind is ") +
                            RationaleKindName(r.rationale_kind) + " but rationale is empty"});
    }
  }
  return out;
}

Dataset PermuteRationales(const Dataset& ds, uint64_t seed) {
  size_t n = ds.size();
  if (n < 2) {
    Fail(ErrorCode::kInvalidArgument, "permutation needs at least 2 records");
  }
  for (size_t i = 0; i < n; ++i) {
    if (ds[i].rationale_kind == RationaleKind::kNone) {
      Fail(ErrorCode::kPrecondition,
           "record " + std::to_string(i) + " has no rationale to permute");
    }
  }
  Rng rng(seed);
  std::vector<size_t> perm(n);
  bool deranged = false;
  while (!deranged) {
    for (size_t i = 0; i < n; ++i) perm[i] = i;
    for (size_t i = n - 1; i > 0; --i) {
      size_t j = rng.NextBelow(i + 1);
      std::swap(perm[i], perm[j]);
    }
    deranged = true;
    for (size_t i = 0; i < n; ++i) {
      if (perm[i] == i) {
        deranged = false;
        break;
      }
    }
  }
  Dataset out = ds;
  for (size_t i = 0; i < n; ++i) {
    out[i].rationale = ds[perm[i]].rationale;
    out[i].rationale_kind = ds[perm[i]].rationale_kind;
  }
  return out;
}

namespace {

// Flips the first PREFER:A / PREFER:B token; whitespace layout is preserved.
std::string FlipPolarity(const std::string& rationale, size_t index) {
  size_t pos = 0;
  while (pos < rationale.size()) {
    while (pos < rationale.size() && (rationale[pos] == ' ' || rationale[pos] == '\n' ||
                                      rationale[pos] == '\t')) {
      ++pos;
    }
    size_t end = pos;
    while (end < rationale.size() && rationale[end] != ' ' && rationale[end] != '\n' &&
           rationale[end] != '\t') {
      ++end;
    }
    std::string token = rationale.substr(pos, end - pos);
    if (token == "PREFER:A" || token == "PREFER:B") {
      std::string flipped = token == "PREFER:A" ? "PREFER:B" : "PREFER:A";
      return rationale.substr(0, pos) + flipped + rationale.substr(end);
    }
    pos = end;
  }
  Fail(ErrorCode::kSchema, "record " + std::to_string(index) +
                               ": synthetic rationale carries no PREFER:A/PREFER:B token");
}

}  // namespace

Dataset NegateRationales(const Dataset& ds) {
  for (size_t i = 0; i < ds.size(); ++i) {
    if (ds[i].rationale_kind != RationaleKind::kSynthetic) {
      Fail(ErrorCode::kUnsupported,
           "record " + std::to_string(i) + ": polarity negation requires synthetic rationales, got " +
               RationaleKindName(ds[i].rationale_kind));
    }
  }
  Dataset out = ds;
  for (size_t i = 0; i < out.size(); ++i) {
    out[i].rationale = FlipPolarity(out[i].rationale, i);
  }
  return out;
}

Split SplitDataset(const Dataset& ds, size_t n_train, size_t n_test, uint64_t seed) {
  size_t n = ds.size();
  if (n_train + n_test > n) {
    Fail(ErrorCode::kInvalidArgument,
         "split of " + std::to_string(n) + " records cannot yield " + std::to_string(n_train) +
             " train + " + std::to_string(n_test) + " test");
  }
  Rng rng(seed);
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  for (size_t i = n - 1; i > 0; --i) {
    size_t j = rng.NextBelow(i + 1);
    std::swap(order[i], order[j]);
  }
  // Test indices come first so the test set depends only on (seed, n_test).
  Split split;
  split.test.reserve(n_test);
  split.train.reserve(n_train);
  for (size_t i = 0; i < n_test; ++i) split.test.push_back(ds[order[i]]);
  for (size_t i = 0; i < n_train; ++i) split.train.push_back(ds[order[n_test + i]]);
  return split;
}

}  // namespace preflab::corpus
