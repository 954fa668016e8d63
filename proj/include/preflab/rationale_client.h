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

#ifndef PREFLAB_RATIONALE_CLIENT_H_
#define PREFLAB_RATIONALE_CLIENT_H_

#include <cstdint>
#include <string>
#include <vector>

#include "preflab/corpus.h"

namespace preflab::client {

struct RetryPolicy {
  int32_t max_attempts = 3;
  double backoff_base_s = 0.5;  // sleep base * 2^(attempt-1) between attempts
};

struct ApiConfig {
  std::string endpoint = "http://127.0.0.1:8600/v1/chat/completions";
  std::string model = "rationale-model";
  std::string api_key;  // populate from the environment, never from files
  int32_t max_in_flight = 4;
  RetryPolicy retry;
  std::string cache_dir;     // empty disables the response cache
  double temperature = 0.7;  // generation settings are recorded in run metadata
  int32_t max_tokens = 512;
  double timeout_s = 30.0;
};

enum class PromptKind { kGeneral = 0, kDetailed, kJudge };

const char* PromptKindName(PromptKind kind);
PromptKind PromptKindFromName(const std::string& name);

// Reads PREFLAB_API_KEY; empty when unset.
std::string ApiKeyFromEnv();
// Reads PREFLAB_ENDPOINT; empty when unset.
std::string EndpointFromEnv();

// Template instantiation for the rationale prompts (general/detailed). A
// non-zero char_budget rejects oversized prompts instead of truncating.
std::string BuildPrompt(PromptKind kind, const corpus::PreferenceRecord& record,
                        size_t char_budget = 0);

// Template instantiation for the pairwise judge prompt.
std::string BuildJudgePrompt(const std::string& history, const std::string& response1,
                             const std::string& response2, size_t char_budget = 0);

struct ClientStats {
  size_t requests = 0;      // actual HTTP round trips (retries included)
  size_t cache_hits = 0;
  size_t failures = 0;      // records/queries that exhausted retries
  std::vector<size_t> failed_indices;
};

// Attaches a model-written rationale to every record. Results come back in
// input order regardless of request scheduling. Records that still fail
// after retries keep rationale_kind none and are listed in stats; callers
// decide whether that is fatal. Requires kind general or detailed, and
// rationale-free records unless `overwrite`.
corpus::Dataset GenerateRationales(const ApiConfig& cfg, const corpus::Dataset& ds,
                                   corpus::RationaleKind kind, bool overwrite,
                                   ClientStats* stats = nullptr);

enum class JudgeChoice { kResponse1 = 0, kResponse2, kAbstain };

struct JudgeAggregate {
  int32_t votes_response1 = 0;
  int32_t votes_response2 = 0;
  int32_t abstains = 0;
  JudgeChoice majority = JudgeChoice::kAbstain;  // ties abstain
};

// n_queries judge calls; with `shuffle` each call independently randomizes
// which response sits in slot 1 (votes are mapped back before aggregation).
// Replies lacking a parseable "Response 1"/"Response 2" pick count as
// abstentions.
JudgeAggregate JudgePair(const ApiConfig& cfg, const std::string& history,
                         const std::string& response1, const std::string& response2,
                         int32_t n_queries, bool shuffle, uint64_t seed,
                         ClientStats* stats = nullptr);

}  // namespace preflab::client

#endif  // PREFLAB_RATIONALE_CLIENT_H_
