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

#ifndef PREFLAB_SYNTHWORLD_H_
#define PREFLAB_SYNTHWORLD_H_

#include <cstdint>
#include <string>
#include <vector>

#include "preflab/corpus.h"
#include "preflab/vocab.h"

namespace preflab::synthworld {

enum class RationaleStyle { kFeatureNamed = 0, kPolarityOnly };

// Latent preference world. Responses are symbol strings; a response's latent
// reward is reward_quality * (#quality tokens) + reward_length * length.
// For each record two responses are drawn, ordered so y1 has the higher
// reward, and the preferred one is chosen with probability
// clamp(sigma(reward gap) + epsilon_bias). A one-bit rationale signal R goes
// through the (alpha, beta) channel: the rendered rationale argues for the
// chosen response iff R agrees with the choice.
struct WorldConfig {
  int32_t vocab_size = 16;       // content tokens; ids [0, vocab_size)
  int32_t quality_tokens = 5;    // first ids count as quality
  int32_t prompt_len = 4;
  int32_t response_len = 8;      // lengths drawn uniformly from 1..response_len
  double reward_quality = 1.0;
  double reward_length = -0.13;
  double epsilon_bias = 0.0;
  double channel_alpha = 0.0;    // P(R=1 | Z=0)
  double channel_beta = 1.0;     // P(R=1 | Z=1)
  RationaleStyle style = RationaleStyle::kFeatureNamed;
  uint64_t seed = 1;
};

struct Features {
  double quality = 0.0;
  double length = 0.0;
};

enum class Outcome { kWin = 0, kLose, kDraw };

struct JudgeVerdict {
  Outcome outcome = Outcome::kDraw;
  double reward_gap = 0.0;  // reward(a) - reward(b)
};

struct WorldStats {
  size_t records = 0;
  size_t clamp_saturations = 0;  // q = f + eps clipped by more than 1e-9
  bool saturation_warning = false;
};

// Symbol vocabulary: quality tokens q0.., filler tokens u0.., then the
// template and rationale markers. Quality ids come first, so Featurize can
// classify by id.
policy::Vocab WorldVocab(const WorldConfig& cfg);

Features Featurize(const WorldConfig& cfg, const std::vector<policy::TokenId>& tokens);

double Reward(const WorldConfig& cfg, const std::vector<policy::TokenId>& tokens);

// win if reward(a) - reward(b) > draw_threshold, lose if < -threshold,
// draw otherwise.
JudgeVerdict Judge(const WorldConfig& cfg, const std::vector<policy::TokenId>& a,
                   const std::vector<policy::TokenId>& b, double draw_threshold);

// Record `index` of the world; deterministic in (cfg.seed, index) alone.
corpus::PreferenceRecord GenRecord(const WorldConfig& cfg, uint64_t index);

// Records 0..n-1. Warns on stderr (and in stats) when the epsilon clamp
// saturates in more than 1% of draws.
corpus::Dataset MakeDataset(const WorldConfig& cfg, size_t n, WorldStats* stats = nullptr);

// Held-out prompt token sequences on an independent stream keyed by `seed`.
std::vector<std::vector<policy::TokenId>> MakePrompts(const WorldConfig& cfg, size_t n,
                                                      uint64_t seed);

}  // namespace preflab::synthworld

#endif  // PREFLAB_SYNTHWORLD_H_
