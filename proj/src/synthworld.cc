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

#include "preflab/synthworld.h"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "preflab/error.h"
#include "preflab/objectives.h"
#include "preflab/rng.h"

namespace preflab::synthworld {

namespace {

void ValidateConfig(const WorldConfig& cfg) {
  if (cfg.vocab_size < 2) Fail(ErrorCode::kInvalidArgument, "world vocab_size must be >= 2");
  if (cfg.quality_tokens < 1 || cfg.quality_tokens >= cfg.vocab_size) {
    Fail(ErrorCode::kInvalidArgument, "quality_tokens must be in [1, vocab_size)");
  }
  if (cfg.prompt_len < 1) Fail(ErrorCode::kInvalidArgument, "prompt_len must be >= 1");
  if (cfg.response_len < 1) Fail(ErrorCode::kInvalidArgument, "response_len must be >= 1");
  if (!(cfg.channel_alpha >= 0.0 && cfg.channel_alpha <= 1.0) ||
      !(cfg.channel_beta >= 0.0 && cfg.channel_beta <= 1.0)) {
    Fail(ErrorCode::kInvalidArgument, "channel probabilities must lie in [0, 1]");
  }
  if (!std::isfinite(cfg.reward_quality) || !std::isfinite(cfg.reward_length) ||
      !std::isfinite(cfg.epsilon_bias)) {
    Fail(ErrorCode::kInvalidArgument, "world reward weights and bias must be finite");
  }
}

std::vector<policy::TokenId> DrawResponse(const WorldConfig& cfg, Rng& rng) {
  size_t len = 1 + static_cast<size_t>(rng.NextBelow(static_cast<uint64_t>(cfg.response_len)));
  std::vector<policy::TokenId> out(len);
  for (auto& t : out) {
    t = static_cast<policy::TokenId>(rng.NextBelow(static_cast<uint64_t>(cfg.vocab_size)));
  }
  return out;
}

corpus::PreferenceRecord GenRecordImpl(const WorldConfig& cfg, const policy::Vocab& vocab,
                                       uint64_t index, bool* saturated) {
  Rng rng(MixSeed(cfg.seed, index));

  std::vector<policy::TokenId> prompt(static_cast<size_t>(cfg.prompt_len));
  for (auto& t : prompt) {
    t = static_cast<policy::TokenId>(rng.NextBelow(static_cast<uint64_t>(cfg.vocab_size)));
  }

  std::vector<policy::TokenId> y1 = DrawResponse(cfg, rng);
  std::vector<policy::TokenId> y2 = DrawResponse(cfg, rng);
  int tries = 0;
  while (y2 == y1) {
    if (++tries > 100) {
      Fail(ErrorCode::kInvalidArgument, "world too small to draw distinct responses");
    }
    y2 = DrawResponse(cfg, rng);
  }

  double gap = Reward(cfg, y1) - Reward(cfg, y2);
  if (gap < 0.0) {
    std::swap(y1, y2);
    gap = -gap;
  }

  double f = objectives::Sigmoid(gap);
  double q = f + cfg.epsilon_bias;
  double qc = std::min(1.0, std::max(0.0, q));
  if (saturated != nullptr) *saturated = std::fabs(qc - q) > 1e-9;

  bool z = rng.NextBernoulli(qc);
  bool r = rng.NextBernoulli(z ? cfg.channel_beta : cfg.channel_alpha);

  const auto& chosen = z ? y1 : y2;
  const auto& rejected = z ? y2 : y1;
  bool argues_chosen = (r == z);

  std::string rationale = argues_chosen ? "PREFER:A" : "PREFER:B";
  if (cfg.style == RationaleStyle::kFeatureNamed) {
    const auto& argued = argues_chosen ? chosen : rejected;
    const auto& other = argues_chosen ? rejected : chosen;
    Features fa = Featurize(cfg, argued);
    Features fo = Featurize(cfg, other);
    double dq = cfg.reward_quality * (fa.quality - fo.quality);
    double dl = cfg.reward_length * (fa.length - fo.length);
    rationale += dq >= dl ? " FEATURE:quality" : " FEATURE:len";
  }

  corpus::PreferenceRecord rec;
  rec.prompt = vocab.Detokenize(prompt);
  rec.chosen = vocab.Detokenize(chosen);
  rec.rejected = vocab.Detokenize(rejected);
  rec.rationale = rationale;
  rec.rationale_kind = corpus::RationaleKind::kSynthetic;
  return rec;
}

}  // namespace

policy::Vocab WorldVocab(const WorldConfig& cfg) {
  ValidateConfig(cfg);
  std::vector<std::string> tokens;
  tokens.reserve(static_cast<size_t>(cfg.vocab_size) + 8);
  for (int32_t i = 0; i < cfg.quality_tokens; ++i) tokens.push_back("q" + std::to_string(i));
  for (int32_t i = 0; i < cfg.vocab_size - cfg.quality_tokens; ++i) {
    tokens.push_back("u" + std::to_string(i));
  }
  for (const char* m : {"QUERY:", "PREFERRED:", "REJECTED:", "RATIONALE:", "PREFER:A",
                        "PREFER:B", "FEATURE:quality", "FEATURE:len"}) {
    tokens.push_back(m);
  }
  return policy::Vocab::Make(policy::VocabKind::kSymbol, tokens);
}

Features Featurize(const WorldConfig& cfg, const std::vector<policy::TokenId>& tokens) {
  Features f;
  for (policy::TokenId t : tokens) {
    if (t < static_cast<policy::TokenId>(cfg.quality_tokens)) f.quality += 1.0;
  }
  f.length = static_cast<double>(tokens.size());
  return f;
}

double Reward(const WorldConfig& cfg, const std::vector<policy::TokenId>& tokens) {
  Features f = Featurize(cfg, tokens);
  return cfg.reward_quality * f.quality + cfg.reward_length * f.length;
}

JudgeVerdict Judge(const WorldConfig& cfg, const std::vector<policy::TokenId>& a,
                   const std::vector<policy::TokenId>& b, double draw_threshold) {
  if (!(draw_threshold >= 0.0)) {
    Fail(ErrorCode::kInvalidArgument, "draw_threshold must be >= 0");
  }
  JudgeVerdict v;
  v.reward_gap = Reward(cfg, a) - Reward(cfg, b);
  if (v.reward_gap > draw_threshold) {
    v.outcome = Outcome::kWin;
  } else if (v.reward_gap < -draw_threshold) {
    v.outcome = Outcome::kLose;
  } else {
    v.outcome = Outcome::kDraw;
  }
  return v;
}

corpus::PreferenceRecord GenRecord(const WorldConfig& cfg, uint64_t index) {
  policy::Vocab vocab = WorldVocab(cfg);
  return GenRecordImpl(cfg, vocab, index, nullptr);
}

corpus::Dataset MakeDataset(const WorldConfig& cfg, size_t n, WorldStats* stats) {
  if (n == 0) Fail(ErrorCode::kInvalidArgument, "make_dataset needs n >= 1");
  policy::Vocab vocab = WorldVocab(cfg);
  corpus::Dataset out;
  out.reserve(n);
  size_t saturations = 0;
  for (size_t i = 0; i < n; ++i) {
    bool sat = false;
    out.push_back(GenRecordImpl(cfg, vocab, static_cast<uint64_t>(i), &sat));
    if (sat) ++saturations;
  }
  bool warn = n > 0 && static_cast<double>(saturations) > 0.01 * static_cast<double>(n);
  if (warn) {
    std::fprintf(stderr,
                 "warning: preference bias clamp saturated in %zu of %zu draws; "
                 "the configured epsilon is not fully realized\n",
                 saturations, n);
  }
  if (stats != nullptr) {
    stats->records = n;
    stats->clamp_saturations = saturations;
    stats->saturation_warning = warn;
  }
  return out;
}

std::vector<std::vector<policy::TokenId>> MakePrompts(const WorldConfig& cfg, size_t n,
                                                      uint64_t seed) {
  ValidateConfig(cfg);
  std::vector<std::vector<policy::TokenId>> out;
  out.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    Rng rng(MixSeed(seed, i));
    std::vector<policy::TokenId> prompt(static_cast<size_t>(cfg.prompt_len));
    for (auto& t : prompt) {
      t = static_cast<policy::TokenId>(rng.NextBelow(static_cast<uint64_t>(cfg.vocab_size)));
    }
    out.push_back(std::move(prompt));
  }
  return out;
}

}  // namespace preflab::synthworld
