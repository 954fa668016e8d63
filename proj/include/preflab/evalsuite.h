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

#ifndef PREFLAB_EVALSUITE_H_
#define PREFLAB_EVALSUITE_H_

#include <cstdint>
#include <string>
#include <vector>

#include "preflab/corpus.h"
#include "preflab/policy.h"
#include "preflab/synthworld.h"
#include "preflab/trainer.h"

namespace preflab::evalsuite {

struct SamplingConfig {
  int32_t max_len = 8;
  double temperature = 1.0;
  uint64_t seed = 1;
};

struct WinrateResult {
  size_t wins = 0;
  size_t losses = 0;
  size_t draws = 0;
  size_t n_prompts = 0;
  double winrate = 0.0;  // wins / (wins + losses + draws)

  // wins / (wins + losses); 0.5 when every prompt drew.
  double WinrateExcludingDraws() const;
};

// Per prompt: sample one response from each model (both models see the same
// per-prompt sampling seed, so identical models draw identical responses) and
// score the pair with the latent-reward judge. Requires a shared vocabulary.
WinrateResult Winrate(const policy::PolicyModel& model_a, const policy::PolicyModel& model_b,
                      const std::vector<policy::TokenIds>& prompts,
                      const synthworld::WorldConfig& world, const SamplingConfig& sampling,
                      double draw_threshold);

// Mean sampled response length in tokens.
double AvgResponseLength(const policy::PolicyModel& model,
                         const std::vector<policy::TokenIds>& prompts,
                         const SamplingConfig& sampling);

struct CurvePoint {
  std::string experiment;  // row label in the CSV
  size_t train_size = 0;
  WinrateResult result;
};

using Curve = std::vector<CurvePoint>;

// Trains a fresh model per size, always from the same `init`, on the first
// `size` records of `data` (budgets are prefixes of one another), then plays
// it against `opponent` on the held-out prompts. Sizes must be strictly
// increasing and within the dataset.
Curve EfficiencyCurve(const std::string& label, const policy::PolicyModel& init,
                      const policy::PolicyModel* ref, const corpus::Dataset& data,
                      const std::vector<size_t>& sizes, const trainer::TrainConfig& train,
                      const policy::PolicyModel& opponent,
                      const std::vector<policy::TokenIds>& prompts,
                      const synthworld::WorldConfig& world, const SamplingConfig& sampling,
                      double draw_threshold);

// "experiment,train_size,wins,losses,draws,winrate" plus one row per point.
std::string CurveCsv(const Curve& curve);

// The same table as a JSON array, consumed by the report subcommand.
std::string CurveJson(const Curve& curve);

// Smallest train size whose winrate reaches `target`; -1 when none does.
int64_t FirstSizeReaching(const Curve& curve, const std::string& label, double target);

}  // namespace preflab::evalsuite

#endif  // PREFLAB_EVALSUITE_H_
