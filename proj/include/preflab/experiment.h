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

#ifndef PREFLAB_EXPERIMENT_H_
#define PREFLAB_EXPERIMENT_H_

#include <cstdint>
#include <string>
#include <vector>

#include "preflab/corpus.h"
#include "preflab/evalsuite.h"
#include "preflab/objectives.h"
#include "preflab/policy.h"
#include "preflab/rationale_client.h"
#include "preflab/synthworld.h"
#include "preflab/trainer.h"

namespace preflab::experiment {

inline constexpr const char* kVersion = "0.1.0";

enum class ModelInit { kRandom = 0, kUniform };
enum class ModelVocabKind { kWorld = 0, kAscii };

struct ModelConfig {
  policy::PolicyArch arch = policy::PolicyArch::Decoder(16, 2, 1, 64);
  ModelInit init = ModelInit::kRandom;
  uint64_t init_seed = 1;
  ModelVocabKind vocab = ModelVocabKind::kWorld;
};

struct EvalConfig {
  size_t n_prompts = 200;
  int32_t max_len = 8;
  double temperature = 1.0;
  double draw_threshold = 0.0;
  uint64_t prompt_seed = 99;
  uint64_t sample_seed = 7;
};

struct PathsConfig {
  std::string data = "data";
  std::string checkpoints = "checkpoints";
  std::string reports = "reports";
};

// Everything a run needs, loadable from one JSON file. Dotted-path overrides
// ("train.learning_rate=0.1") are applied to the JSON before validation, so
// command-line flags and file values go through the same checks. The client
// api key is intentionally absent from the schema; it only ever comes from
// the environment.
struct ExperimentConfig {
  uint64_t seed_root = 1;
  synthworld::WorldConfig world;
  ModelConfig model;
  trainer::TrainConfig train;   // preference stage
  trainer::TrainConfig sft;     // supervised stage (objective forced to sft)
  size_t sft_records = 256;     // world records consumed by the SFT stage
  size_t pool_records = 1600;   // preference-training pool drawn after those
  EvalConfig eval;
  client::ApiConfig api;
  PathsConfig paths;
};

ExperimentConfig ParseConfig(const std::string& json_text,
                             const std::vector<std::string>& overrides = {});
ExperimentConfig LoadConfigFile(const std::string& path,
                                const std::vector<std::string>& overrides = {});

// The fully resolved config as canonical JSON (fixed key order).
std::string ConfigJson(const ExperimentConfig& cfg);

// Run provenance: version, the invoking command line, the resolved config.
std::string MetadataJson(const ExperimentConfig& cfg, const std::string& command);

// Model vocabulary per the model section (world symbols or printable ASCII).
policy::Vocab ModelVocab(const ExperimentConfig& cfg);

// Fresh model per the model section.
policy::PolicyModel InitModel(const ExperimentConfig& cfg);

struct TrainRun {
  policy::PolicyModel model;
  trainer::TrainResult report;
};

// One training run under the config. Null `init` builds a fresh model; null
// `ref` freezes a copy of the start model when the objective needs one.
TrainRun TrainFromConfig(const ExperimentConfig& cfg, objectives::ObjectiveKind kind,
                         const corpus::Dataset& data, const policy::PolicyModel* init,
                         const policy::PolicyModel* ref);

// Shared pipeline: world data, SFT reference, held-out prompts, then one
// winrate-vs-SFT curve per objective over the given train sizes. All
// randomness derives from `seed`, so reruns are byte-identical.
evalsuite::Curve RunEfficiency(const ExperimentConfig& cfg,
                               const std::vector<objectives::ObjectiveKind>& kinds,
                               const std::vector<size_t>& sizes, uint64_t seed);

// Trains rationale-aware models on original vs corrupted rationales and
// plays the original against each corrupted model. Modes: "none",
// "permute", "opposite".
evalsuite::Curve RunCorruption(const ExperimentConfig& cfg, const std::vector<std::string>& modes,
                               uint64_t seed);

// Head-to-head of the rationale objective against its rationale-free
// counterpart on the configured world (used with an uninformative channel).
evalsuite::Curve RunHeadToHead(const ExperimentConfig& cfg, uint64_t seed);

}  // namespace preflab::experiment

#endif  // PREFLAB_EXPERIMENT_H_
