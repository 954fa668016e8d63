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

#ifndef PREFLAB_TRAINER_H_
#define PREFLAB_TRAINER_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "preflab/corpus.h"
#include "preflab/objectives.h"
#include "preflab/policy.h"

namespace preflab::trainer {

enum class OptimizerKind { kSgd = 0, kAdam };

const char* OptimizerKindName(OptimizerKind kind);
OptimizerKind OptimizerKindFromName(const std::string& name);

struct TrainConfig {
  objectives::ObjectiveConfig objective;
  int32_t epochs = 1;
  int32_t batch_size = 8;
  double learning_rate = 0.05;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double grad_clip_norm = 0.0;       // global L2 clip; 0 disables
  uint64_t seed = 1;
  int32_t eval_every = 0;            // optimizer steps between snapshots; 0 = none
  std::string checkpoint_dir;
};

struct StepMetrics {
  int64_t step = 0;  // 1-based optimizer step
  double total = 0.0;
  double preference_term = 0.0;
  double rationale_nll = 0.0;
};

struct TrainResult {
  std::vector<StepMetrics> history;  // one row per optimizer step
  int64_t steps = 0;
  size_t clamp_warnings = 0;
  std::vector<std::string> checkpoints;
};

// Minimizes the batch-mean objective with SGD or Adam. `ref` is required
// (and only read) for dpo/rdpo. Example order reshuffles each epoch from
// (seed, epoch) alone; with fixed inputs the parameter trajectory is
// bit-reproducible. Non-finite losses or gradients abort with a numeric
// error naming the step.
TrainResult Train(policy::PolicyModel* model, const policy::PolicyModel* ref,
                  const corpus::Dataset& data, const TrainConfig& cfg);

// Copies *model, freezes the copy as the reference, then trains in place.
TrainResult TrainWithFrozenRef(policy::PolicyModel* model, const corpus::Dataset& data,
                               const TrainConfig& cfg);

// Supervised fine-tuning pass over the chosen responses. Returns the trained
// model; `base` is left untouched. Requires cfg.objective.kind == sft.
policy::PolicyModel RunSft(const policy::PolicyModel& base, const corpus::Dataset& data,
                           const TrainConfig& cfg, TrainResult* report = nullptr);

// Preference-tuning pass (dpo/rdpo/orpo/rorpo). `ref` is required for
// dpo/rdpo and may be null for the reference-free objectives.
std::pair<policy::PolicyModel, TrainResult> RunPreference(const policy::PolicyModel& start,
                                                          const policy::PolicyModel* ref,
                                                          const corpus::Dataset& data,
                                                          const TrainConfig& cfg);

// "step,total,preference_term,rationale_nll" plus one row per step.
std::string MetricsCsv(const TrainResult& result);

}  // namespace preflab::trainer

#endif  // PREFLAB_TRAINER_H_
