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

#include "preflab/trainer.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <utility>

#include "preflab/error.h"
#include "preflab/rng.h"

namespace preflab::trainer {

namespace {

void ValidateConfig(const TrainConfig& cfg) {
  if (cfg.epochs < 0) Fail(ErrorCode::kInvalidArgument, "epochs must be >= 0");
  if (cfg.batch_size < 1) Fail(ErrorCode::kInvalidArgument, "batch_size must be >= 1");
  if (!(cfg.learning_rate > 0.0) || !std::isfinite(cfg.learning_rate)) {
    Fail(ErrorCode::kInvalidArgument, "learning_rate must be positive and finite");
  }
  if (cfg.grad_clip_norm < 0.0) {
    Fail(ErrorCode::kInvalidArgument, "grad_clip_norm must be >= 0");
  }
  if (cfg.optimizer == OptimizerKind::kAdam) {
    if (!(cfg.adam_beta1 >= 0.0 && cfg.adam_beta1 < 1.0) ||
        !(cfg.adam_beta2 >= 0.0 && cfg.adam_beta2 < 1.0) || !(cfg.adam_eps > 0.0)) {
      Fail(ErrorCode::kInvalidArgument, "adam moments must lie in [0,1) and eps must be > 0");
    }
  }
  if (cfg.eval_every < 0) {
    Fail(ErrorCode::kInvalidArgument, "eval_every must be >= 0");
  }
  if (cfg.eval_every > 0 && cfg.checkpoint_dir.empty()) {
    Fail(ErrorCode::kInvalidArgument, "eval_every > 0 requires checkpoint_dir");
  }
}

}  // namespace

const char* OptimizerKindName(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::kSgd: return "sgd";
    case OptimizerKind::kAdam: return "adam";
  }
  Fail(ErrorCode::kInvalidArgument, "unknown optimizer kind");
}

OptimizerKind OptimizerKindFromName(const std::string& name) {
  if (name == "sgd") return OptimizerKind::kSgd;
  if (name == "adam") return OptimizerKind::kAdam;
  Fail(ErrorCode::kInvalidArgument, "unknown optimizer: " + name);
}

TrainResult Train(policy::PolicyModel* model, const policy::PolicyModel* ref,
                  const corpus::Dataset& data, const TrainConfig& cfg) {
  if (model == nullptr) Fail(ErrorCode::kInvalidArgument, "model is null");
  ValidateConfig(cfg);
  if (data.empty()) Fail(ErrorCode::kInvalidArgument, "training data is empty");

  const size_t n = data.size();
  const size_t n_params = model->num_params();
  std::vector<double> grad(n_params, 0.0);
  std::vector<double> adam_m, adam_v;
  if (cfg.optimizer == OptimizerKind::kAdam) {
    adam_m.assign(n_params, 0.0);
    adam_v.assign(n_params, 0.0);
  }

  TrainResult result;
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  corpus::Dataset batch;
  int64_t step = 0;

  for (int32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng shuffle_rng(MixSeed(cfg.seed, static_cast<uint64_t>(epoch)));
    for (size_t i = n; i > 1; --i) {
      size_t j = static_cast<size_t>(shuffle_rng.NextBelow(i));
      std::swap(order[i - 1], order[j]);
    }

    for (size_t start = 0; start < n; start += static_cast<size_t>(cfg.batch_size)) {
      size_t stop = std::min(n, start + static_cast<size_t>(cfg.batch_size));
      batch.clear();
      for (size_t i = start; i < stop; ++i) batch.push_back(data[order[i]]);

      std::fill(grad.begin(), grad.end(), 0.0);
      objectives::LossBreakdown loss =
          objectives::BatchLossGrad(*model, ref, batch, cfg.objective, &grad);
      ++step;
      result.clamp_warnings += loss.clamp_warnings;

      double norm_sq = 0.0;
      for (double g : grad) norm_sq += g * g;
      if (!std::isfinite(norm_sq)) {
        Fail(ErrorCode::kNumeric, "non-finite gradient at step " + std::to_string(step));
      }
      if (cfg.grad_clip_norm > 0.0) {
        double norm = std::sqrt(norm_sq);
        if (norm > cfg.grad_clip_norm) {
          double scale = cfg.grad_clip_norm / norm;
          for (double& g : grad) g *= scale;
        }
      }

      std::vector<double>& params = model->mutable_params();
      if (cfg.optimizer == OptimizerKind::kSgd) {
        for (size_t i = 0; i < n_params; ++i) params[i] -= cfg.learning_rate * grad[i];
      } else {
        double bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(step));
        double bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(step));
        for (size_t i = 0; i < n_params; ++i) {
          adam_m[i] = cfg.adam_beta1 * adam_m[i] + (1.0 - cfg.adam_beta1) * grad[i];
          adam_v[i] = cfg.adam_beta2 * adam_v[i] + (1.0 - cfg.adam_beta2) * grad[i] * grad[i];
          double mhat = adam_m[i] / bc1;
          double vhat = adam_v[i] / bc2;
          params[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.adam_eps);
        }
      }

      result.history.push_back({step, loss.total, loss.preference_term, loss.rationale_nll});

      if (cfg.eval_every > 0 && step % cfg.eval_every == 0) {
        char name[32];
        std::snprintf(name, sizeof(name), "step_%08lld.ckpt", static_cast<long long>(step));
        std::string path = cfg.checkpoint_dir + "/" + name;
        model->Save(path);
        result.checkpoints.push_back(path);
      }
    }
  }

  result.steps = step;
  return result;
}

TrainResult TrainWithFrozenRef(policy::PolicyModel* model, const corpus::Dataset& data,
                               const TrainConfig& cfg) {
  if (model == nullptr) Fail(ErrorCode::kInvalidArgument, "model is null");
  policy::PolicyModel frozen = *model;
  return Train(model, &frozen, data, cfg);
}

policy::PolicyModel RunSft(const policy::PolicyModel& base, const corpus::Dataset& data,
                           const TrainConfig& cfg, TrainResult* report) {
  if (cfg.objective.kind != objectives::ObjectiveKind::kSft) {
    Fail(ErrorCode::kPrecondition, "run_sft requires the sft objective");
  }
  policy::PolicyModel model = base;
  TrainResult r = Train(&model, nullptr, data, cfg);
  if (report != nullptr) *report = std::move(r);
  return model;
}

std::pair<policy::PolicyModel, TrainResult> RunPreference(const policy::PolicyModel& start,
                                                          const policy::PolicyModel* ref,
                                                          const corpus::Dataset& data,
                                                          const TrainConfig& cfg) {
  using objectives::ObjectiveKind;
  ObjectiveKind k = cfg.objective.kind;
  if (k != ObjectiveKind::kDpo && k != ObjectiveKind::kRdpo && k != ObjectiveKind::kOrpo &&
      k != ObjectiveKind::kRorpo) {
    Fail(ErrorCode::kPrecondition, "run_preference requires a preference objective");
  }
  policy::PolicyModel model = start;
  TrainResult r = Train(&model, ref, data, cfg);
  return {std::move(model), std::move(r)};
}

std::string MetricsCsv(const TrainResult& result) {
  std::string out = "step,total,preference_term,rationale_nll\n";
  char row[128];
  for (const StepMetrics& m : result.history) {
    std::snprintf(row, sizeof(row), "%lld,%.9f,%.9f,%.9f\n", static_cast<long long>(m.step),
                  m.total, m.preference_term, m.rationale_nll);
    out += row;
  }
  return out;
}

}  // namespace preflab::trainer
