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

#include "preflab/evalsuite.h"

#include <cstdio>

#include "preflab/error.h"
#include "preflab/rng.h"

#include "json.hpp"

namespace preflab::evalsuite {

double WinrateResult::WinrateExcludingDraws() const {
  size_t decided = wins + losses;
  if (decided == 0) return 0.5;
  return static_cast<double>(wins) / static_cast<double>(decided);
}

WinrateResult Winrate(const policy::PolicyModel& model_a, const policy::PolicyModel& model_b,
                      const std::vector<policy::TokenIds>& prompts,
                      const synthworld::WorldConfig& world, const SamplingConfig& sampling,
                      double draw_threshold) {
  if (!(model_a.vocab() == model_b.vocab())) {
    Fail(ErrorCode::kPrecondition, "winrate requires models with a shared vocabulary");
  }
  if (prompts.empty()) Fail(ErrorCode::kInvalidArgument, "winrate needs at least one prompt");

  WinrateResult r;
  r.n_prompts = prompts.size();
  for (size_t i = 0; i < prompts.size(); ++i) {
    uint64_t prompt_seed = MixSeed(sampling.seed, i);
    policy::TokenIds resp_a =
        model_a.Sample(prompts[i], sampling.max_len, sampling.temperature, prompt_seed);
    policy::TokenIds resp_b =
        model_b.Sample(prompts[i], sampling.max_len, sampling.temperature, prompt_seed);
    synthworld::JudgeVerdict v = synthworld::Judge(world, resp_a, resp_b, draw_threshold);
    switch (v.outcome) {
      case synthworld::Outcome::kWin: ++r.wins; break;
      case synthworld::Outcome::kLose: ++r.losses; break;
      case synthworld::Outcome::kDraw: ++r.draws; break;
    }
  }
  r.winrate = static_cast<double>(r.wins) / static_cast<double>(r.n_prompts);
  return r;
}

double AvgResponseLength(const policy::PolicyModel& model,
                         const std::vector<policy::TokenIds>& prompts,
                         const SamplingConfig& sampling) {
  if (prompts.empty()) Fail(ErrorCode::kInvalidArgument, "no prompts");
  double total = 0.0;
  for (size_t i = 0; i < prompts.size(); ++i) {
    total += static_cast<double>(
        model.Sample(prompts[i], sampling.max_len, sampling.temperature, MixSeed(sampling.seed, i))
            .size());
  }
  return total / static_cast<double>(prompts.size());
}

Curve EfficiencyCurve(const std::string& label, const policy::PolicyModel& init,
                      const policy::PolicyModel* ref, const corpus::Dataset& data,
                      const std::vector<size_t>& sizes, const trainer::TrainConfig& train,
                      const policy::PolicyModel& opponent,
                      const std::vector<policy::TokenIds>& prompts,
                      const synthworld::WorldConfig& world, const SamplingConfig& sampling,
                      double draw_threshold) {
  if (sizes.empty()) Fail(ErrorCode::kInvalidArgument, "efficiency curve needs sizes");
  for (size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] == 0 || sizes[i] > data.size()) {
      Fail(ErrorCode::kInvalidArgument, "curve size out of range: " + std::to_string(sizes[i]));
    }
    if (i > 0 && sizes[i] <= sizes[i - 1]) {
      Fail(ErrorCode::kInvalidArgument, "curve sizes must be strictly increasing");
    }
  }

  Curve curve;
  for (size_t size : sizes) {
    corpus::Dataset subset(data.begin(), data.begin() + static_cast<ptrdiff_t>(size));
    auto [model, report] = trainer::RunPreference(init, ref, subset, train);
    (void)report;
    CurvePoint pt;
    pt.experiment = label;
    pt.train_size = size;
    pt.result = Winrate(model, opponent, prompts, world, sampling, draw_threshold);
    curve.push_back(std::move(pt));
  }
  return curve;
}

std::string CurveCsv(const Curve& curve) {
  std::string out = "experiment,train_size,wins,losses,draws,winrate\n";
  char row[160];
  for (const CurvePoint& pt : curve) {
    std::snprintf(row, sizeof(row), "%s,%zu,%zu,%zu,%zu,%.9f\n", pt.experiment.c_str(),
                  pt.train_size, pt.result.wins, pt.result.losses, pt.result.draws,
                  pt.result.winrate);
    out += row;
  }
  return out;
}

std::string CurveJson(const Curve& curve) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const CurvePoint& pt : curve) {
    nlohmann::ordered_json row;
    row["experiment"] = pt.experiment;
    row["train_size"] = pt.train_size;
    row["wins"] = pt.result.wins;
    row["losses"] = pt.result.losses;
    row["draws"] = pt.result.draws;
    row["winrate"] = pt.result.winrate;
    arr.push_back(std::move(row));
  }
  return arr.dump(2) + "\n";
}

int64_t FirstSizeReaching(const Curve& curve, const std::string& label, double target) {
  for (const CurvePoint& pt : curve) {
    if (pt.experiment == label && pt.result.winrate >= target) {
      return static_cast<int64_t>(pt.train_size);
    }
  }
  return -1;
}

}  // namespace preflab::evalsuite
