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

#ifndef PREFLAB_OBJECTIVES_H_
#define PREFLAB_OBJECTIVES_H_

#include <string>
#include <utility>
#include <vector>

#include "preflab/corpus.h"
#include "preflab/policy.h"

namespace preflab::objectives {

enum class ObjectiveKind { kSft = 0, kDpo, kRdpo, kOrpo, kRorpo };

const char* ObjectiveKindName(ObjectiveKind kind);
ObjectiveKind ObjectiveKindFromName(const std::string& name);

struct ObjectiveConfig {
  ObjectiveKind kind = ObjectiveKind::kDpo;
  double beta_dpo = 0.1;       // preference-logit temperature
  double gamma_rat = 2.0;      // rationale-likelihood weight (rdpo/rorpo)
  double lambda_orpo = 1.0;    // odds-ratio term weight (orpo/rorpo)
  bool normalize_rationale_nll = false;  // divide by rationale token count
};

// Batch-mean losses. preference_term covers everything except the
// gamma-weighted rationale term, so total = preference_term +
// gamma_rat * rationale_nll for rdpo/rorpo and total = preference_term
// otherwise. per_record carries (preference logit, rationale logprob); the
// logit is the dpo logit for dpo/rdpo, the log-odds difference for
// orpo/rorpo, and 0 for sft. clamp_warnings counts ORPO probabilities that
// had to be clamped below 1.
struct LossBreakdown {
  double total = 0.0;
  double preference_term = 0.0;
  double rationale_nll = 0.0;
  size_t clamp_warnings = 0;
  std::vector<std::pair<double, double>> per_record;
};

// Bradley-Terry preference probability sigma(r_chosen - r_rejected).
double BtProb(double reward_chosen, double reward_rejected);

// beta * ((lp_w - lp_w_ref) - (lp_l - lp_l_ref)).
double DpoLogit(double lp_w, double lp_w_ref, double lp_l, double lp_l_ref, double beta);

// -log sigma(logit), evaluated as softplus(-logit) without overflow.
double DpoLossFromLogit(double logit);

double Sigmoid(double x);
double Softplus(double x);

// Tokens of the fixed serialization
//   "QUERY: {prompt}\nPREFERRED: {chosen}\nREJECTED: {rejected}\nRATIONALE:"
// under the model vocabulary.
policy::TokenIds RationaleContext(const policy::Vocab& vocab,
                                  const corpus::PreferenceRecord& record);

// -log pi(rationale tokens | rationale context), optionally divided by the
// rationale token count.
double RationaleNll(const policy::PolicyModel& model, const corpus::PreferenceRecord& record,
                    bool normalize);

// Mean loss over the batch. `ref` is required (and only read) for dpo/rdpo.
LossBreakdown BatchLoss(const policy::PolicyModel& model, const policy::PolicyModel* ref,
                        const corpus::Dataset& batch, const ObjectiveConfig& cfg);

// Mean loss plus exact gradient accumulated into *grad (resized and zeroed
// by the caller contractually; entries are accumulated, not assigned).
LossBreakdown BatchLossGrad(const policy::PolicyModel& model, const policy::PolicyModel* ref,
                            const corpus::Dataset& batch, const ObjectiveConfig& cfg,
                            std::vector<double>* grad);

}  // namespace preflab::objectives

#endif  // PREFLAB_OBJECTIVES_H_
