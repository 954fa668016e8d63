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

#include "preflab/objectives.h"

#include <cmath>

#include "preflab/error.h"

namespace preflab::objectives {

using corpus::Dataset;
using corpus::PreferenceRecord;
using corpus::RationaleKind;
using policy::PolicyModel;
using policy::TokenIds;
using policy::Vocab;

const char* ObjectiveKindName(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::kSft: return "sft";
    case ObjectiveKind::kDpo: return "dpo";
    case ObjectiveKind::kRdpo: return "rdpo";
    case ObjectiveKind::kOrpo: return "orpo";
    case ObjectiveKind::kRorpo: return "rorpo";
  }
  return "dpo";
}

ObjectiveKind ObjectiveKindFromName(const std::string& name) {
  if (name == "sft") return ObjectiveKind::kSft;
  if (name == "dpo") return ObjectiveKind::kDpo;
  if (name == "rdpo") return ObjectiveKind::kRdpo;
  if (name == "orpo") return ObjectiveKind::kOrpo;
  if (name == "rorpo") return ObjectiveKind::kRorpo;
  Fail(ErrorCode::kInvalidArgument, "unknown objective \"" + name + "\"");
}

double Sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  double e = std::exp(x);
  return e / (1.0 + e);
}

double Softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double BtProb(double reward_chosen, double reward_rejected) {
  return Sigmoid(reward_chosen - reward_rejected);
}

double DpoLogit(double lp_w, double lp_w_ref, double lp_l, double lp_l_ref, double beta) {
  return beta * ((lp_w - lp_w_ref) - (lp_l - lp_l_ref));
}

double DpoLossFromLogit(double logit) { return Softplus(-logit); }

TokenIds RationaleContext(const Vocab& vocab, const PreferenceRecord& record) {
  std::string text = "QUERY: " + record.prompt + "\nPREFERRED: " + record.chosen +
                     "\nREJECTED: " + record.rejected + "\nRATIONALE:";
  return vocab.Tokenize(text);
}

double RationaleNll(const PolicyModel& model, const PreferenceRecord& record, bool normalize) {
  if (record.rationale_kind == RationaleKind::kNone) {
    Fail(ErrorCode::kPrecondition, "record has no rationale");
  }
  TokenIds ctx = RationaleContext(model.vocab(), record);
  TokenIds rat = model.vocab().Tokenize(record.rationale);
  if (rat.empty()) {
    Fail(ErrorCode::kPrecondition, "rationale tokenizes to nothing");
  }
  double nll = -model.SequenceLogprob(ctx, rat);
  if (normalize) nll /= static_cast<double>(rat.size());
  return nll;
}

namespace {

constexpr double kMaxOrpoProb = 1.0 - 1e-12;

// Per-record tokenized views plus the scalar chain-rule coefficients on each
// sequence logprob. Gradient accumulation multiplies these by 1/batch_size.
struct RecordWork {
  TokenIds prompt, chosen, rejected, rat_ctx, rationale;
  double lp_w = 0.0, lp_l = 0.0, lp_r = 0.0;
  double coeff_w = 0.0, coeff_l = 0.0, coeff_r = 0.0;
  double pref_loss = 0.0;     // loss excluding the gamma-weighted term
  double rat_nll = 0.0;       // reported rationale nll (per cfg normalization)
  double pref_logit = 0.0;
  size_t clamps = 0;
};

// log(1 - e^x) for x < 0, stable near both ends.
double Log1mExp(double x) {
  if (x > -M_LN2) return std::log(-std::expm1(x));
  return std::log1p(-std::exp(x));
}

void RequireRef(const PolicyModel* ref, const PolicyModel& model) {
  if (ref == nullptr) {
    Fail(ErrorCode::kPrecondition, "objective requires a frozen reference policy");
  }
  if (!(ref->vocab() == model.vocab())) {
    Fail(ErrorCode::kPrecondition, "reference policy vocabulary differs from the trained policy");
  }
}

RecordWork Analyze(const PolicyModel& model, const PolicyModel* ref,
                   const PreferenceRecord& rec, size_t index, const ObjectiveConfig& cfg) {
  const Vocab& vocab = model.vocab();
  RecordWork w;
  try {
    w.prompt = vocab.Tokenize(rec.prompt);
    w.chosen = vocab.Tokenize(rec.chosen);
    w.rejected = vocab.Tokenize(rec.rejected);
  } catch (const Error& e) {
    Fail(e.code(), "record " + std::to_string(index) + ": " + e.what());
  }
  if (w.chosen.empty() || w.rejected.empty()) {
    Fail(ErrorCode::kPrecondition,
         "record " + std::to_string(index) + ": empty response after tokenization");
  }

  bool needs_rationale = cfg.kind == ObjectiveKind::kRdpo || cfg.kind == ObjectiveKind::kRorpo;
  if (needs_rationale) {
    if (rec.rationale_kind == RationaleKind::kNone) {
      Fail(ErrorCode::kPrecondition,
           "record " + std::to_string(index) + ": objective " +
               std::string(ObjectiveKindName(cfg.kind)) + " requires a rationale");
    }
    try {
      w.rat_ctx = RationaleContext(vocab, rec);
      w.rationale = vocab.Tokenize(rec.rationale);
    } catch (const Error& e) {
      Fail(e.code(), "record " + std::to_string(index) + ": " + e.what());
    }
    if (w.rationale.empty()) {
      Fail(ErrorCode::kPrecondition,
           "record " + std::to_string(index) + ": rationale tokenizes to nothing");
    }
  }

  w.lp_w = model.SequenceLogprob(w.prompt, w.chosen);
  if (cfg.kind != ObjectiveKind::kSft) {
    w.lp_l = model.SequenceLogprob(w.prompt, w.rejected);
  }

  switch (cfg.kind) {
    case ObjectiveKind::kSft: {
      w.pref_loss = -w.lp_w;
      w.coeff_w = -1.0;
      break;
    }
    case ObjectiveKind::kDpo:
    case ObjectiveKind::kRdpo: {
      RequireRef(ref, model);
      double lp_w_ref = ref->SequenceLogprob(w.prompt, w.chosen);
      double lp_l_ref = ref->SequenceLogprob(w.prompt, w.rejected);
      w.pref_logit = DpoLogit(w.lp_w, lp_w_ref, w.lp_l, lp_l_ref, cfg.beta_dpo);
      w.pref_loss = DpoLossFromLogit(w.pref_logit);
      double dlogit = -Sigmoid(-w.pref_logit);  // d loss / d logit
      w.coeff_w = dlogit * cfg.beta_dpo;
      w.coeff_l = -dlogit * cfg.beta_dpo;
      break;
    }
    case ObjectiveKind::kOrpo:
    case ObjectiveKind::kRorpo: {
      double len_w = static_cast<double>(w.chosen.size());
      double len_l = static_cast<double>(w.rejected.size());
      double lpb_w = w.lp_w / len_w;
      double lpb_l = w.lp_l / len_l;
      double p_w = std::exp(lpb_w);
      double p_l = std::exp(lpb_l);
      bool clamped_w = p_w > kMaxOrpoProb;
      bool clamped_l = p_l > kMaxOrpoProb;
      if (clamped_w) {
        p_w = kMaxOrpoProb;
        ++w.clamps;
      }
      if (clamped_l) {
        p_l = kMaxOrpoProb;
        ++w.clamps;
      }
      double log_odds_w = clamped_w ? lpb_w - std::log1p(-kMaxOrpoProb) : lpb_w - Log1mExp(lpb_w);
      double log_odds_l = clamped_l ? lpb_l - std::log1p(-kMaxOrpoProb) : lpb_l - Log1mExp(lpb_l);
      w.pref_logit = log_odds_w - log_odds_l;
      double or_loss = Softplus(-w.pref_logit);
      w.pref_loss = -w.lp_w + cfg.lambda_orpo * or_loss;
      double dlogit = -Sigmoid(-w.pref_logit);
      // d log_odds / d lpb = 1/(1-p) off the clamp, 1 on it (the clamped
      // probability is constant, so only the direct lpb term survives).
      double dw = clamped_w ? 1.0 : 1.0 / (1.0 - p_w);
      double dl = clamped_l ? 1.0 : 1.0 / (1.0 - p_l);
      w.coeff_w = -1.0 + cfg.lambda_orpo * dlogit * dw / len_w;
      w.coeff_l = -cfg.lambda_orpo * dlogit * dl / len_l;
      break;
    }
  }

  if (needs_rationale) {
    w.lp_r = model.SequenceLogprob(w.rat_ctx, w.rationale);
    double denom = cfg.normalize_rationale_nll ? static_cast<double>(w.rationale.size()) : 1.0;
    w.rat_nll = -w.lp_r / denom;
    w.coeff_r = -cfg.gamma_rat / denom;
  }
  return w;
}

LossBreakdown Run(const PolicyModel& model, const PolicyModel* ref, const Dataset& batch,
                  const ObjectiveConfig& cfg, std::vector<double>* grad) {
  if (batch.empty()) {
    Fail(ErrorCode::kInvalidArgument, "batch is empty");
  }
  if (grad != nullptr && grad->size() != model.num_params()) {
    Fail(ErrorCode::kInvalidArgument, "gradient buffer has the wrong size");
  }
  bool with_rationale = cfg.kind == ObjectiveKind::kRdpo || cfg.kind == ObjectiveKind::kRorpo;
  double inv_n = 1.0 / static_cast<double>(batch.size());
  LossBreakdown out;
  out.per_record.reserve(batch.size());
  for (size_t i = 0; i < batch.size(); ++i) {
    RecordWork w = Analyze(model, ref, batch[i], i, cfg);
    double record_total = w.pref_loss + (with_rationale ? cfg.gamma_rat * w.rat_nll : 0.0);
    if (!std::isfinite(record_total)) {
      Fail(ErrorCode::kNumeric,
           "record " + std::to_string(i) + ": non-finite loss " + std::to_string(record_total));
    }
    out.total += record_total * inv_n;
    out.preference_term += w.pref_loss * inv_n;
    out.rationale_nll += w.rat_nll * inv_n;
    out.clamp_warnings += w.clamps;
    out.per_record.emplace_back(w.pref_logit, w.lp_r);
    if (grad != nullptr) {
      if (w.coeff_w != 0.0) {
        model.SequenceLogprobGrad(w.prompt, w.chosen, w.coeff_w * inv_n, grad);
      }
      if (w.coeff_l != 0.0) {
        model.SequenceLogprobGrad(w.prompt, w.rejected, w.coeff_l * inv_n, grad);
      }
      if (w.coeff_r != 0.0) {
        model.SequenceLogprobGrad(w.rat_ctx, w.rationale, w.coeff_r * inv_n, grad);
      }
    }
  }
  return out;
}

}  // namespace

LossBreakdown BatchLoss(const PolicyModel& model, const PolicyModel* ref, const Dataset& batch,
                        const ObjectiveConfig& cfg) {
  return Run(model, ref, batch, cfg, nullptr);
}

LossBreakdown BatchLossGrad(const PolicyModel& model, const PolicyModel* ref,
                            const Dataset& batch, const ObjectiveConfig& cfg,
                            std::vector<double>* grad) {
  if (grad == nullptr) {
    Fail(ErrorCode::kInvalidArgument, "gradient buffer is null");
  }
  return Run(model, ref, batch, cfg, grad);
}

}  // namespace preflab::objectives
