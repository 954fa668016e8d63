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

#include "preflab/preflab.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "preflab/corpus.h"
#include "preflab/error.h"
#include "preflab/evalsuite.h"
#include "preflab/experiment.h"
#include "preflab/objectives.h"
#include "preflab/policy.h"
#include "preflab/rationale_client.h"
#include "preflab/synthworld.h"
#include "preflab/theory.h"
#include "preflab/trainer.h"

struct preflab_dataset {
  preflab::corpus::Dataset ds;
};

struct preflab_model {
  preflab::policy::PolicyModel model;
};

namespace {

using preflab::Error;
using preflab::ErrorCode;

thread_local int g_last_code = PREFLAB_OK;
thread_local std::string g_last_message;

void SetError(int code, const std::string& message) {
  g_last_code = code;
  g_last_message = message;
}

// Runs fn, translating exceptions into status codes + thread-local details.
template <typename Fn>
int Wrap(Fn&& fn) noexcept {
  try {
    fn();
    SetError(PREFLAB_OK, "");
    return PREFLAB_OK;
  } catch (const Error& e) {
    SetError(static_cast<int>(e.code()), e.what());
  } catch (const std::exception& e) {
    SetError(PREFLAB_ERR_INTERNAL, e.what());
  } catch (...) {
    SetError(PREFLAB_ERR_INTERNAL, "unknown failure");
  }
  return g_last_code;
}

void RequireArg(const void* p, const char* name) {
  if (p == nullptr) {
    preflab::Fail(ErrorCode::kInvalidArgument, std::string(name) + " must not be NULL");
  }
}

char* DupString(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) preflab::Fail(ErrorCode::kIo, "allocation failed");
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

void WriteFile(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  out.close();
  if (!out) preflab::Fail(ErrorCode::kIo, "cannot write " + path);
}

preflab::experiment::ExperimentConfig ConfigFromJson(const char* config_json) {
  RequireArg(config_json, "config_json");
  return preflab::experiment::ParseConfig(config_json);
}

preflab::client::ApiConfig ApiFromConfig(const preflab::experiment::ExperimentConfig& cfg) {
  preflab::client::ApiConfig api = cfg.api;
  api.api_key = preflab::client::ApiKeyFromEnv();
  std::string endpoint = preflab::client::EndpointFromEnv();
  if (!endpoint.empty()) api.endpoint = endpoint;
  return api;
}

std::vector<std::string> SplitCommaList(const char* text, const char* what) {
  RequireArg(text, what);
  std::vector<std::string> parts;
  std::string current;
  for (const char* p = text; *p != '\0'; ++p) {
    if (*p == ',') {
      parts.push_back(current);
      current.clear();
    } else {
      current += *p;
    }
  }
  parts.push_back(current);
  for (const std::string& part : parts) {
    if (part.empty()) {
      preflab::Fail(ErrorCode::kInvalidArgument, std::string(what) + " has an empty entry");
    }
  }
  return parts;
}

std::vector<size_t> ParseSizes(const char* text) {
  std::vector<size_t> sizes;
  for (const std::string& part : SplitCommaList(text, "sizes")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(part.c_str(), &end, 10);
    if (end == part.c_str() || *end != '\0' || v == 0) {
      preflab::Fail(ErrorCode::kInvalidArgument, "bad train size: " + part);
    }
    sizes.push_back(static_cast<size_t>(v));
  }
  return sizes;
}

std::vector<std::string> CollectOverrides(const char* const* overrides, int n_overrides) {
  std::vector<std::string> out;
  if (n_overrides > 0) RequireArg(overrides, "overrides");
  for (int i = 0; i < n_overrides; ++i) {
    RequireArg(overrides[i], "override entry");
    out.emplace_back(overrides[i]);
  }
  return out;
}

}  // namespace

extern "C" {

const char* preflab_version(void) { return preflab::experiment::kVersion; }

int preflab_last_error_code(void) { return g_last_code; }

const char* preflab_last_error_message(void) { return g_last_message.c_str(); }

void preflab_string_free(char* s) { std::free(s); }

int preflab_config_resolve(const char* config_json, const char* const* overrides, int n_overrides,
                           char** out_json) {
  return Wrap([&] {
    RequireArg(config_json, "config_json");
    RequireArg(out_json, "out_json");
    preflab::experiment::ExperimentConfig cfg = preflab::experiment::ParseConfig(
        config_json, CollectOverrides(overrides, n_overrides));
    *out_json = DupString(preflab::experiment::ConfigJson(cfg));
  });
}

int preflab_metadata_json(const char* config_json, const char* const* overrides, int n_overrides,
                          const char* command, char** out_json) {
  return Wrap([&] {
    RequireArg(config_json, "config_json");
    RequireArg(command, "command");
    RequireArg(out_json, "out_json");
    preflab::experiment::ExperimentConfig cfg = preflab::experiment::ParseConfig(
        config_json, CollectOverrides(overrides, n_overrides));
    *out_json = DupString(preflab::experiment::MetadataJson(cfg, command));
  });
}

preflab_dataset* preflab_dataset_load(const char* jsonl_path) {
  preflab_dataset* out = nullptr;
  Wrap([&] {
    RequireArg(jsonl_path, "jsonl_path");
    out = new preflab_dataset{preflab::corpus::LoadJsonl(jsonl_path)};
  });
  return out;
}

int preflab_dataset_save(const preflab_dataset* ds, const char* jsonl_path) {
  return Wrap([&] {
    RequireArg(ds, "ds");
    RequireArg(jsonl_path, "jsonl_path");
    preflab::corpus::SaveJsonl(ds->ds, jsonl_path);
  });
}

int64_t preflab_dataset_size(const preflab_dataset* ds) {
  int64_t n = -1;
  Wrap([&] {
    RequireArg(ds, "ds");
    n = static_cast<int64_t>(ds->ds.size());
  });
  return n;
}

void preflab_dataset_free(preflab_dataset* ds) { delete ds; }

preflab_model* preflab_model_load(const char* checkpoint_path) {
  preflab_model* out = nullptr;
  Wrap([&] {
    RequireArg(checkpoint_path, "checkpoint_path");
    out = new preflab_model{preflab::policy::PolicyModel::Load(checkpoint_path)};
  });
  return out;
}

int preflab_model_save(const preflab_model* model, const char* checkpoint_path) {
  return Wrap([&] {
    RequireArg(model, "model");
    RequireArg(checkpoint_path, "checkpoint_path");
    model->model.Save(checkpoint_path);
  });
}

int64_t preflab_model_num_params(const preflab_model* model) {
  int64_t n = -1;
  Wrap([&] {
    RequireArg(model, "model");
    n = static_cast<int64_t>(model->model.num_params());
  });
  return n;
}

void preflab_model_free(preflab_model* model) { delete model; }

int preflab_model_logprob(const preflab_model* model, const char* context, const char* response,
                          double* out_logprob) {
  return Wrap([&] {
    RequireArg(model, "model");
    RequireArg(context, "context");
    RequireArg(response, "response");
    RequireArg(out_logprob, "out_logprob");
    const preflab::policy::Vocab& vocab = model->model.vocab();
    *out_logprob =
        model->model.SequenceLogprob(vocab.Tokenize(context), vocab.Tokenize(response));
  });
}

int preflab_model_sample(const preflab_model* model, const char* context, int32_t max_len,
                         double temperature, uint64_t seed, char** out_text) {
  return Wrap([&] {
    RequireArg(model, "model");
    RequireArg(context, "context");
    RequireArg(out_text, "out_text");
    const preflab::policy::Vocab& vocab = model->model.vocab();
    preflab::policy::TokenIds ids =
        model->model.Sample(vocab.Tokenize(context), max_len, temperature, seed);
    *out_text = DupString(vocab.Detokenize(ids));
  });
}

int preflab_gen_data(const char* config_json, int64_t n, const char* out_jsonl) {
  return Wrap([&] {
    RequireArg(out_jsonl, "out_jsonl");
    preflab::experiment::ExperimentConfig cfg = ConfigFromJson(config_json);
    if (n < 1) preflab::Fail(ErrorCode::kInvalidArgument, "n must be >= 1");
    preflab::corpus::Dataset ds =
        preflab::synthworld::MakeDataset(cfg.world, static_cast<size_t>(n));
    preflab::corpus::SaveJsonl(ds, out_jsonl);
  });
}

int preflab_gen_rationales(const char* config_json, const char* in_jsonl, const char* kind,
                           int overwrite, const char* out_jsonl, int64_t* out_failures) {
  return Wrap([&] {
    RequireArg(in_jsonl, "in_jsonl");
    RequireArg(kind, "kind");
    RequireArg(out_jsonl, "out_jsonl");
    preflab::experiment::ExperimentConfig cfg = ConfigFromJson(config_json);
    preflab::corpus::Dataset ds = preflab::corpus::LoadJsonl(in_jsonl);
    preflab::client::ClientStats stats;
    preflab::corpus::Dataset out = preflab::client::GenerateRationales(
        ApiFromConfig(cfg), ds, preflab::corpus::RationaleKindFromName(kind), overwrite != 0,
        &stats);
    preflab::corpus::SaveJsonl(out, out_jsonl);
    if (out_failures != nullptr) *out_failures = static_cast<int64_t>(stats.failures);
  });
}

int preflab_corrupt(const char* in_jsonl, const char* mode, uint64_t seed,
                    const char* out_jsonl) {
  return Wrap([&] {
    RequireArg(in_jsonl, "in_jsonl");
    RequireArg(mode, "mode");
    RequireArg(out_jsonl, "out_jsonl");
    preflab::corpus::Dataset ds = preflab::corpus::LoadJsonl(in_jsonl);
    std::string m = mode;
    preflab::corpus::Dataset out;
    if (m == "permute") {
      out = preflab::corpus::PermuteRationales(ds, seed);
    } else if (m == "opposite") {
      out = preflab::corpus::NegateRationales(ds);
    } else {
      preflab::Fail(ErrorCode::kInvalidArgument, "mode must be permute|opposite, got " + m);
    }
    preflab::corpus::SaveJsonl(out, out_jsonl);
  });
}

int preflab_train(const char* config_json, const char* objective, const char* data_jsonl,
                  const char* init_ckpt, const char* ref_ckpt, const char* out_ckpt,
                  const char* metrics_csv) {
  return Wrap([&] {
    RequireArg(objective, "objective");
    RequireArg(data_jsonl, "data_jsonl");
    RequireArg(out_ckpt, "out_ckpt");
    preflab::experiment::ExperimentConfig cfg = ConfigFromJson(config_json);
    preflab::objectives::ObjectiveKind kind =
        preflab::objectives::ObjectiveKindFromName(objective);
    preflab::corpus::Dataset data = preflab::corpus::LoadJsonl(data_jsonl);

    preflab::policy::PolicyModel init_model;
    const preflab::policy::PolicyModel* init = nullptr;
    if (init_ckpt != nullptr) {
      init_model = preflab::policy::PolicyModel::Load(init_ckpt);
      init = &init_model;
    }
    preflab::policy::PolicyModel ref_model;
    const preflab::policy::PolicyModel* ref = nullptr;
    if (ref_ckpt != nullptr) {
      ref_model = preflab::policy::PolicyModel::Load(ref_ckpt);
      ref = &ref_model;
    }

    preflab::experiment::TrainRun run =
        preflab::experiment::TrainFromConfig(cfg, kind, data, init, ref);
    run.model.Save(out_ckpt);
    if (metrics_csv != nullptr) {
      WriteFile(metrics_csv, preflab::trainer::MetricsCsv(run.report));
    }
  });
}

int preflab_eval_winrate(const char* config_json, const char* ckpt_a, const char* ckpt_b,
                         char** out_csv) {
  return Wrap([&] {
    RequireArg(ckpt_a, "ckpt_a");
    RequireArg(ckpt_b, "ckpt_b");
    RequireArg(out_csv, "out_csv");
    preflab::experiment::ExperimentConfig cfg = ConfigFromJson(config_json);
    preflab::policy::PolicyModel a = preflab::policy::PolicyModel::Load(ckpt_a);
    preflab::policy::PolicyModel b = preflab::policy::PolicyModel::Load(ckpt_b);
    std::vector<preflab::policy::TokenIds> prompts =
        preflab::synthworld::MakePrompts(cfg.world, cfg.eval.n_prompts, cfg.eval.prompt_seed);
    preflab::evalsuite::SamplingConfig sampling;
    sampling.max_len = cfg.eval.max_len;
    sampling.temperature = cfg.eval.temperature;
    sampling.seed = cfg.eval.sample_seed;
    preflab::evalsuite::CurvePoint pt;
    pt.experiment = "winrate";
    pt.train_size = 0;
    pt.result = preflab::evalsuite::Winrate(a, b, prompts, cfg.world, sampling,
                                            cfg.eval.draw_threshold);
    *out_csv = DupString(preflab::evalsuite::CurveCsv({pt}));
  });
}

int preflab_eval_curve(const char* config_json, const char* objectives, const char* sizes,
                       uint64_t seed, char** out_csv, char** out_json) {
  return Wrap([&] {
    RequireArg(out_csv, "out_csv");
    preflab::experiment::ExperimentConfig cfg = ConfigFromJson(config_json);
    std::vector<preflab::objectives::ObjectiveKind> kinds;
    for (const std::string& name : SplitCommaList(objectives, "objectives")) {
      kinds.push_back(preflab::objectives::ObjectiveKindFromName(name));
    }
    preflab::evalsuite::Curve curve =
        preflab::experiment::RunEfficiency(cfg, kinds, ParseSizes(sizes), seed);
    *out_csv = DupString(preflab::evalsuite::CurveCsv(curve));
    if (out_json != nullptr) *out_json = DupString(preflab::evalsuite::CurveJson(curve));
  });
}

int preflab_eval_corruption(const char* config_json, const char* modes, uint64_t seed,
                            char** out_csv, char** out_json) {
  return Wrap([&] {
    RequireArg(out_csv, "out_csv");
    preflab::experiment::ExperimentConfig cfg = ConfigFromJson(config_json);
    preflab::evalsuite::Curve curve =
        preflab::experiment::RunCorruption(cfg, SplitCommaList(modes, "modes"), seed);
    *out_csv = DupString(preflab::evalsuite::CurveCsv(curve));
    if (out_json != nullptr) *out_json = DupString(preflab::evalsuite::CurveJson(curve));
  });
}

int preflab_eval_headtohead(const char* config_json, uint64_t seed, char** out_csv,
                            char** out_json) {
  return Wrap([&] {
    RequireArg(out_csv, "out_csv");
    preflab::experiment::ExperimentConfig cfg = ConfigFromJson(config_json);
    preflab::evalsuite::Curve curve = preflab::experiment::RunHeadToHead(cfg, seed);
    *out_csv = DupString(preflab::evalsuite::CurveCsv(curve));
    if (out_json != nullptr) *out_json = DupString(preflab::evalsuite::CurveJson(curve));
  });
}

int preflab_mutual_info(double p, double eps, double alpha, double beta, double* out) {
  return Wrap([&] {
    RequireArg(out, "out");
    *out = preflab::theory::CondMutualInfo({p, eps}, {alpha, beta});
  });
}

int preflab_mutual_info_mc(double p, double eps, double alpha, double beta, int64_t n_samples,
                           uint64_t seed, double* out_estimate, double* out_std_err) {
  return Wrap([&] {
    RequireArg(out_estimate, "out_estimate");
    if (n_samples < 1) preflab::Fail(ErrorCode::kInvalidArgument, "n_samples must be >= 1");
    preflab::theory::McEstimate est = preflab::theory::McMutualInfo(
        {p, eps}, {alpha, beta}, static_cast<uint64_t>(n_samples), seed);
    *out_estimate = est.estimate;
    if (out_std_err != nullptr) *out_std_err = est.std_err;
  });
}

int preflab_mi_sweep_csv(double p, double eps, int32_t n_points, char** out_csv) {
  return Wrap([&] {
    RequireArg(out_csv, "out_csv");
    if (n_points < 2) preflab::Fail(ErrorCode::kInvalidArgument, "n_points must be >= 2");
    std::vector<double> gammas(static_cast<size_t>(n_points));
    for (int32_t i = 0; i < n_points; ++i) {
      gammas[static_cast<size_t>(i)] =
          0.5 * static_cast<double>(i) / static_cast<double>(n_points - 1);
    }
    *out_csv = DupString(
        preflab::theory::SweepToCsv(preflab::theory::RegimeSweep({p, eps}, gammas)));
  });
}

int preflab_gen_bounds(double sigma, double n, double i_theta_z, double delta, double eta1,
                       double i_theta_s_z, double* out_with_rationale,
                       double* out_without_rationale) {
  return Wrap([&] {
    RequireArg(out_with_rationale, "out_with_rationale");
    RequireArg(out_without_rationale, "out_without_rationale");
    preflab::theory::BoundInputs b;
    b.sigma = sigma;
    b.n = n;
    b.i_theta_z = i_theta_z;
    b.i_theta_s_given_z = i_theta_s_z;
    b.delta_cap = delta;
    b.eta1 = eta1;
    *out_with_rationale = preflab::theory::GenBoundWithRationale(b);
    *out_without_rationale = preflab::theory::GenBoundWithoutRationale(b);
  });
}

int preflab_bounds_csv(double sigma, double i_theta_z, double delta, double eta1,
                       double i_theta_s_z, const double* sample_counts, int32_t n_counts,
                       char** out_csv) {
  return Wrap([&] {
    RequireArg(out_csv, "out_csv");
    RequireArg(sample_counts, "sample_counts");
    if (n_counts < 1) preflab::Fail(ErrorCode::kInvalidArgument, "n_counts must be >= 1");
    preflab::theory::BoundInputs b;
    b.sigma = sigma;
    b.i_theta_z = i_theta_z;
    b.i_theta_s_given_z = i_theta_s_z;
    b.delta_cap = delta;
    b.eta1 = eta1;
    std::vector<double> ns(sample_counts, sample_counts + n_counts);
    *out_csv = DupString(preflab::theory::BoundsCsv(b, ns));
  });
}

int preflab_fano_lower_bound(double h_z, double i_r_theta, double i_z_theta_given_r,
                             double err_tol, uint64_t n_outcomes, double* out, double* out_raw) {
  return Wrap([&] {
    preflab::theory::BoundValue v =
        preflab::theory::FanoLowerBound(h_z, i_r_theta, i_z_theta_given_r, err_tol, n_outcomes);
    if (out != nullptr) *out = v.value;
    if (out_raw != nullptr) *out_raw = v.raw;
  });
}

int preflab_err_upper_bound(double h_z, double i_r_theta, double h_r_given_z, double* out,
                            double* out_raw) {
  return Wrap([&] {
    preflab::theory::BoundValue v =
        preflab::theory::ErrUpperBound(h_z, i_r_theta, h_r_given_z);
    if (out != nullptr) *out = v.value;
    if (out_raw != nullptr) *out_raw = v.raw;
  });
}

int preflab_judge_pair(const char* config_json, const char* history, const char* response1,
                       const char* response2, int32_t n_queries, int shuffle, uint64_t seed,
                       int32_t* out_votes1, int32_t* out_votes2, int32_t* out_abstains) {
  return Wrap([&] {
    RequireArg(history, "history");
    RequireArg(response1, "response1");
    RequireArg(response2, "response2");
    preflab::experiment::ExperimentConfig cfg = ConfigFromJson(config_json);
    preflab::client::JudgeAggregate agg = preflab::client::JudgePair(
        ApiFromConfig(cfg), history, response1, response2, n_queries, shuffle != 0, seed);
    if (out_votes1 != nullptr) *out_votes1 = agg.votes_response1;
    if (out_votes2 != nullptr) *out_votes2 = agg.votes_response2;
    if (out_abstains != nullptr) *out_abstains = agg.abstains;
  });
}

}  // extern "C"
