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

#include "preflab/experiment.h"

#include <fstream>
#include <set>
#include <sstream>

#include "preflab/error.h"
#include "preflab/rng.h"

#include "json.hpp"

namespace preflab::experiment {

namespace {

using nlohmann::ordered_json;

// Seed streams: every pipeline stage hashes (run seed, fixed stream id) so
// stages stay decoupled and reruns are bit-identical.
constexpr uint64_t kStreamWorld = 101;
constexpr uint64_t kStreamInit = 102;
constexpr uint64_t kStreamSft = 103;
constexpr uint64_t kStreamPrompts = 104;
constexpr uint64_t kStreamSampling = 105;
constexpr uint64_t kStreamTrain = 106;
constexpr uint64_t kStreamPermute = 107;

void CheckKeys(const ordered_json& j, const std::string& section,
               const std::set<std::string>& allowed) {
  for (const auto& item : j.items()) {
    if (allowed.count(item.key()) == 0) {
      Fail(ErrorCode::kSchema, "unknown config key " +
                                   (section.empty() ? item.key() : section + "." + item.key()));
    }
  }
}

const ordered_json* Child(const ordered_json& j, const std::string& key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

double GetNum(const ordered_json& j, const std::string& section, const std::string& key,
              double def) {
  const ordered_json* c = Child(j, key);
  if (c == nullptr) return def;
  if (!c->is_number()) Fail(ErrorCode::kSchema, "config " + section + "." + key + " must be a number");
  return c->get<double>();
}

int64_t GetInt(const ordered_json& j, const std::string& section, const std::string& key,
               int64_t def) {
  const ordered_json* c = Child(j, key);
  if (c == nullptr) return def;
  if (!c->is_number_integer() && !c->is_number_unsigned()) {
    Fail(ErrorCode::kSchema, "config " + section + "." + key + " must be an integer");
  }
  return c->get<int64_t>();
}

uint64_t GetSeed(const ordered_json& j, const std::string& section, const std::string& key,
                 uint64_t def) {
  const ordered_json* c = Child(j, key);
  if (c == nullptr) return def;
  if (!c->is_number_integer() && !c->is_number_unsigned()) {
    Fail(ErrorCode::kSchema, "config " + section + "." + key + " must be an integer");
  }
  return c->get<uint64_t>();
}

bool GetBool(const ordered_json& j, const std::string& section, const std::string& key,
             bool def) {
  const ordered_json* c = Child(j, key);
  if (c == nullptr) return def;
  if (!c->is_boolean()) Fail(ErrorCode::kSchema, "config " + section + "." + key + " must be a bool");
  return c->get<bool>();
}

std::string GetStr(const ordered_json& j, const std::string& section, const std::string& key,
                   const std::string& def) {
  const ordered_json* c = Child(j, key);
  if (c == nullptr) return def;
  if (!c->is_string()) Fail(ErrorCode::kSchema, "config " + section + "." + key + " must be a string");
  return c->get<std::string>();
}

synthworld::WorldConfig ReadWorld(const ordered_json& j) {
  CheckKeys(j, "world",
            {"vocab_size", "quality_tokens", "prompt_len", "response_len", "reward_quality",
             "reward_length", "epsilon_bias", "channel_alpha", "channel_beta", "rationale_style",
             "seed"});
  synthworld::WorldConfig w;
  w.vocab_size = static_cast<int32_t>(GetInt(j, "world", "vocab_size", w.vocab_size));
  w.quality_tokens = static_cast<int32_t>(GetInt(j, "world", "quality_tokens", w.quality_tokens));
  w.prompt_len = static_cast<int32_t>(GetInt(j, "world", "prompt_len", w.prompt_len));
  w.response_len = static_cast<int32_t>(GetInt(j, "world", "response_len", w.response_len));
  w.reward_quality = GetNum(j, "world", "reward_quality", w.reward_quality);
  w.reward_length = GetNum(j, "world", "reward_length", w.reward_length);
  w.epsilon_bias = GetNum(j, "world", "epsilon_bias", w.epsilon_bias);
  w.channel_alpha = GetNum(j, "world", "channel_alpha", w.channel_alpha);
  w.channel_beta = GetNum(j, "world", "channel_beta", w.channel_beta);
  std::string style = GetStr(j, "world", "rationale_style", "feature_named");
  if (style == "feature_named") {
    w.style = synthworld::RationaleStyle::kFeatureNamed;
  } else if (style == "polarity_only") {
    w.style = synthworld::RationaleStyle::kPolarityOnly;
  } else {
    Fail(ErrorCode::kSchema, "config world.rationale_style must be feature_named|polarity_only");
  }
  w.seed = GetSeed(j, "world", "seed", w.seed);
  return w;
}

ModelConfig ReadModel(const ordered_json& j) {
  CheckKeys(j, "model",
            {"arch", "order", "dim", "heads", "layers", "context_len", "init", "init_seed",
             "vocab"});
  ModelConfig m;
  std::string arch = GetStr(j, "model", "arch", "decoder");
  if (arch == "ngram") {
    m.arch = policy::PolicyArch::Ngram(static_cast<int32_t>(GetInt(j, "model", "order", 2)));
  } else if (arch == "decoder") {
    m.arch = policy::PolicyArch::Decoder(
        static_cast<int32_t>(GetInt(j, "model", "dim", 16)),
        static_cast<int32_t>(GetInt(j, "model", "heads", 2)),
        static_cast<int32_t>(GetInt(j, "model", "layers", 1)),
        static_cast<int32_t>(GetInt(j, "model", "context_len", 64)));
  } else {
    Fail(ErrorCode::kSchema, "config model.arch must be ngram|decoder");
  }
  std::string init = GetStr(j, "model", "init", "random");
  if (init == "random") {
    m.init = ModelInit::kRandom;
  } else if (init == "uniform") {
    m.init = ModelInit::kUniform;
  } else {
    Fail(ErrorCode::kSchema, "config model.init must be random|uniform");
  }
  m.init_seed = GetSeed(j, "model", "init_seed", m.init_seed);
  std::string vocab = GetStr(j, "model", "vocab", "world");
  if (vocab == "world") {
    m.vocab = ModelVocabKind::kWorld;
  } else if (vocab == "ascii") {
    m.vocab = ModelVocabKind::kAscii;
  } else {
    Fail(ErrorCode::kSchema, "config model.vocab must be world|ascii");
  }
  return m;
}

trainer::TrainConfig ReadTrain(const ordered_json& j, const std::string& section,
                               bool force_sft) {
  CheckKeys(j, section,
            {"objective", "beta_dpo", "gamma_rat", "lambda_orpo", "normalize_rationale_nll",
             "epochs", "batch_size", "learning_rate", "optimizer", "adam_beta1", "adam_beta2",
             "adam_eps", "grad_clip_norm", "seed", "eval_every", "checkpoint_dir"});
  trainer::TrainConfig t;
  std::string objective = GetStr(j, section, "objective", force_sft ? "sft" : "dpo");
  t.objective.kind = objectives::ObjectiveKindFromName(objective);
  if (force_sft && t.objective.kind != objectives::ObjectiveKind::kSft) {
    Fail(ErrorCode::kSchema, "config " + section + ".objective must be sft");
  }
  t.objective.beta_dpo = GetNum(j, section, "beta_dpo", t.objective.beta_dpo);
  t.objective.gamma_rat = GetNum(j, section, "gamma_rat", t.objective.gamma_rat);
  t.objective.lambda_orpo = GetNum(j, section, "lambda_orpo", t.objective.lambda_orpo);
  t.objective.normalize_rationale_nll =
      GetBool(j, section, "normalize_rationale_nll", t.objective.normalize_rationale_nll);
  t.epochs = static_cast<int32_t>(GetInt(j, section, "epochs", t.epochs));
  t.batch_size = static_cast<int32_t>(GetInt(j, section, "batch_size", t.batch_size));
  t.learning_rate = GetNum(j, section, "learning_rate", t.learning_rate);
  t.optimizer = trainer::OptimizerKindFromName(GetStr(j, section, "optimizer", "adam"));
  t.adam_beta1 = GetNum(j, section, "adam_beta1", t.adam_beta1);
  t.adam_beta2 = GetNum(j, section, "adam_beta2", t.adam_beta2);
  t.adam_eps = GetNum(j, section, "adam_eps", t.adam_eps);
  t.grad_clip_norm = GetNum(j, section, "grad_clip_norm", t.grad_clip_norm);
  t.seed = GetSeed(j, section, "seed", t.seed);
  t.eval_every = static_cast<int32_t>(GetInt(j, section, "eval_every", t.eval_every));
  t.checkpoint_dir = GetStr(j, section, "checkpoint_dir", t.checkpoint_dir);
  return t;
}

EvalConfig ReadEval(const ordered_json& j) {
  CheckKeys(j, "eval",
            {"n_prompts", "max_len", "temperature", "draw_threshold", "prompt_seed",
             "sample_seed"});
  EvalConfig e;
  e.n_prompts = static_cast<size_t>(GetInt(j, "eval", "n_prompts",
                                           static_cast<int64_t>(e.n_prompts)));
  e.max_len = static_cast<int32_t>(GetInt(j, "eval", "max_len", e.max_len));
  e.temperature = GetNum(j, "eval", "temperature", e.temperature);
  e.draw_threshold = GetNum(j, "eval", "draw_threshold", e.draw_threshold);
  e.prompt_seed = GetSeed(j, "eval", "prompt_seed", e.prompt_seed);
  e.sample_seed = GetSeed(j, "eval", "sample_seed", e.sample_seed);
  return e;
}

client::ApiConfig ReadClient(const ordered_json& j) {
  if (Child(j, "api_key") != nullptr) {
    Fail(ErrorCode::kSchema,
         "config client.api_key is not accepted; set PREFLAB_API_KEY in the environment");
  }
  CheckKeys(j, "client",
            {"endpoint", "model", "max_in_flight", "retry_max_attempts", "retry_backoff_s",
             "cache_dir", "temperature", "max_tokens", "timeout_s"});
  client::ApiConfig c;
  c.endpoint = GetStr(j, "client", "endpoint", c.endpoint);
  c.model = GetStr(j, "client", "model", c.model);
  c.max_in_flight = static_cast<int32_t>(GetInt(j, "client", "max_in_flight", c.max_in_flight));
  c.retry.max_attempts =
      static_cast<int32_t>(GetInt(j, "client", "retry_max_attempts", c.retry.max_attempts));
  c.retry.backoff_base_s = GetNum(j, "client", "retry_backoff_s", c.retry.backoff_base_s);
  c.cache_dir = GetStr(j, "client", "cache_dir", c.cache_dir);
  c.temperature = GetNum(j, "client", "temperature", c.temperature);
  c.max_tokens = static_cast<int32_t>(GetInt(j, "client", "max_tokens", c.max_tokens));
  c.timeout_s = GetNum(j, "client", "timeout_s", c.timeout_s);
  return c;
}

PathsConfig ReadPaths(const ordered_json& j) {
  CheckKeys(j, "paths", {"data", "checkpoints", "reports"});
  PathsConfig p;
  p.data = GetStr(j, "paths", "data", p.data);
  p.checkpoints = GetStr(j, "paths", "checkpoints", p.checkpoints);
  p.reports = GetStr(j, "paths", "reports", p.reports);
  return p;
}

void ApplyOverride(ordered_json* root, const std::string& assignment) {
  size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    Fail(ErrorCode::kInvalidArgument, "override must look like section.key=value: " + assignment);
  }
  std::string path = assignment.substr(0, eq);
  std::string value = assignment.substr(eq + 1);

  ordered_json parsed = ordered_json::parse(value, nullptr, false);
  if (parsed.is_discarded()) parsed = value;  // bare words are strings

  ordered_json* node = root;
  size_t start = 0;
  for (;;) {
    size_t dot = path.find('.', start);
    std::string part = path.substr(start, dot == std::string::npos ? dot : dot - start);
    if (part.empty()) {
      Fail(ErrorCode::kInvalidArgument, "override has an empty path segment: " + assignment);
    }
    if (dot == std::string::npos) {
      (*node)[part] = parsed;
      return;
    }
    ordered_json& next = (*node)[part];
    if (next.is_null()) next = ordered_json::object();
    if (!next.is_object()) {
      Fail(ErrorCode::kInvalidArgument, "override path crosses a non-object: " + assignment);
    }
    node = &next;
    start = dot + 1;
  }
}

struct Pipeline {
  synthworld::WorldConfig world;
  policy::Vocab vocab;
  corpus::Dataset sft_data;
  corpus::Dataset pool;
  policy::PolicyModel sft_model;
  std::vector<policy::TokenIds> prompts;
  evalsuite::SamplingConfig sampling;
};

Pipeline BuildPipeline(const ExperimentConfig& cfg, uint64_t seed) {
  if (cfg.model.vocab != ModelVocabKind::kWorld) {
    Fail(ErrorCode::kPrecondition, "synthetic experiments require model.vocab = world");
  }
  Pipeline p;
  p.world = cfg.world;
  p.world.seed = MixSeed(seed, kStreamWorld);
  p.vocab = synthworld::WorldVocab(p.world);

  corpus::Dataset all = synthworld::MakeDataset(p.world, cfg.sft_records + cfg.pool_records);
  p.sft_data.assign(all.begin(), all.begin() + static_cast<ptrdiff_t>(cfg.sft_records));
  p.pool.assign(all.begin() + static_cast<ptrdiff_t>(cfg.sft_records), all.end());

  policy::PolicyModel init =
      cfg.model.init == ModelInit::kRandom
          ? policy::PolicyModel::Random(cfg.model.arch, p.vocab, MixSeed(seed, kStreamInit))
          : policy::PolicyModel::Uniform(cfg.model.arch, p.vocab);

  trainer::TrainConfig sft_cfg = cfg.sft;
  sft_cfg.objective.kind = objectives::ObjectiveKind::kSft;
  sft_cfg.seed = MixSeed(seed, kStreamSft);
  p.sft_model = trainer::RunSft(init, p.sft_data, sft_cfg);

  p.prompts = synthworld::MakePrompts(p.world, cfg.eval.n_prompts, MixSeed(seed, kStreamPrompts));
  p.sampling.max_len = cfg.eval.max_len;
  p.sampling.temperature = cfg.eval.temperature;
  p.sampling.seed = MixSeed(seed, kStreamSampling);
  return p;
}

bool NeedsRef(objectives::ObjectiveKind kind) {
  return kind == objectives::ObjectiveKind::kDpo || kind == objectives::ObjectiveKind::kRdpo;
}

bool UsesRationales(objectives::ObjectiveKind kind) {
  return kind == objectives::ObjectiveKind::kRdpo || kind == objectives::ObjectiveKind::kRorpo;
}

}  // namespace

ExperimentConfig ParseConfig(const std::string& json_text,
                             const std::vector<std::string>& overrides) {
  ordered_json root = ordered_json::parse(json_text, nullptr, false);
  if (root.is_discarded()) Fail(ErrorCode::kParse, "config is not valid JSON");
  if (!root.is_object()) Fail(ErrorCode::kSchema, "config must be a JSON object");
  for (const std::string& o : overrides) ApplyOverride(&root, o);

  CheckKeys(root, "",
            {"seed_root", "world", "model", "train", "sft", "sft_records", "pool_records", "eval",
             "client", "paths"});
  static const ordered_json kEmpty = ordered_json::object();
  auto section = [&](const char* name) -> const ordered_json& {
    const ordered_json* c = Child(root, name);
    if (c == nullptr) return kEmpty;
    if (!c->is_object()) Fail(ErrorCode::kSchema, std::string("config ") + name + " must be an object");
    return *c;
  };

  ExperimentConfig cfg;
  cfg.seed_root = GetSeed(root, "", "seed_root", cfg.seed_root);
  cfg.world = ReadWorld(section("world"));
  cfg.model = ReadModel(section("model"));
  cfg.train = ReadTrain(section("train"), "train", /*force_sft=*/false);
  cfg.sft = ReadTrain(section("sft"), "sft", /*force_sft=*/true);
  cfg.sft_records = static_cast<size_t>(GetInt(root, "", "sft_records",
                                               static_cast<int64_t>(cfg.sft_records)));
  cfg.pool_records = static_cast<size_t>(GetInt(root, "", "pool_records",
                                                static_cast<int64_t>(cfg.pool_records)));
  cfg.eval = ReadEval(section("eval"));
  cfg.api = ReadClient(section("client"));
  cfg.paths = ReadPaths(section("paths"));
  return cfg;
}

ExperimentConfig LoadConfigFile(const std::string& path,
                                const std::vector<std::string>& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ParseConfig(ss.str(), overrides);
}

std::string ConfigJson(const ExperimentConfig& cfg) {
  ordered_json j;
  j["seed_root"] = cfg.seed_root;

  ordered_json w;
  w["vocab_size"] = cfg.world.vocab_size;
  w["quality_tokens"] = cfg.world.quality_tokens;
  w["prompt_len"] = cfg.world.prompt_len;
  w["response_len"] = cfg.world.response_len;
  w["reward_quality"] = cfg.world.reward_quality;
  w["reward_length"] = cfg.world.reward_length;
  w["epsilon_bias"] = cfg.world.epsilon_bias;
  w["channel_alpha"] = cfg.world.channel_alpha;
  w["channel_beta"] = cfg.world.channel_beta;
  w["rationale_style"] = cfg.world.style == synthworld::RationaleStyle::kFeatureNamed
                             ? "feature_named"
                             : "polarity_only";
  w["seed"] = cfg.world.seed;
  j["world"] = std::move(w);

  ordered_json m;
  if (cfg.model.arch.kind == policy::ArchKind::kNgram) {
    m["arch"] = "ngram";
    m["order"] = cfg.model.arch.ngram.order;
  } else {
    m["arch"] = "decoder";
    m["dim"] = cfg.model.arch.decoder.dim;
    m["heads"] = cfg.model.arch.decoder.heads;
    m["layers"] = cfg.model.arch.decoder.layers;
    m["context_len"] = cfg.model.arch.decoder.context_len;
  }
  m["init"] = cfg.model.init == ModelInit::kRandom ? "random" : "uniform";
  m["init_seed"] = cfg.model.init_seed;
  m["vocab"] = cfg.model.vocab == ModelVocabKind::kWorld ? "world" : "ascii";
  j["model"] = std::move(m);

  auto train_json = [](const trainer::TrainConfig& t) {
    ordered_json o;
    o["objective"] = objectives::ObjectiveKindName(t.objective.kind);
    o["beta_dpo"] = t.objective.beta_dpo;
    o["gamma_rat"] = t.objective.gamma_rat;
    o["lambda_orpo"] = t.objective.lambda_orpo;
    o["normalize_rationale_nll"] = t.objective.normalize_rationale_nll;
    o["epochs"] = t.epochs;
    o["batch_size"] = t.batch_size;
    o["learning_rate"] = t.learning_rate;
    o["optimizer"] = trainer::OptimizerKindName(t.optimizer);
    o["adam_beta1"] = t.adam_beta1;
    o["adam_beta2"] = t.adam_beta2;
    o["adam_eps"] = t.adam_eps;
    o["grad_clip_norm"] = t.grad_clip_norm;
    o["seed"] = t.seed;
    o["eval_every"] = t.eval_every;
    o["checkpoint_dir"] = t.checkpoint_dir;
    return o;
  };
  j["train"] = train_json(cfg.train);
  j["sft"] = train_json(cfg.sft);
  j["sft_records"] = cfg.sft_records;
  j["pool_records"] = cfg.pool_records;

  ordered_json e;
  e["n_prompts"] = cfg.eval.n_prompts;
  e["max_len"] = cfg.eval.max_len;
  e["temperature"] = cfg.eval.temperature;
  e["draw_threshold"] = cfg.eval.draw_threshold;
  e["prompt_seed"] = cfg.eval.prompt_seed;
  e["sample_seed"] = cfg.eval.sample_seed;
  j["eval"] = std::move(e);

  ordered_json c;
  c["endpoint"] = cfg.api.endpoint;
  c["model"] = cfg.api.model;
  c["max_in_flight"] = cfg.api.max_in_flight;
  c["retry_max_attempts"] = cfg.api.retry.max_attempts;
  c["retry_backoff_s"] = cfg.api.retry.backoff_base_s;
  c["cache_dir"] = cfg.api.cache_dir;
  c["temperature"] = cfg.api.temperature;
  c["max_tokens"] = cfg.api.max_tokens;
  c["timeout_s"] = cfg.api.timeout_s;
  j["client"] = std::move(c);

  ordered_json p;
  p["data"] = cfg.paths.data;
  p["checkpoints"] = cfg.paths.checkpoints;
  p["reports"] = cfg.paths.reports;
  j["paths"] = std::move(p);

  return j.dump(2) + "\n";
}

std::string MetadataJson(const ExperimentConfig& cfg, const std::string& command) {
  ordered_json j;
  j["version"] = kVersion;
  j["command"] = command;
  j["config"] = ordered_json::parse(ConfigJson(cfg));
  return j.dump(2) + "\n";
}

policy::Vocab ModelVocab(const ExperimentConfig& cfg) {
  if (cfg.model.vocab == ModelVocabKind::kWorld) return synthworld::WorldVocab(cfg.world);
  return policy::Vocab::MakeCharAscii();
}

policy::PolicyModel InitModel(const ExperimentConfig& cfg) {
  policy::Vocab vocab = ModelVocab(cfg);
  if (cfg.model.init == ModelInit::kRandom) {
    return policy::PolicyModel::Random(cfg.model.arch, vocab, cfg.model.init_seed);
  }
  return policy::PolicyModel::Uniform(cfg.model.arch, vocab);
}

TrainRun TrainFromConfig(const ExperimentConfig& cfg, objectives::ObjectiveKind kind,
                         const corpus::Dataset& data, const policy::PolicyModel* init,
                         const policy::PolicyModel* ref) {
  policy::PolicyModel start = init != nullptr ? *init : InitModel(cfg);
  TrainRun run;
  if (kind == objectives::ObjectiveKind::kSft) {
    trainer::TrainConfig tc = cfg.sft;
    tc.objective.kind = kind;
    run.model = trainer::RunSft(start, data, tc, &run.report);
    return run;
  }
  trainer::TrainConfig tc = cfg.train;
  tc.objective.kind = kind;
  if (NeedsRef(kind) && ref == nullptr) {
    policy::PolicyModel frozen = start;
    auto [model, report] = trainer::RunPreference(start, &frozen, data, tc);
    run.model = std::move(model);
    run.report = std::move(report);
    return run;
  }
  auto [model, report] = trainer::RunPreference(start, ref, data, tc);
  run.model = std::move(model);
  run.report = std::move(report);
  return run;
}

evalsuite::Curve RunEfficiency(const ExperimentConfig& cfg,
                               const std::vector<objectives::ObjectiveKind>& kinds,
                               const std::vector<size_t>& sizes, uint64_t seed) {
  if (kinds.empty()) Fail(ErrorCode::kInvalidArgument, "efficiency run needs objectives");
  Pipeline p = BuildPipeline(cfg, seed);
  evalsuite::Curve curve;
  for (objectives::ObjectiveKind kind : kinds) {
    trainer::TrainConfig tc = cfg.train;
    tc.objective.kind = kind;
    tc.seed = MixSeed(seed, kStreamTrain);
    const policy::PolicyModel* ref = NeedsRef(kind) ? &p.sft_model : nullptr;
    evalsuite::Curve part = evalsuite::EfficiencyCurve(
        objectives::ObjectiveKindName(kind), p.sft_model, ref, p.pool, sizes, tc, p.sft_model,
        p.prompts, p.world, p.sampling, cfg.eval.draw_threshold);
    curve.insert(curve.end(), part.begin(), part.end());
  }
  return curve;
}

evalsuite::Curve RunCorruption(const ExperimentConfig& cfg, const std::vector<std::string>& modes,
                               uint64_t seed) {
  if (modes.empty()) Fail(ErrorCode::kInvalidArgument, "corruption run needs modes");
  if (!UsesRationales(cfg.train.objective.kind)) {
    Fail(ErrorCode::kPrecondition, "corruption experiment requires a rationale objective");
  }
  Pipeline p = BuildPipeline(cfg, seed);
  trainer::TrainConfig tc = cfg.train;
  tc.seed = MixSeed(seed, kStreamTrain);
  const policy::PolicyModel* ref = NeedsRef(tc.objective.kind) ? &p.sft_model : nullptr;

  policy::PolicyModel original = trainer::RunPreference(p.sft_model, ref, p.pool, tc).first;

  evalsuite::Curve curve;
  for (const std::string& mode : modes) {
    corpus::Dataset variant;
    if (mode == "none") {
      variant = p.pool;
    } else if (mode == "permute") {
      variant = corpus::PermuteRationales(p.pool, MixSeed(seed, kStreamPermute));
    } else if (mode == "opposite") {
      variant = corpus::NegateRationales(p.pool);
    } else {
      Fail(ErrorCode::kInvalidArgument, "unknown corruption mode: " + mode);
    }
    policy::PolicyModel corrupted = trainer::RunPreference(p.sft_model, ref, variant, tc).first;
    evalsuite::CurvePoint pt;
    pt.experiment = "original_vs_" + mode;
    pt.train_size = p.pool.size();
    pt.result = evalsuite::Winrate(original, corrupted, p.prompts, p.world, p.sampling,
                                   cfg.eval.draw_threshold);
    curve.push_back(std::move(pt));
  }
  return curve;
}

evalsuite::Curve RunHeadToHead(const ExperimentConfig& cfg, uint64_t seed) {
  objectives::ObjectiveKind rat_kind = cfg.train.objective.kind;
  objectives::ObjectiveKind base_kind;
  if (rat_kind == objectives::ObjectiveKind::kRdpo) {
    base_kind = objectives::ObjectiveKind::kDpo;
  } else if (rat_kind == objectives::ObjectiveKind::kRorpo) {
    base_kind = objectives::ObjectiveKind::kOrpo;
  } else {
    Fail(ErrorCode::kPrecondition, "head-to-head requires objective rdpo or rorpo");
  }
  Pipeline p = BuildPipeline(cfg, seed);

  trainer::TrainConfig tc_rat = cfg.train;
  tc_rat.objective.kind = rat_kind;
  tc_rat.seed = MixSeed(seed, kStreamTrain);
  trainer::TrainConfig tc_base = tc_rat;
  tc_base.objective.kind = base_kind;

  const policy::PolicyModel* ref = NeedsRef(rat_kind) ? &p.sft_model : nullptr;
  policy::PolicyModel rat_model = trainer::RunPreference(p.sft_model, ref, p.pool, tc_rat).first;
  policy::PolicyModel base_model =
      trainer::RunPreference(p.sft_model, ref, p.pool, tc_base).first;

  evalsuite::CurvePoint pt;
  pt.experiment = std::string(objectives::ObjectiveKindName(rat_kind)) + "_vs_" +
                  objectives::ObjectiveKindName(base_kind);
  pt.train_size = p.pool.size();
  pt.result = evalsuite::Winrate(rat_model, base_model, p.prompts, p.world, p.sampling,
                                 cfg.eval.draw_threshold);
  return {pt};
}

}  // namespace preflab::experiment
