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

// ABI-level coverage: this binary links only the shared library and its
// public C header, exactly like an external consumer would.

#include "preflab/preflab.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"

namespace {

struct OwnedStr {
  char* ptr = nullptr;
  ~OwnedStr() { preflab_string_free(ptr); }
  std::string str() const { return ptr == nullptr ? std::string() : std::string(ptr); }
};

struct TempDir {
  std::string path;
  explicit TempDir(const std::string& name) : path("/tmp/preflab_capi_" + name) {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string File(const std::string& name) const { return path + "/" + name; }
};

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_SUITE_BEGIN("capi");

TEST_CASE("version and error state") {
  std::string version = preflab_version();
  CHECK(!version.empty());
  CHECK(preflab_mutual_info(0.5, 0.0, -1.0, 1.0, nullptr) != PREFLAB_OK);
  CHECK(preflab_last_error_code() != PREFLAB_OK);
  std::string msg = preflab_last_error_message();
  CHECK(!msg.empty());
}

TEST_CASE("mutual information closed form and monte carlo") {
  double out = -1.0;
  REQUIRE(preflab_mutual_info(0.5, 0.0, 0.0, 1.0, &out) == PREFLAB_OK);
  CHECK(std::fabs(out - 0.693147180559945) < 1e-12);

  REQUIRE(preflab_mutual_info(0.7, 0.0, 0.5, 0.5, &out) == PREFLAB_OK);
  CHECK(std::fabs(out) < 1e-12);

  double est = 0.0, se = 0.0;
  REQUIRE(preflab_mutual_info_mc(0.6, 0.1, 0.3, 0.9, 200000, 7, &est, &se) == PREFLAB_OK);
  double closed = 0.0;
  REQUIRE(preflab_mutual_info(0.6, 0.1, 0.3, 0.9, &closed) == PREFLAB_OK);
  CHECK(se > 0.0);
  CHECK(std::fabs(est - closed) < std::fmax(5e-3, 3.0 * se));

  CHECK(preflab_mutual_info(1.5, 0.0, 0.3, 0.9, &out) == PREFLAB_ERR_INVALID_ARGUMENT);
}

TEST_CASE("mi sweep csv shape") {
  OwnedStr csv;
  REQUIRE(preflab_mi_sweep_csv(0.7, 0.0, 11, &csv.ptr) == PREFLAB_OK);
  std::string text = csv.str();
  CHECK(text.rfind("gamma,cmi,entropy_term_1,entropy_term_2\n", 0) == 0);
  size_t rows = 0;
  for (char c : text) rows += (c == '\n') ? 1 : 0;
  CHECK(rows == 12);
  CHECK(preflab_mi_sweep_csv(0.7, 0.0, 1, &csv.ptr) == PREFLAB_ERR_INVALID_ARGUMENT);
}

TEST_CASE("generalization bounds") {
  double with_r = 0.0, without_r = 0.0;
  REQUIRE(preflab_gen_bounds(1.0, 100.0, 0.5, 0.1, 0.2, 0.7, &with_r, &without_r) ==
          PREFLAB_OK);
  CHECK(std::fabs(with_r - 0.126491106406735) < 1e-9);
  CHECK(std::fabs(without_r - 0.154919333848297) < 1e-9);

  double counts[3] = {10.0, 100.0, 1000.0};
  OwnedStr csv;
  REQUIRE(preflab_bounds_csv(1.0, 0.5, 0.1, 0.2, 0.7, counts, 3, &csv.ptr) == PREFLAB_OK);
  CHECK(csv.str().rfind("n,bound_ra,bound_un\n", 0) == 0);
}

TEST_CASE("fano and error bounds") {
  double lower = 0.0, raw = 0.0;
  REQUIRE(preflab_fano_lower_bound(0.693147, 0.05, 0.02, 0.01, 2, &lower, &raw) == PREFLAB_OK);
  CHECK(lower >= 0.0);
  CHECK(raw <= lower + 1e-15);
  double upper = 0.0;
  REQUIRE(preflab_err_upper_bound(0.693147, 0.05, 0.6, &upper, nullptr) == PREFLAB_OK);
  CHECK(upper >= 0.0);
  CHECK(upper <= 0.5);
}

TEST_CASE("config resolve applies overrides and rejects junk") {
  OwnedStr out;
  REQUIRE(preflab_config_resolve("{}", nullptr, 0, &out.ptr) == PREFLAB_OK);
  std::string base = out.str();
  CHECK(base.find("\"seed_root\"") != std::string::npos);
  CHECK(base.find("\"world\"") != std::string::npos);

  const char* overrides[] = {"world.vocab_size=24", "train.objective=rdpo"};
  OwnedStr patched;
  REQUIRE(preflab_config_resolve("{}", overrides, 2, &patched.ptr) == PREFLAB_OK);
  CHECK(patched.str().find("\"vocab_size\": 24") != std::string::npos);
  CHECK(patched.str().find("\"objective\": \"rdpo\"") != std::string::npos);

  OwnedStr bad;
  CHECK(preflab_config_resolve("{nope", nullptr, 0, &bad.ptr) == PREFLAB_ERR_PARSE);
  CHECK(preflab_config_resolve("{\"bogus_section\":1}", nullptr, 0, &bad.ptr) ==
        PREFLAB_ERR_SCHEMA);
  const char* key_override[] = {"client.api_key=sk-nope"};
  CHECK(preflab_config_resolve("{}", key_override, 1, &bad.ptr) == PREFLAB_ERR_SCHEMA);
  std::string msg = preflab_last_error_message();
  CHECK(msg.find("PREFLAB_API_KEY") != std::string::npos);
}

TEST_CASE("metadata json embeds the command") {
  OwnedStr meta;
  REQUIRE(preflab_metadata_json("{}", nullptr, 0, "gen-data --n 8", &meta.ptr) == PREFLAB_OK);
  CHECK(meta.str().find("\"command\": \"gen-data --n 8\"") != std::string::npos);
  CHECK(meta.str().find("\"version\"") != std::string::npos);
  CHECK(meta.str().find("\"config\"") != std::string::npos);
}

TEST_CASE("dataset round-trip through files") {
  TempDir dir("dataset");
  std::string in_path = dir.File("in.jsonl");
  {
    std::ofstream out(in_path);
    out << R"({"prompt":"p","chosen":"a","rejected":"b"})" << "\n";
    out << R"({"prompt":"q","chosen":"c","rejected":"d","rationale":"r","rationale_kind":"general"})"
        << "\n";
  }
  preflab_dataset* ds = preflab_dataset_load(in_path.c_str());
  REQUIRE(ds != nullptr);
  CHECK(preflab_dataset_size(ds) == 2);
  std::string out_path = dir.File("out.jsonl");
  REQUIRE(preflab_dataset_save(ds, out_path.c_str()) == PREFLAB_OK);
  preflab_dataset_free(ds);

  preflab_dataset* back = preflab_dataset_load(out_path.c_str());
  REQUIRE(back != nullptr);
  CHECK(preflab_dataset_size(back) == 2);
  preflab_dataset_free(back);

  CHECK(preflab_dataset_load(dir.File("missing.jsonl").c_str()) == nullptr);
  CHECK(preflab_last_error_code() == PREFLAB_ERR_IO);
}

TEST_CASE("gen data writes synthetic records and a loadable file") {
  TempDir dir("gendata");
  std::string path = dir.File("world.jsonl");
  REQUIRE(preflab_gen_data("{}", 12, path.c_str()) == PREFLAB_OK);
  preflab_dataset* ds = preflab_dataset_load(path.c_str());
  REQUIRE(ds != nullptr);
  CHECK(preflab_dataset_size(ds) == 12);
  preflab_dataset_free(ds);
  std::string text = ReadFile(path);
  CHECK(text.find("\"rationale_kind\":\"synthetic\"") != std::string::npos);

  CHECK(preflab_gen_data("{}", 0, path.c_str()) == PREFLAB_ERR_INVALID_ARGUMENT);
}

TEST_CASE("corrupt modes permute and flip") {
  TempDir dir("corrupt");
  std::string base = dir.File("base.jsonl");
  REQUIRE(preflab_gen_data("{}", 10, base.c_str()) == PREFLAB_OK);

  std::string permuted = dir.File("perm.jsonl");
  REQUIRE(preflab_corrupt(base.c_str(), "permute", 3, permuted.c_str()) == PREFLAB_OK);
  CHECK(ReadFile(permuted) != ReadFile(base));

  std::string flipped = dir.File("flip.jsonl");
  REQUIRE(preflab_corrupt(base.c_str(), "opposite", 3, flipped.c_str()) == PREFLAB_OK);
  std::string twice = dir.File("flip2.jsonl");
  REQUIRE(preflab_corrupt(flipped.c_str(), "opposite", 3, twice.c_str()) == PREFLAB_OK);
  CHECK(ReadFile(twice) == ReadFile(base));

  CHECK(preflab_corrupt(base.c_str(), "scramble", 3, permuted.c_str()) ==
        PREFLAB_ERR_INVALID_ARGUMENT);
}

TEST_CASE("train writes a checkpoint the model api can use") {
  TempDir dir("train");
  std::string data = dir.File("data.jsonl");
  const char* cfg =
      "{\"model\":{\"arch\":\"ngram\",\"order\":2},"
      "\"sft\":{\"epochs\":1,\"batch_size\":8,\"learning_rate\":0.05},"
      "\"world\":{\"vocab_size\":8,\"quality_tokens\":3,\"prompt_len\":3,\"response_len\":4}}";
  REQUIRE(preflab_gen_data(cfg, 24, data.c_str()) == PREFLAB_OK);

  std::string ckpt = dir.File("sft.ckpt");
  std::string metrics = dir.File("sft_metrics.csv");
  REQUIRE(preflab_train(cfg, "sft", data.c_str(), nullptr, nullptr, ckpt.c_str(),
                        metrics.c_str()) == PREFLAB_OK);
  CHECK(ReadFile(metrics).rfind("step,total,preference_term,rationale_nll\n", 0) == 0);

  preflab_model* model = preflab_model_load(ckpt.c_str());
  REQUIRE(model != nullptr);
  CHECK(preflab_model_num_params(model) > 0);

  double lp = 1.0;
  REQUIRE(preflab_model_logprob(model, "q0 q1", "u0", &lp) == PREFLAB_OK);
  CHECK(lp < 0.0);

  OwnedStr text;
  REQUIRE(preflab_model_sample(model, "q0 q1 q2", 6, 1.0, 5, &text.ptr) == PREFLAB_OK);
  OwnedStr again;
  REQUIRE(preflab_model_sample(model, "q0 q1 q2", 6, 1.0, 5, &again.ptr) == PREFLAB_OK);
  CHECK(text.str() == again.str());

  std::string copy = dir.File("copy.ckpt");
  REQUIRE(preflab_model_save(model, copy.c_str()) == PREFLAB_OK);
  CHECK(ReadFile(copy) == ReadFile(ckpt));
  preflab_model_free(model);

  // A preference run starting from the sft checkpoint.
  std::string dpo = dir.File("dpo.ckpt");
  REQUIRE(preflab_train(cfg, "dpo", data.c_str(), ckpt.c_str(), nullptr, dpo.c_str(),
                        nullptr) == PREFLAB_OK);
  preflab_model* tuned = preflab_model_load(dpo.c_str());
  REQUIRE(tuned != nullptr);
  preflab_model_free(tuned);

  CHECK(preflab_train(cfg, "frobnicate", data.c_str(), nullptr, nullptr, ckpt.c_str(),
                      nullptr) == PREFLAB_ERR_INVALID_ARGUMENT);
}

TEST_CASE("eval winrate of a checkpoint against itself draws everything") {
  TempDir dir("winrate");
  const char* cfg =
      "{\"model\":{\"arch\":\"ngram\",\"order\":2},"
      "\"world\":{\"vocab_size\":8,\"quality_tokens\":3,\"prompt_len\":3,\"response_len\":4},"
      "\"eval\":{\"n_prompts\":20,\"max_len\":5}}";
  std::string data = dir.File("data.jsonl");
  REQUIRE(preflab_gen_data(cfg, 16, data.c_str()) == PREFLAB_OK);
  std::string ckpt = dir.File("m.ckpt");
  REQUIRE(preflab_train(cfg, "sft", data.c_str(), nullptr, nullptr, ckpt.c_str(), nullptr) ==
          PREFLAB_OK);

  OwnedStr csv;
  REQUIRE(preflab_eval_winrate(cfg, ckpt.c_str(), ckpt.c_str(), &csv.ptr) == PREFLAB_OK);
  CHECK(csv.str() ==
        "experiment,train_size,wins,losses,draws,winrate\n"
        "winrate,0,0,0,20,0.000000000\n");
}

TEST_CASE("null argument handling") {
  CHECK(preflab_mutual_info(0.5, 0.0, 0.3, 0.9, nullptr) == PREFLAB_ERR_INVALID_ARGUMENT);
  CHECK(preflab_dataset_size(nullptr) < 0);
  CHECK(preflab_model_load(nullptr) == nullptr);
  CHECK(preflab_config_resolve(nullptr, nullptr, 0, nullptr) ==
        PREFLAB_ERR_INVALID_ARGUMENT);
  preflab_dataset_free(nullptr);
  preflab_model_free(nullptr);
  preflab_string_free(nullptr);
}

TEST_SUITE_END();
