/* Copyright 2026 The Preflab Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to the preference-learning lab: opaque handles, integer status
 * codes, thread-local error details. Every function that can fail returns a
 * status (0 = ok) or NULL; preflab_last_error_message() then describes the
 * failure for the calling thread. Strings returned through char** are owned
 * by the caller and released with preflab_string_free(). */

#ifndef PREFLAB_PREFLAB_H_
#define PREFLAB_PREFLAB_H_

#include <stdint.h>

#if defined(__GNUC__)
#define PREFLAB_API __attribute__((visibility("default")))
#else
#define PREFLAB_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. */
enum {
  PREFLAB_OK = 0,
  PREFLAB_ERR_INVALID_ARGUMENT = 1,
  PREFLAB_ERR_PRECONDITION = 2,
  PREFLAB_ERR_PARSE = 3,
  PREFLAB_ERR_SCHEMA = 4,
  PREFLAB_ERR_IO = 5,
  PREFLAB_ERR_TOKENIZATION = 6,
  PREFLAB_ERR_NUMERIC = 7,
  PREFLAB_ERR_UNSUPPORTED = 8,
  PREFLAB_ERR_CORRUPT_CHECKPOINT = 9,
  PREFLAB_ERR_VERSION_MISMATCH = 10,
  PREFLAB_ERR_DEGENERATE_CHANNEL = 11,
  PREFLAB_ERR_HTTP = 12,
  PREFLAB_ERR_PROVIDER = 13,
  PREFLAB_ERR_INTERNAL = 100
};

PREFLAB_API const char* preflab_version(void);

/* Thread-local details for the most recent failure on this thread. */
PREFLAB_API int preflab_last_error_code(void);
PREFLAB_API const char* preflab_last_error_message(void);

PREFLAB_API void preflab_string_free(char* s);

/* ---- Experiment configuration ------------------------------------------ */

/* Parses config JSON, applies "section.key=value" overrides, validates, and
 * returns the fully resolved config as canonical JSON. */
PREFLAB_API int preflab_config_resolve(const char* config_json, const char* const* overrides,
                                       int n_overrides, char** out_json);

/* Provenance blob for run directories: version + command + resolved config. */
PREFLAB_API int preflab_metadata_json(const char* config_json, const char* const* overrides,
                                      int n_overrides, const char* command, char** out_json);

/* ---- Preference datasets (JSONL) --------------------------------------- */

typedef struct preflab_dataset preflab_dataset;

PREFLAB_API preflab_dataset* preflab_dataset_load(const char* jsonl_path);
PREFLAB_API int preflab_dataset_save(const preflab_dataset* ds, const char* jsonl_path);
PREFLAB_API int64_t preflab_dataset_size(const preflab_dataset* ds);
PREFLAB_API void preflab_dataset_free(preflab_dataset* ds);

/* ---- Policy models ------------------------------------------------------ */

typedef struct preflab_model preflab_model;

PREFLAB_API preflab_model* preflab_model_load(const char* checkpoint_path);
PREFLAB_API int preflab_model_save(const preflab_model* model, const char* checkpoint_path);
PREFLAB_API int64_t preflab_model_num_params(const preflab_model* model);
PREFLAB_API void preflab_model_free(preflab_model* model);

/* Teacher-forced log pi(response | context) under the model's tokenizer. */
PREFLAB_API int preflab_model_logprob(const preflab_model* model, const char* context,
                                      const char* response, double* out_logprob);

/* Ancestral sampling; the detokenized response is returned via out_text. */
PREFLAB_API int preflab_model_sample(const preflab_model* model, const char* context,
                                     int32_t max_len, double temperature, uint64_t seed,
                                     char** out_text);

/* ---- Pipeline operations ------------------------------------------------ */

/* Synthetic preference records (with rationales) to a JSONL file. */
PREFLAB_API int preflab_gen_data(const char* config_json, int64_t n, const char* out_jsonl);

/* Model-written rationales via the configured HTTP service. kind is
 * "general" or "detailed". Failed records are reported through out_failures
 * and left rationale-free; the call still writes the output file. */
PREFLAB_API int preflab_gen_rationales(const char* config_json, const char* in_jsonl,
                                       const char* kind, int overwrite, const char* out_jsonl,
                                       int64_t* out_failures);

/* Rationale corruption: mode "permute" (index derangement) or "opposite"
 * (polarity flip; synthetic rationales only). */
PREFLAB_API int preflab_corrupt(const char* in_jsonl, const char* mode, uint64_t seed,
                                const char* out_jsonl);

/* One training run. objective: sft|dpo|rdpo|orpo|rorpo. init_ckpt NULL means
 * a fresh model per the config's model section; ref_ckpt NULL freezes a copy
 * of the start model when the objective needs a reference. Writes the final
 * checkpoint and, when metrics_csv is non-NULL, the per-step loss table. */
PREFLAB_API int preflab_train(const char* config_json, const char* objective,
                              const char* data_jsonl, const char* init_ckpt, const char* ref_ckpt,
                              const char* out_ckpt, const char* metrics_csv);

/* Head-to-head winrate of two checkpoints on the configured world; returns
 * the one-row CSV table. */
PREFLAB_API int preflab_eval_winrate(const char* config_json, const char* ckpt_a,
                                     const char* ckpt_b, char** out_csv);

/* Sample-efficiency curves. objectives: comma list (e.g. "dpo,rdpo");
 * sizes: comma list of train sizes (e.g. "100,200,400"). out_json may be
 * NULL; it carries the same table as JSON for the report subcommand. */
PREFLAB_API int preflab_eval_curve(const char* config_json, const char* objectives,
                                   const char* sizes, uint64_t seed, char** out_csv,
                                   char** out_json);

/* Rationale-corruption experiment. modes: comma list out of
 * none|permute|opposite. */
PREFLAB_API int preflab_eval_corruption(const char* config_json, const char* modes, uint64_t seed,
                                        char** out_csv, char** out_json);

/* Rationale objective vs its rationale-free counterpart on the configured
 * world (rdpo vs dpo, rorpo vs orpo). */
PREFLAB_API int preflab_eval_headtohead(const char* config_json, uint64_t seed, char** out_csv,
                                        char** out_json);

/* ---- Information-theoretic quantities ----------------------------------- */

/* Closed-form I(Z;R|S) in nats for P(Z=1|S) = p + eps and the binary
 * rationale channel (alpha, beta). */
PREFLAB_API int preflab_mutual_info(double p, double eps, double alpha, double beta, double* out);

/* Plug-in Monte Carlo estimate of the same quantity with a delta-method
 * standard error. */
PREFLAB_API int preflab_mutual_info_mc(double p, double eps, double alpha, double beta,
                                       int64_t n_samples, uint64_t seed, double* out_estimate,
                                       double* out_std_err);

/* CSV "gamma,cmi,entropy_term_1,entropy_term_2" over n_points moderate-
 * channel settings beta = 0.5+gamma, alpha = 0.5-gamma, gamma in [0, 0.5]. */
PREFLAB_API int preflab_mi_sweep_csv(double p, double eps, int32_t n_points, char** out_csv);

/* Generalization bounds with and without the rationale information terms. */
PREFLAB_API int preflab_gen_bounds(double sigma, double n, double i_theta_z, double delta,
                                   double eta1, double i_theta_s_z, double* out_with_rationale,
                                   double* out_without_rationale);

/* CSV "n,bound_ra,bound_un" over explicit sample counts. */
PREFLAB_API int preflab_bounds_csv(double sigma, double i_theta_z, double delta, double eta1,
                                   double i_theta_s_z, const double* sample_counts,
                                   int32_t n_counts, char** out_csv);

/* Fano-style lower bound on the Bayes error of recovering Z (clamped at 0;
 * out_raw gets the unclamped value, either pointer may be NULL). */
PREFLAB_API int preflab_fano_lower_bound(double h_z, double i_r_theta, double i_z_theta_given_r,
                                         double err_tol, uint64_t n_outcomes, double* out,
                                         double* out_raw);

/* Matching upper bound (clamped into [0, 1/2]). */
PREFLAB_API int preflab_err_upper_bound(double h_z, double i_r_theta, double h_r_given_z,
                                        double* out, double* out_raw);

/* ---- Pairwise judging through the HTTP client --------------------------- */

PREFLAB_API int preflab_judge_pair(const char* config_json, const char* history,
                                   const char* response1, const char* response2,
                                   int32_t n_queries, int shuffle, uint64_t seed,
                                   int32_t* out_votes1, int32_t* out_votes2,
                                   int32_t* out_abstains);

#ifdef __cplusplus
}
#endif

#endif /* PREFLAB_PREFLAB_H_ */
