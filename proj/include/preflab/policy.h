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

#ifndef PREFLAB_POLICY_H_
#define PREFLAB_POLICY_H_

#include <cstdint>
#include <string>
#include <vector>

#include "preflab/vocab.h"

namespace preflab::policy {

enum class ArchKind { kNgram = 0, kDecoder = 1 };

// Order-k table model: next-token logits indexed by the previous (order-1)
// tokens, order in 1..3. Positions before the sequence start pad with BOS.
struct NgramArch {
  int32_t order = 1;
};

// Tiny pre-LN causal transformer: learned positional embeddings, multi-head
// attention, ReLU MLP (hidden 4*dim), untied unembedding.
struct DecoderArch {
  int32_t dim = 16;
  int32_t heads = 2;
  int32_t layers = 1;
  int32_t context_len = 64;
};

struct PolicyArch {
  ArchKind kind = ArchKind::kNgram;
  NgramArch ngram;
  DecoderArch decoder;

  static PolicyArch Ngram(int32_t order) {
    PolicyArch a;
    a.kind = ArchKind::kNgram;
    a.ngram.order = order;
    return a;
  }
  static PolicyArch Decoder(int32_t dim, int32_t heads, int32_t layers, int32_t context_len) {
    PolicyArch a;
    a.kind = ArchKind::kDecoder;
    a.decoder = {dim, heads, layers, context_len};
    return a;
  }
};

using TokenIds = std::vector<TokenId>;

// Autoregressive policy with a flat parameter vector and exact reverse-mode
// gradients of teacher-forced sequence log-probabilities (nats).
class PolicyModel {
 public:
  PolicyModel() = default;

  // All-zero parameters: exactly uniform next-token distributions.
  static PolicyModel Uniform(const PolicyArch& arch, const Vocab& vocab);

  // Gaussian(0, 0.02) weights, zero biases, unit layer-norm gains.
  static PolicyModel Random(const PolicyArch& arch, const Vocab& vocab, uint64_t seed);

  const PolicyArch& arch() const { return arch_; }
  const Vocab& vocab() const { return vocab_; }
  size_t num_params() const { return params_.size(); }
  const std::vector<double>& params() const { return params_; }
  std::vector<double>& mutable_params() { return params_; }

  // log pi(response | context), teacher forced, summed over response tokens.
  double SequenceLogprob(const TokenIds& context, const TokenIds& response) const;

  // Accumulates scale * d SequenceLogprob / d params into *grad
  // (grad must have num_params() entries).
  void SequenceLogprobGrad(const TokenIds& context, const TokenIds& response, double scale,
                           std::vector<double>* grad) const;

  // Full next-token log-distribution given the prefix that follows BOS.
  std::vector<double> NextTokenLogprobs(const TokenIds& prefix) const;

  // Ancestral sampling at the given temperature; stops at EOS (excluded from
  // the result) or after max_len tokens. Deterministic in (inputs, seed).
  TokenIds Sample(const TokenIds& context, int32_t max_len, double temperature,
                  uint64_t seed) const;

  // Versioned binary checkpoint: magic, format version, arch + vocab header,
  // little-endian f64 parameters. Load restores bit-identical parameters.
  void Save(const std::string& path) const;
  static PolicyModel Load(const std::string& path);

  std::string ArchDescription() const;

 private:
  PolicyArch arch_;
  Vocab vocab_;
  std::vector<double> params_;

  friend PolicyModel MakeModelForTest(const PolicyArch&, const Vocab&, std::vector<double>);
};

// Validates arch/vocab agreement and returns the parameter count.
size_t ParamCount(const PolicyArch& arch, int32_t vocab_size);

}  // namespace preflab::policy

#endif  // PREFLAB_POLICY_H_
