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

#ifndef PREFLAB_SRC_POLICY_INTERNAL_H_
#define PREFLAB_SRC_POLICY_INTERNAL_H_

#include <cstdint>
#include <vector>

#include "preflab/policy.h"

namespace preflab::policy::internal {

// Both backends consume the full token stream `seq` = BOS + context +
// response and the index `first_pred` of the first predicted position, i.e.
// predictions are made for seq[first_pred..seq.size()-1] from their prefixes.

double NgramLogprob(const NgramArch& arch, int32_t vocab_size, const std::vector<double>& params,
                    const std::vector<TokenId>& seq, size_t first_pred);
void NgramLogprobGrad(const NgramArch& arch, int32_t vocab_size, const std::vector<double>& params,
                      const std::vector<TokenId>& seq, size_t first_pred, double scale,
                      std::vector<double>* grad);
void NgramNextLogits(const NgramArch& arch, int32_t vocab_size, const std::vector<double>& params,
                     const std::vector<TokenId>& seq, std::vector<double>* logits);

double DecoderLogprob(const DecoderArch& arch, int32_t vocab_size,
                      const std::vector<double>& params, const std::vector<TokenId>& seq,
                      size_t first_pred);
void DecoderLogprobGrad(const DecoderArch& arch, int32_t vocab_size,
                        const std::vector<double>& params, const std::vector<TokenId>& seq,
                        size_t first_pred, double scale, std::vector<double>* grad);
void DecoderNextLogits(const DecoderArch& arch, int32_t vocab_size,
                       const std::vector<double>& params, const std::vector<TokenId>& seq,
                       std::vector<double>* logits);
size_t DecoderParamCount(const DecoderArch& arch, int32_t vocab_size);
void DecoderRandomInit(const DecoderArch& arch, int32_t vocab_size, uint64_t seed,
                       std::vector<double>* params);

// log softmax denominator: log sum exp with max subtraction.
double LogSumExp(const double* logits, int32_t n);

}  // namespace preflab::policy::internal

#endif  // PREFLAB_SRC_POLICY_INTERNAL_H_
