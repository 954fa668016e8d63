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

#include <cmath>

#include "policy_internal.h"
#include "preflab/error.h"

namespace preflab::policy::internal {

double LogSumExp(const double* logits, int32_t n) {
  double m = logits[0];
  for (int32_t i = 1; i < n; ++i) m = std::max(m, logits[i]);
  double s = 0.0;
  for (int32_t i = 0; i < n; ++i) s += std::exp(logits[i] - m);
  return m + std::log(s);
}

namespace {

// Row of the logit table conditioning on the (order-1) tokens that precede
// position `pos` in seq; out-of-range history pads with seq[0] (BOS).
size_t RowIndex(const NgramArch& arch, int32_t v, const std::vector<TokenId>& seq, size_t pos) {
  size_t row = 0;
  for (int32_t k = arch.order - 1; k >= 1; --k) {
    // history offset k..1 before pos
    TokenId t = pos >= static_cast<size_t>(k) ? seq[pos - k] : seq[0];
    row = row * static_cast<size_t>(v) + static_cast<size_t>(t);
  }
  return row;
}

}  // namespace

double NgramLogprob(const NgramArch& arch, int32_t v, const std::vector<double>& params,
                    const std::vector<TokenId>& seq, size_t first_pred) {
  double total = 0.0;
  for (size_t pos = first_pred; pos < seq.size(); ++pos) {
    size_t row = RowIndex(arch, v, seq, pos);
    const double* logits = params.data() + row * static_cast<size_t>(v);
    total += logits[seq[pos]] - LogSumExp(logits, v);
  }
  return total;
}

void NgramLogprobGrad(const NgramArch& arch, int32_t v, const std::vector<double>& params,
                      const std::vector<TokenId>& seq, size_t first_pred, double scale,
                      std::vector<double>* grad) {
  for (size_t pos = first_pred; pos < seq.size(); ++pos) {
    size_t row = RowIndex(arch, v, seq, pos);
    const double* logits = params.data() + row * static_cast<size_t>(v);
    double* g = grad->data() + row * static_cast<size_t>(v);
    double lse = LogSumExp(logits, v);
    for (int32_t i = 0; i < v; ++i) {
      double softmax = std::exp(logits[i] - lse);
      g[i] -= scale * softmax;
    }
    g[seq[pos]] += scale;
  }
}

void NgramNextLogits(const NgramArch& arch, int32_t v, const std::vector<double>& params,
                     const std::vector<TokenId>& seq, std::vector<double>* logits) {
  size_t row = RowIndex(arch, v, seq, seq.size());
  logits->assign(params.begin() + static_cast<long>(row * static_cast<size_t>(v)),
                 params.begin() + static_cast<long>((row + 1) * static_cast<size_t>(v)));
}

}  // namespace preflab::policy::internal
