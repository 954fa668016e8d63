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

#include "preflab/policy.h"

#include <cmath>
#include <cstring>
#include <fstream>

#include "json.hpp"
#include "policy_internal.h"
#include "preflab/error.h"
#include "preflab/rng.h"

namespace preflab::policy {

namespace {

using nlohmann::json;

constexpr char kMagic[4] = {'P', 'F', 'L', 'B'};
constexpr uint32_t kFormatVersion = 1;

int64_t Ipow(int64_t base, int32_t exp) {
  int64_t out = 1;
  for (int32_t i = 0; i < exp; ++i) out *= base;
  return out;
}

void ValidateArch(const PolicyArch& arch, int32_t vocab_size) {
  if (vocab_size < 3) {
    Fail(ErrorCode::kInvalidArgument, "vocabulary too small for a policy model");
  }
  if (arch.kind == ArchKind::kNgram) {
    if (arch.ngram.order < 1 || arch.ngram.order > 3) {
      Fail(ErrorCode::kInvalidArgument, "ngram order must lie in 1..3");
    }
  } else {
    const DecoderArch& d = arch.decoder;
    if (d.dim < 1 || d.dim > 64) {
      Fail(ErrorCode::kInvalidArgument, "decoder dim must lie in 1..64");
    }
    if (d.layers < 1 || d.layers > 2) {
      Fail(ErrorCode::kInvalidArgument, "decoder layers must lie in 1..2");
    }
    if (d.heads < 1 || d.dim % d.heads != 0) {
      Fail(ErrorCode::kInvalidArgument, "decoder heads must divide dim");
    }
    if (d.context_len < 2) {
      Fail(ErrorCode::kInvalidArgument, "decoder context_len must be at least 2");
    }
  }
}

void CheckTokens(const TokenIds& ids, int32_t vocab_size, const char* what) {
  for (TokenId t : ids) {
    if (t < 0 || t >= vocab_size) {
      Fail(ErrorCode::kInvalidArgument, std::string(what) + " token id " + std::to_string(t) +
                                            " out of range [0," + std::to_string(vocab_size) + ")");
    }
  }
}

void AppendU32(std::string* out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out->push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void AppendU64(std::string* out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out->push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

}  // namespace

size_t ParamCount(const PolicyArch& arch, int32_t vocab_size) {
  ValidateArch(arch, vocab_size);
  if (arch.kind == ArchKind::kNgram) {
    return static_cast<size_t>(Ipow(vocab_size, arch.ngram.order - 1)) *
           static_cast<size_t>(vocab_size);
  }
  return internal::DecoderParamCount(arch.decoder, vocab_size);
}

PolicyModel PolicyModel::Uniform(const PolicyArch& arch, const Vocab& vocab) {
  PolicyModel m;
  m.arch_ = arch;
  m.vocab_ = vocab;
  m.params_.assign(ParamCount(arch, vocab.size()), 0.0);
  return m;
}

PolicyModel PolicyModel::Random(const PolicyArch& arch, const Vocab& vocab, uint64_t seed) {
  PolicyModel m = Uniform(arch, vocab);
  if (arch.kind == ArchKind::kNgram) {
    Rng rng(seed);
    for (double& p : m.params_) p = 0.02 * rng.NextGaussian();
  } else {
    internal::DecoderRandomInit(arch.decoder, vocab.size(), seed, &m.params_);
  }
  return m;
}

namespace {

std::vector<TokenId> BuildSeq(const Vocab& vocab, const TokenIds& context,
                              const TokenIds& response) {
  std::vector<TokenId> seq;
  seq.reserve(1 + context.size() + response.size());
  seq.push_back(vocab.bos());
  seq.insert(seq.end(), context.begin(), context.end());
  seq.insert(seq.end(), response.begin(), response.end());
  return seq;
}

}  // namespace

double PolicyModel::SequenceLogprob(const TokenIds& context, const TokenIds& response) const {
  CheckTokens(context, vocab_.size(), "context");
  CheckTokens(response, vocab_.size(), "response");
  if (response.empty()) return 0.0;
  std::vector<TokenId> seq = BuildSeq(vocab_, context, response);
  size_t first_pred = 1 + context.size();
  if (arch_.kind == ArchKind::kNgram) {
    return internal::NgramLogprob(arch_.ngram, vocab_.size(), params_, seq, first_pred);
  }
  if (static_cast<int32_t>(seq.size()) > arch_.decoder.context_len) {
    Fail(ErrorCode::kInvalidArgument,
         "sequence of " + std::to_string(seq.size()) + " tokens exceeds context_len " +
             std::to_string(arch_.decoder.context_len));
  }
  return internal::DecoderLogprob(arch_.decoder, vocab_.size(), params_, seq, first_pred);
}

void PolicyModel::SequenceLogprobGrad(const TokenIds& context, const TokenIds& response,
                                      double scale, std::vector<double>* grad) const {
  if (grad == nullptr || grad->size() != params_.size()) {
    Fail(ErrorCode::kInvalidArgument, "gradient buffer has the wrong size");
  }
  CheckTokens(context, vocab_.size(), "context");
  CheckTokens(response, vocab_.size(), "response");
  if (response.empty()) return;
  std::vector<TokenId> seq = BuildSeq(vocab_, context, response);
  size_t first_pred = 1 + context.size();
  if (arch_.kind == ArchKind::kNgram) {
    internal::NgramLogprobGrad(arch_.ngram, vocab_.size(), params_, seq, first_pred, scale, grad);
    return;
  }
  if (static_cast<int32_t>(seq.size()) > arch_.decoder.context_len) {
    Fail(ErrorCode::kInvalidArgument,
         "sequence of " + std::to_string(seq.size()) + " tokens exceeds context_len " +
             std::to_string(arch_.decoder.context_len));
  }
  internal::DecoderLogprobGrad(arch_.decoder, vocab_.size(), params_, seq, first_pred, scale, grad);
}

std::vector<double> PolicyModel::NextTokenLogprobs(const TokenIds& prefix) const {
  CheckTokens(prefix, vocab_.size(), "prefix");
  std::vector<TokenId> seq;
  seq.reserve(prefix.size() + 1);
  seq.push_back(vocab_.bos());
  seq.insert(seq.end(), prefix.begin(), prefix.end());
  std::vector<double> logits;
  if (arch_.kind == ArchKind::kNgram) {
    internal::NgramNextLogits(arch_.ngram, vocab_.size(), params_, seq, &logits);
  } else {
    if (static_cast<int32_t>(seq.size()) >= arch_.decoder.context_len) {
      Fail(ErrorCode::kInvalidArgument, "prefix fills the decoder context window");
    }
    internal::DecoderNextLogits(arch_.decoder, vocab_.size(), params_, seq, &logits);
  }
  double lse = internal::LogSumExp(logits.data(), vocab_.size());
  for (double& l : logits) l -= lse;
  return logits;
}

TokenIds PolicyModel::Sample(const TokenIds& context, int32_t max_len, double temperature,
                             uint64_t seed) const {
  if (max_len < 1) {
    Fail(ErrorCode::kInvalidArgument, "max_len must be at least 1");
  }
  if (!(temperature > 0.0)) {
    Fail(ErrorCode::kInvalidArgument, "temperature must be positive");
  }
  CheckTokens(context, vocab_.size(), "context");
  if (arch_.kind == ArchKind::kDecoder &&
      static_cast<int32_t>(1 + context.size()) + max_len > arch_.decoder.context_len) {
    Fail(ErrorCode::kInvalidArgument, "context plus max_len exceeds the decoder context window");
  }
  Rng rng(seed);
  std::vector<TokenId> seq;
  seq.reserve(1 + context.size() + max_len);
  seq.push_back(vocab_.bos());
  seq.insert(seq.end(), context.begin(), context.end());
  TokenIds out;
  std::vector<double> logits;
  int32_t v = vocab_.size();
  std::vector<double> probs(v);
  for (int32_t step = 0; step < max_len; ++step) {
    if (arch_.kind == ArchKind::kNgram) {
      internal::NgramNextLogits(arch_.ngram, v, params_, seq, &logits);
    } else {
      internal::DecoderNextLogits(arch_.decoder, v, params_, seq, &logits);
    }
    double max_logit = logits[0];
    for (int32_t i = 1; i < v; ++i) max_logit = std::max(max_logit, logits[i]);
    double total = 0.0;
    for (int32_t i = 0; i < v; ++i) {
      probs[i] = std::exp((logits[i] - max_logit) / temperature);
      total += probs[i];
    }
    double u = rng.NextUnit() * total;
    double cum = 0.0;
    TokenId pick = v - 1;
    for (int32_t i = 0; i < v; ++i) {
      cum += probs[i];
      if (u < cum) {
        pick = i;
        break;
      }
    }
    if (pick == vocab_.eos()) break;
    out.push_back(pick);
    seq.push_back(pick);
  }
  return out;
}

std::string PolicyModel::ArchDescription() const {
  if (arch_.kind == ArchKind::kNgram) {
    return "ngram(order=" + std::to_string(arch_.ngram.order) + ")";
  }
  const DecoderArch& d = arch_.decoder;
  return "micro_decoder(dim=" + std::to_string(d.dim) + ",heads=" + std::to_string(d.heads) +
         ",layers=" + std::to_string(d.layers) + ",context_len=" + std::to_string(d.context_len) +
         ")";
}

void PolicyModel::Save(const std::string& path) const {
  json header;
  if (arch_.kind == ArchKind::kNgram) {
    header["arch"] = {{"kind", "ngram"}, {"order", arch_.ngram.order}};
  } else {
    header["arch"] = {{"kind", "micro_decoder"},
                      {"dim", arch_.decoder.dim},
                      {"heads", arch_.decoder.heads},
                      {"layers", arch_.decoder.layers},
                      {"context_len", arch_.decoder.context_len}};
  }
  std::vector<std::string> tokens;
  for (TokenId i = 0; i + 2 < vocab_.size(); ++i) tokens.push_back(vocab_.token(i));
  header["vocab"] = {{"kind", vocab_.kind() == VocabKind::kChar ? "char" : "symbol"},
                     {"tokens", tokens}};
  std::string header_bytes = header.dump();

  std::string blob;
  blob.append(kMagic, 4);
  AppendU32(&blob, kFormatVersion);
  AppendU64(&blob, header_bytes.size());
  blob += header_bytes;
  AppendU64(&blob, params_.size());
  for (double p : params_) {
    uint64_t bits;
    std::memcpy(&bits, &p, 8);
    AppendU64(&blob, bits);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    Fail(ErrorCode::kIo, "cannot open \"" + path + "\" for writing");
  }
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!out) {
    Fail(ErrorCode::kIo, "write to \"" + path + "\" failed");
  }
}

namespace {

uint32_t TakeU32(const std::string& s, size_t* pos) {
  if (*pos + 4 > s.size()) {
    Fail(ErrorCode::kCorruptCheckpoint, "checkpoint truncated");
  }
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<uint32_t>(static_cast<unsigned char>(s[*pos + i])) << (8 * i);
  }
  *pos += 4;
  return v;
}

uint64_t TakeU64(const std::string& s, size_t* pos) {
  if (*pos + 8 > s.size()) {
    Fail(ErrorCode::kCorruptCheckpoint, "checkpoint truncated");
  }
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<uint64_t>(static_cast<unsigned char>(s[*pos + i])) << (8 * i);
  }
  *pos += 8;
  return v;
}

}  // namespace

PolicyModel PolicyModel::Load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    Fail(ErrorCode::kIo, "cannot open \"" + path + "\" for reading");
  }
  std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  size_t pos = 0;
  if (blob.size() < 4 || std::memcmp(blob.data(), kMagic, 4) != 0) {
    Fail(ErrorCode::kCorruptCheckpoint, "bad checkpoint magic in \"" + path + "\"");
  }
  pos = 4;
  uint32_t version = TakeU32(blob, &pos);
  if (version != kFormatVersion) {
    Fail(ErrorCode::kVersionMismatch, "checkpoint format version " + std::to_string(version) +
                                          " unsupported (expected " +
                                          std::to_string(kFormatVersion) + ")");
  }
  uint64_t header_len = TakeU64(blob, &pos);
  if (pos + header_len > blob.size()) {
    Fail(ErrorCode::kCorruptCheckpoint, "checkpoint truncated inside header");
  }
  json header;
  try {
    header = json::parse(blob.substr(pos, header_len));
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kCorruptCheckpoint, std::string("checkpoint header is not JSON: ") + e.what());
  }
  pos += header_len;

  PolicyArch arch;
  try {
    std::string kind = header.at("arch").at("kind").get<std::string>();
    if (kind == "ngram") {
      arch = PolicyArch::Ngram(header.at("arch").at("order").get<int32_t>());
    } else if (kind == "micro_decoder") {
      arch = PolicyArch::Decoder(
          header.at("arch").at("dim").get<int32_t>(), header.at("arch").at("heads").get<int32_t>(),
          header.at("arch").at("layers").get<int32_t>(),
          header.at("arch").at("context_len").get<int32_t>());
    } else {
      Fail(ErrorCode::kCorruptCheckpoint, "unknown arch kind \"" + kind + "\"");
    }
    std::string vkind = header.at("vocab").at("kind").get<std::string>();
    std::vector<std::string> tokens =
        header.at("vocab").at("tokens").get<std::vector<std::string>>();
    Vocab vocab = Vocab::Make(vkind == "char" ? VocabKind::kChar : VocabKind::kSymbol, tokens);

    uint64_t n_params = TakeU64(blob, &pos);
    if (n_params != ParamCount(arch, vocab.size())) {
      Fail(ErrorCode::kCorruptCheckpoint,
           "checkpoint parameter count " + std::to_string(n_params) + " does not match arch");
    }
    if (pos + 8 * n_params != blob.size()) {
      Fail(ErrorCode::kCorruptCheckpoint, "checkpoint payload size mismatch");
    }
    PolicyModel m;
    m.arch_ = arch;
    m.vocab_ = vocab;
    m.params_.resize(n_params);
    for (uint64_t i = 0; i < n_params; ++i) {
      uint64_t bits = TakeU64(blob, &pos);
      std::memcpy(&m.params_[i], &bits, 8);
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kCorruptCheckpoint, std::string("checkpoint header malformed: ") + e.what());
  }
}

}  // namespace preflab::policy
