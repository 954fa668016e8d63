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

#include "preflab/vocab.h"

#include "preflab/error.h"

namespace preflab::policy {

Vocab Vocab::Make(VocabKind kind, const std::vector<std::string>& tokens) {
  Vocab v;
  v.kind_ = kind;
  for (const std::string& t : tokens) {
    if (t.empty()) {
      Fail(ErrorCode::kInvalidArgument, "vocabulary tokens must be non-empty");
    }
    if (kind == VocabKind::kChar && t.size() != 1) {
      Fail(ErrorCode::kInvalidArgument, "char vocabulary tokens must be single characters");
    }
    if (v.index_.count(t)) {
      Fail(ErrorCode::kInvalidArgument, "duplicate vocabulary token \"" + t + "\"");
    }
    v.index_[t] = static_cast<TokenId>(v.tokens_.size());
    v.tokens_.push_back(t);
  }
  auto reserve = [&v](const std::string& name) {
    if (v.index_.count(name)) {
      Fail(ErrorCode::kInvalidArgument, "token \"" + name + "\" collides with a reserved entry");
    }
    TokenId id = static_cast<TokenId>(v.tokens_.size());
    v.index_[name] = id;
    v.tokens_.push_back(name);
    return id;
  };
  v.bos_ = reserve("<bos>");
  v.eos_ = reserve("<eos>");
  return v;
}

Vocab Vocab::MakeChar(const std::string& inventory) {
  std::vector<std::string> tokens;
  tokens.reserve(inventory.size());
  for (char c : inventory) tokens.push_back(std::string(1, c));
  return Make(VocabKind::kChar, tokens);
}

Vocab Vocab::MakeCharAscii() {
  std::string inventory;
  for (char c = 32; c < 127; ++c) inventory.push_back(c);
  inventory.push_back('\n');
  inventory.push_back('\t');
  return MakeChar(inventory);
}

const std::string& Vocab::token(TokenId id) const {
  if (id < 0 || id >= size()) {
    Fail(ErrorCode::kInvalidArgument, "token id " + std::to_string(id) + " out of range");
  }
  return tokens_[static_cast<size_t>(id)];
}

TokenId Vocab::id(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) {
    Fail(ErrorCode::kTokenization, "token \"" + token + "\" not in vocabulary");
  }
  return it->second;
}

std::vector<TokenId> Vocab::Tokenize(const std::string& text) const {
  std::vector<TokenId> ids;
  if (kind_ == VocabKind::kChar) {
    ids.reserve(text.size());
    for (char c : text) {
      auto it = index_.find(std::string(1, c));
      if (it == index_.end()) {
        Fail(ErrorCode::kTokenization,
             "character 0x" + std::to_string(static_cast<int>(static_cast<unsigned char>(c))) +
                 " not in vocabulary");
      }
      ids.push_back(it->second);
    }
    return ids;
  }
  size_t pos = 0;
  while (pos < text.size()) {
    while (pos < text.size() &&
           (text[pos] == ' ' || text[pos] == '\n' || text[pos] == '\t' || text[pos] == '\r')) {
      ++pos;
    }
    size_t end = pos;
    while (end < text.size() && text[end] != ' ' && text[end] != '\n' && text[end] != '\t' &&
           text[end] != '\r') {
      ++end;
    }
    if (end > pos) {
      auto it = index_.find(text.substr(pos, end - pos));
      if (it == index_.end()) {
        Fail(ErrorCode::kTokenization,
             "word \"" + text.substr(pos, end - pos) + "\" not in vocabulary");
      }
      ids.push_back(it->second);
    }
    pos = end;
  }
  return ids;
}

std::string Vocab::Detokenize(const std::vector<TokenId>& ids) const {
  std::string out;
  for (size_t i = 0; i < ids.size(); ++i) {
    const std::string& t = token(ids[i]);
    if (kind_ == VocabKind::kSymbol && i > 0) out += ' ';
    out += t;
  }
  return out;
}

}  // namespace preflab::policy
