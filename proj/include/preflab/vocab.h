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

#ifndef PREFLAB_VOCAB_H_
#define PREFLAB_VOCAB_H_

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace preflab::policy {

using TokenId = int32_t;

// Two tokenization regimes share one vocabulary type:
//  - kChar: every token is a single character; text maps 1:1 onto ids.
//  - kSymbol: tokens are whitespace-delimited words; detokenization joins
//    with single spaces (so '\n' in source text normalizes to ' ').
enum class VocabKind { kChar = 0, kSymbol };

class Vocab {
 public:
  Vocab() = default;

  // tokens must be distinct and non-empty; ids follow list order. BOS/EOS are
  // appended as reserved entries "<bos>"/"<eos>" (char vocabs included).
  static Vocab Make(VocabKind kind, const std::vector<std::string>& tokens);

  // Char vocab over an explicit character inventory.
  static Vocab MakeChar(const std::string& inventory);

  // Printable ASCII plus '\n' and '\t'; enough for plain-text corpora and
  // the rationale context template.
  static Vocab MakeCharAscii();

  VocabKind kind() const { return kind_; }
  TokenId bos() const { return bos_; }
  TokenId eos() const { return eos_; }
  int32_t size() const { return static_cast<int32_t>(tokens_.size()); }
  const std::string& token(TokenId id) const;
  bool has(const std::string& token) const { return index_.count(token) > 0; }
  TokenId id(const std::string& token) const;

  // Errors with tokenization when a character/word is not in the vocabulary.
  std::vector<TokenId> Tokenize(const std::string& text) const;
  std::string Detokenize(const std::vector<TokenId>& ids) const;

  bool operator==(const Vocab& other) const {
    return kind_ == other.kind_ && tokens_ == other.tokens_;
  }

 private:
  VocabKind kind_ = VocabKind::kChar;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
  TokenId bos_ = -1;
  TokenId eos_ = -1;
};

}  // namespace preflab::policy

#endif  // PREFLAB_VOCAB_H_
