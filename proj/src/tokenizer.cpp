// ----------------------------------------------------------------------------
// Copyright 2026 The emolab Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ----------------------------------------------------------------------------

#include "tokenizer.hpp"

#include <algorithm>
#include <map>

#include <nlohmann/json.hpp>

#include "common.hpp"

namespace emolab {

namespace {
const std::vector<std::string> kReserved = {"[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"};
}

Vocabulary::Vocabulary() : Vocabulary(std::vector<std::string>{}) {}

Vocabulary::Vocabulary(const std::vector<std::string>& words) : tokens_(kReserved) {
  for (std::size_t i = 0; i < tokens_.size(); ++i) ids_[tokens_[i]] = static_cast<std::int32_t>(i);
  for (const auto& w : words) {
    if (w.empty()) fail(ErrorCode::InvalidArgument, "empty vocabulary token");
    if (!ids_.emplace(w, static_cast<std::int32_t>(tokens_.size())).second) {
      fail(ErrorCode::InvalidArgument, "duplicate vocabulary token '" + w + "'");
    }
    tokens_.push_back(w);
  }
}

std::int32_t Vocabulary::id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? token_id::kUnk : it->second;
}

bool Vocabulary::contains(std::string_view token) const { return ids_.count(std::string(token)) > 0; }

const std::string& Vocabulary::token(std::int32_t id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    fail(ErrorCode::UnknownId, "token id " + std::to_string(id) + " outside vocabulary of " +
                                   std::to_string(tokens_.size()));
  }
  return tokens_[static_cast<std::size_t>(id)];
}

std::string Vocabulary::to_json() const { return nlohmann::json(tokens_).dump() + "\n"; }

Vocabulary Vocabulary::from_json(std::string_view json_text) {
  std::vector<std::string> all;
  try {
    all = nlohmann::json::parse(json_text).get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("vocabulary: ") + e.what());
  }
  if (all.size() < kReserved.size() || !std::equal(kReserved.begin(), kReserved.end(), all.begin())) {
    fail(ErrorCode::Parse, "vocabulary must start with the reserved tokens");
  }
  return Vocabulary(std::vector<std::string>(all.begin() + static_cast<std::ptrdiff_t>(kReserved.size()), all.end()));
}

Vocabulary build_vocab(const std::vector<std::string>& corpus, std::size_t min_count, std::size_t max_size) {
  if (min_count < 1) fail(ErrorCode::InvalidArgument, "min_count must be at least 1");
  if (max_size < kReserved.size() + 1) fail(ErrorCode::InvalidArgument, "max_size must be at least 6");
  std::map<std::string, std::size_t> freq;
  for (const auto& line : corpus) {
    for (auto& tok : split_whitespace(line)) ++freq[std::move(tok)];
  }
  for (const auto& r : kReserved) freq.erase(r);
  std::vector<std::pair<std::string, std::size_t>> ranked;
  for (auto& [tok, n] : freq) {
    if (n >= min_count) ranked.emplace_back(tok, n);
  }
  // std::map iteration is already lexicographic; stable sort keeps that for ties.
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  const std::size_t keep = std::min(ranked.size(), max_size - kReserved.size());
  std::vector<std::string> words;
  words.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) words.push_back(ranked[i].first);
  return Vocabulary(words);
}

std::size_t TokenSequence::real_length() const {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

TokenSequence encode(std::string_view text, const Vocabulary& vocab, std::size_t max_len) {
  if (max_len < 3) fail(ErrorCode::InvalidArgument, "max_len must be at least 3");
  const auto tokens = split_whitespace(text);
  const std::size_t content = std::min(tokens.size(), max_len - 2);
  TokenSequence seq;
  seq.ids.assign(max_len, token_id::kPad);
  seq.mask.assign(max_len, 0);
  seq.ids[0] = token_id::kCls;
  for (std::size_t i = 0; i < content; ++i) {
    // Literal "[SEP]" etc. in user text must not forge structure.
    const std::int32_t id = vocab.id(tokens[i]);
    seq.ids[i + 1] = id < token_id::kNumReserved ? token_id::kUnk : id;
  }
  seq.ids[content + 1] = token_id::kSep;
  std::fill_n(seq.mask.begin(), content + 2, std::uint8_t{1});
  return seq;
}

std::vector<std::string> decode(std::span<const std::int32_t> ids, const Vocabulary& vocab) {
  std::vector<std::string> out;
  for (auto id : ids) {
    const std::string& tok = vocab.token(id);
    if (id == token_id::kPad || id == token_id::kCls || id == token_id::kSep) continue;
    out.push_back(tok);
  }
  return out;
}

void validate_sequence(const TokenSequence& seq) {
  auto bad = [](const std::string& why) { fail(ErrorCode::InvalidArgument, "malformed token sequence: " + why); };
  if (seq.ids.size() != seq.mask.size()) bad("ids/mask length differ");
  if (seq.ids.size() < 2 || seq.ids[0] != token_id::kCls || !seq.mask[0]) bad("must start with [CLS]");
  const std::size_t real = seq.real_length();
  for (std::size_t i = 0; i < seq.ids.size(); ++i) {
    if ((i < real) != (seq.mask[i] == 1)) bad("mask is not a prefix of ones");
    if (i >= real && seq.ids[i] != token_id::kPad) bad("padding positions must hold [PAD]");
  }
  if (real < 2 || seq.ids[real - 1] != token_id::kSep) bad("last real position must be [SEP]");
  if (std::count(seq.ids.begin(), seq.ids.begin() + static_cast<std::ptrdiff_t>(real), token_id::kSep) != 1) {
    bad("exactly one [SEP] required");
  }
}

}  // namespace emolab
