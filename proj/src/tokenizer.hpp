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

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace emolab {

namespace token_id {
inline constexpr std::int32_t kPad = 0;
inline constexpr std::int32_t kUnk = 1;
inline constexpr std::int32_t kCls = 2;
inline constexpr std::int32_t kSep = 3;
inline constexpr std::int32_t kMask = 4;
inline constexpr std::int32_t kNumReserved = 5;
}  // namespace token_id

/// Word-level vocabulary. Ids 0..4 are [PAD] [UNK] [CLS] [SEP] [MASK].
class Vocabulary {
 public:
  Vocabulary();
  /// Tokens in id order, excluding the reserved ones.
  explicit Vocabulary(const std::vector<std::string>& words);

  std::int32_t id(std::string_view token) const;  // kUnk when absent
  bool contains(std::string_view token) const;
  const std::string& token(std::int32_t id) const;
  std::size_t size() const { return tokens_.size(); }

  /// JSON array of all tokens (reserved ones included) in id order.
  std::string to_json() const;
  static Vocabulary from_json(std::string_view json_text);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::int32_t> ids_;
};

/// Frequency-ranked whitespace vocabulary; ties broken lexicographically.
/// max_size counts the reserved tokens.
Vocabulary build_vocab(const std::vector<std::string>& corpus, std::size_t min_count, std::size_t max_size);

struct TokenSequence {
  std::vector<std::int32_t> ids;
  std::vector<std::uint8_t> mask;

  std::size_t length() const { return ids.size(); }
  /// Number of positions with mask = 1 (CLS and SEP included).
  std::size_t real_length() const;
  bool operator==(const TokenSequence&) const = default;
};

/// [CLS] + tokens + [SEP], truncating trailing tokens, padded to max_len.
TokenSequence encode(std::string_view text, const Vocabulary& vocab, std::size_t max_len);

/// Tokens of a sequence with PAD/CLS/SEP removed. Throws UnknownId.
std::vector<std::string> decode(std::span<const std::int32_t> ids, const Vocabulary& vocab);

/// Throws InvalidArgument if the sequence breaks the encode() layout.
void validate_sequence(const TokenSequence& seq);

}  // namespace emolab
