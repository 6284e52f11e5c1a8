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

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace emolab {

/// The four circumplex quadrants. The numeric order is the canonical order
/// used for serialisation, tie-breaking and class ids.
enum class EmotionClass : std::int32_t {
  HappyActive = 0,
  HappyInactive = 1,
  UnhappyActive = 2,
  UnhappyInactive = 3,
};

inline constexpr std::size_t kNumEmotionClasses = 4;
inline constexpr std::array<EmotionClass, kNumEmotionClasses> kAllEmotionClasses = {
    EmotionClass::HappyActive, EmotionClass::HappyInactive, EmotionClass::UnhappyActive,
    EmotionClass::UnhappyInactive};

std::string_view to_string(EmotionClass c);
/// Accepts the serialised names ("happy_active", ...).
EmotionClass parse_emotion_class(std::string_view name);
inline std::int32_t class_index(EmotionClass c) { return static_cast<std::int32_t>(c); }

struct RawMessage {
  std::string id;
  std::string text;
};

class HashtagLexicon {
 public:
  HashtagLexicon() = default;
  /// Throws InvalidSpec when sets overlap or an entry is not a lowercase,
  /// whitespace-free tag.
  explicit HashtagLexicon(std::array<std::set<std::string>, kNumEmotionClasses> tags);

  static HashtagLexicon from_json(std::string_view json_text);
  std::string to_json() const;

  const std::set<std::string>& tags(EmotionClass c) const { return tags_[class_index(c)]; }
  std::optional<EmotionClass> lookup(std::string_view tag) const;

 private:
  std::array<std::set<std::string>, kNumEmotionClasses> tags_;
};

struct LabeledMessage {
  std::string id;
  std::string text;
  EmotionClass label;

  bool operator==(const LabeledMessage&) const = default;
};

using ClassCounts = std::array<std::size_t, kNumEmotionClasses>;

struct Dataset {
  std::vector<LabeledMessage> items;

  std::size_t size() const { return items.size(); }
  bool empty() const { return items.empty(); }
  ClassCounts counts() const;
};

/// Why messages were dropped while building a dataset.
struct BuildStats {
  std::size_t input = 0;
  std::size_t retweets = 0;
  std::size_t unlabeled = 0;
  std::size_t ambiguous = 0;
  std::size_t empty_after_cleaning = 0;
  std::size_t duplicates = 0;
};

struct BuiltDataset {
  Dataset dataset;
  ClassCounts counts{};
  BuildStats stats;
};

// Lowercase, drop non-ASCII bytes, collapse character runs longer than two,
// remove @mentions and URLs, normalise whitespace. Idempotent.
std::string clean_text(std::string_view text);

bool is_retweet(std::string_view text);

/// Lowercased tags following every '#' in the text, in order of appearance.
std::vector<std::string> extract_hashtags(std::string_view text);

struct NoLabel {};
struct AmbiguousLabel {};
using LabelResult = std::variant<EmotionClass, NoLabel, AmbiguousLabel>;

LabelResult extract_label(std::string_view text, const HashtagLexicon& lexicon);

/// Removes every whitespace token that carries a lexicon hashtag.
std::string strip_label_hashtags(std::string_view clean, const HashtagLexicon& lexicon);

/// Retweet filter, distant labelling, cleaning, label-hashtag stripping and
/// deduplication on the cleaned text (first occurrence wins). Throws
/// EmptyDataset if nothing survives.
BuiltDataset build_dataset(const std::vector<RawMessage>& messages, const HashtagLexicon& lexicon);

/// Non-negative rational number p/q.
struct Fraction {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  /// Parses "0.555", "3/5" or "1".
  static Fraction parse(std::string_view text);
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string to_string() const;
};

struct SplitSpec {
  Fraction train{555, 1000};
  Fraction val{111, 1000};
  Fraction test{334, 1000};
  std::uint64_t seed = 0;

  /// Throws InvalidSpec unless the three fractions sum to exactly one.
  void validate() const;
};

struct Splits {
  Dataset train;
  Dataset val;
  Dataset test;
};

/// Seeded shuffle, then floor(fraction * N) items for train and validation;
/// the remainder goes to test.
Splits split_dataset(const Dataset& dataset, const SplitSpec& spec);

/// Sizes split_dataset produces for n items.
std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitSpec& spec);

std::vector<RawMessage> read_raw_jsonl(const std::string& path);
Dataset read_dataset_jsonl(const std::string& path);
std::string dataset_to_jsonl(const Dataset& dataset);

}  // namespace emolab
