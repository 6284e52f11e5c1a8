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
#include <string>
#include <vector>

#include "common.hpp"
#include "corpus.hpp"

namespace emolab {

// Generator for a keyword-template toy language: each emotion class owns a set
// of keywords, and sentences mix class keywords into shared filler words.
// Keywords are split into a "seen" and an "unseen" half so that transfer can
// be measured on keywords that never occur in the labelled training data.

enum class KeywordPool { All, Seen, Unseen };

struct SentenceOptions {
  std::size_t min_fillers = 4;
  std::size_t max_fillers = 10;
  std::size_t min_keywords = 1;
  std::size_t max_keywords = 2;
  KeywordPool pool = KeywordPool::All;
};

struct SyntheticSpec {
  std::size_t keywords_per_class = 25;
  std::size_t fillers = 400;
  std::uint64_t seed = 0;
};

class SyntheticLanguage {
 public:
  explicit SyntheticLanguage(const SyntheticSpec& spec);

  const std::vector<std::string>& keywords(EmotionClass c) const { return keywords_[class_index(c)]; }
  std::vector<std::string> keywords(EmotionClass c, KeywordPool pool) const;
  const std::vector<std::string>& fillers() const { return fillers_; }
  std::size_t vocabulary_size() const;

  std::string sentence(EmotionClass c, Rng& rng, const SentenceOptions& options = {}) const;

  /// n labelled sentences with uniformly drawn classes; ids are prefix + index.
  Dataset labeled(std::size_t n, std::uint64_t seed, const SentenceOptions& options = {},
                  const std::string& id_prefix = "s") const;
  std::vector<std::string> unlabeled(std::size_t n, std::uint64_t seed, const SentenceOptions& options = {}) const;

  /// Tweet-like raw messages: label hashtags at the end plus casing noise,
  /// elongations, mentions, URLs, emoji, retweets, duplicates, ambiguous and
  /// untagged messages.
  std::vector<RawMessage> raw_messages(std::size_t n, std::uint64_t seed, const HashtagLexicon& lexicon) const;

  /// Three-class (joy/anger/sadness) items written in the same language.
  struct BenchmarkLine {
    std::string text;
    std::string label;
  };
  std::vector<BenchmarkLine> benchmark(std::size_t n, std::uint64_t seed) const;

 private:
  std::array<std::vector<std::string>, kNumEmotionClasses> keywords_;
  std::vector<std::string> fillers_;
};

/// Small illustrative lexicon. It is not the lexicon any published corpus was
/// built with.
HashtagLexicon example_lexicon();

}  // namespace emolab
