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

#include "synthetic.hpp"

#include <cctype>
#include <iterator>
#include <set>

#include "common.hpp"

namespace emolab {

namespace {

constexpr std::string_view kConsonants = "bdfgklmnpstvz";
constexpr std::string_view kVowels = "aeiou";

// Consonant-vowel syllables never produce runs of three letters, "rt", URL
// prefixes or anything else the cleaner would rewrite.
std::string make_word(Rng& rng) {
  const std::size_t syllables = 2 + rng.below(2);
  std::string w;
  for (std::size_t i = 0; i < syllables; ++i) {
    w.push_back(kConsonants[rng.below(kConsonants.size())]);
    w.push_back(kVowels[rng.below(kVowels.size())]);
  }
  return w;
}

std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

std::string elongate(const std::string& w, Rng& rng) {
  return w + std::string(2 + rng.below(3), w.back());
}

}  // namespace

SyntheticLanguage::SyntheticLanguage(const SyntheticSpec& spec) {
  if (spec.keywords_per_class < 2 || spec.fillers < 1) {
    fail(ErrorCode::InvalidArgument, "synthetic language needs >= 2 keywords per class and >= 1 filler");
  }
  Rng rng(spec.seed);
  std::set<std::string> used;
  auto fresh = [&] {
    for (;;) {
      std::string w = make_word(rng);
      if (used.insert(w).second) return w;
    }
  };
  for (auto& kw : keywords_) {
    for (std::size_t i = 0; i < spec.keywords_per_class; ++i) kw.push_back(fresh());
  }
  for (std::size_t i = 0; i < spec.fillers; ++i) fillers_.push_back(fresh());
}

std::vector<std::string> SyntheticLanguage::keywords(EmotionClass c, KeywordPool pool) const {
  const auto& all = keywords(c);
  const std::size_t half = all.size() / 2;
  switch (pool) {
    case KeywordPool::Seen: return {all.begin(), all.begin() + static_cast<std::ptrdiff_t>(half)};
    case KeywordPool::Unseen: return {all.begin() + static_cast<std::ptrdiff_t>(half), all.end()};
    case KeywordPool::All: break;
  }
  return all;
}

std::size_t SyntheticLanguage::vocabulary_size() const {
  std::size_t n = fillers_.size();
  for (const auto& kw : keywords_) n += kw.size();
  return n;
}

std::string SyntheticLanguage::sentence(EmotionClass c, Rng& rng, const SentenceOptions& options) const {
  const auto pool = keywords(c, options.pool);
  const std::size_t n_fill = options.min_fillers + rng.below(options.max_fillers - options.min_fillers + 1);
  const std::size_t n_kw = options.min_keywords + rng.below(options.max_keywords - options.min_keywords + 1);
  std::vector<std::string> words;
  for (std::size_t i = 0; i < n_fill; ++i) words.push_back(fillers_[rng.below(fillers_.size())]);
  for (std::size_t i = 0; i < n_kw; ++i) {
    const std::size_t at = rng.below(words.size() + 1);
    words.insert(words.begin() + static_cast<std::ptrdiff_t>(at), pool[rng.below(pool.size())]);
  }
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out.push_back(' ');
    out += w;
  }
  return out;
}

Dataset SyntheticLanguage::labeled(std::size_t n, std::uint64_t seed, const SentenceOptions& options,
                                   const std::string& id_prefix) const {
  Rng rng(seed);
  Dataset out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<EmotionClass>(rng.below(kNumEmotionClasses));
    out.items.push_back({id_prefix + std::to_string(i), sentence(c, rng, options), c});
  }
  return out;
}

std::vector<std::string> SyntheticLanguage::unlabeled(std::size_t n, std::uint64_t seed,
                                                      const SentenceOptions& options) const {
  Rng rng(seed);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(sentence(static_cast<EmotionClass>(rng.below(kNumEmotionClasses)), rng, options));
  }
  return out;
}

std::vector<RawMessage> SyntheticLanguage::raw_messages(std::size_t n, std::uint64_t seed,
                                                        const HashtagLexicon& lexicon) const {
  Rng rng(seed);
  std::vector<RawMessage> out;
  auto tag_of = [&](EmotionClass c) {
    const auto& tags = lexicon.tags(c);
    auto it = tags.begin();
    std::advance(it, static_cast<std::ptrdiff_t>(rng.below(tags.size())));
    return "#" + (rng.bernoulli(0.3) ? upper(*it) : *it);
  };
  for (std::size_t i = 0; i < n; ++i) {
    const std::string id = "m" + std::to_string(i);
    if (!out.empty() && rng.bernoulli(0.03)) {
      out.push_back({id, out[rng.below(out.size())].text});
      continue;
    }
    const auto c = static_cast<EmotionClass>(rng.below(kNumEmotionClasses));
    std::vector<std::string> words = split_whitespace(sentence(c, rng));
    for (auto& w : words) {
      const double r = rng.uniform();
      if (r < 0.05) w = upper(w);
      else if (r < 0.08) w = elongate(w, rng);
    }
    std::string text;
    if (rng.bernoulli(0.15)) text += "@user" + std::to_string(rng.below(1000)) + " ";
    for (const auto& w : words) text += w + " ";
    if (rng.bernoulli(0.1)) text += "http://t.co/" + std::to_string(rng.below(100000)) + " ";
    if (rng.bernoulli(0.05)) text += "\xF0\x9F\x98\x80 ";
    const double kind = rng.uniform();
    if (kind < 0.04) {
      text = (rng.bernoulli(0.5) ? "RT " : "rt ") + text + tag_of(c);
    } else if (kind < 0.07) {
      const auto other = static_cast<EmotionClass>((class_index(c) + 1 + rng.below(3)) % kNumEmotionClasses);
      text += tag_of(c) + " " + tag_of(other);
    } else if (kind < 0.10) {
      text.pop_back();
    } else {
      text += tag_of(c);
    }
    out.push_back({id, text});
  }
  return out;
}

std::vector<SyntheticLanguage::BenchmarkLine> SyntheticLanguage::benchmark(std::size_t n, std::uint64_t seed) const {
  Rng rng(seed);
  std::vector<BenchmarkLine> out;
  for (std::size_t i = 0; i < n; ++i) {
    switch (rng.below(3)) {
      case 0:
        out.push_back({sentence(rng.bernoulli(0.5) ? EmotionClass::HappyActive : EmotionClass::HappyInactive, rng),
                       "joy"});
        break;
      case 1: out.push_back({sentence(EmotionClass::UnhappyActive, rng), "anger"}); break;
      default: out.push_back({sentence(EmotionClass::UnhappyInactive, rng), "sadness"}); break;
    }
  }
  return out;
}

HashtagLexicon example_lexicon() {
  return HashtagLexicon({{
      {"joy", "happy", "excited", "thrilled", "yay"},
      {"relax", "calm", "peaceful", "chill", "serene"},
      {"angry", "anger", "furious", "mad", "annoyed"},
      {"sad", "sadness", "depressed", "lonely", "heartbroken"},
  }});
}

}  // namespace emolab
