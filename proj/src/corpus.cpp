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

#include "corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "common.hpp"

namespace emolab {

namespace {

constexpr std::array<std::string_view, kNumEmotionClasses> kClassNames = {"happy_active", "happy_inactive",
                                                                          "unhappy_active", "unhappy_inactive"};

bool is_tag_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::string collapse_runs(std::string_view token) {
  std::string out;
  out.reserve(token.size());
  std::size_t run = 0;
  for (std::size_t i = 0; i < token.size(); ++i) {
    run = (i > 0 && token[i] == token[i - 1]) ? run + 1 : 1;
    if (run <= 2) out.push_back(token[i]);
  }
  return out;
}

std::string truncate_url(std::string token) {
  const std::size_t url = std::min(token.find("http"), token.find("www."));
  if (url != std::string::npos) token.resize(url);
  return token;
}

std::string join(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

}  // namespace

std::string_view to_string(EmotionClass c) { return kClassNames[static_cast<std::size_t>(c)]; }

EmotionClass parse_emotion_class(std::string_view name) {
  for (std::size_t i = 0; i < kClassNames.size(); ++i) {
    if (kClassNames[i] == name) return static_cast<EmotionClass>(i);
  }
  fail(ErrorCode::Parse, "unknown emotion class '" + std::string(name) + "'");
}

HashtagLexicon::HashtagLexicon(std::array<std::set<std::string>, kNumEmotionClasses> tags) : tags_(std::move(tags)) {
  std::set<std::string> seen;
  for (std::size_t c = 0; c < tags_.size(); ++c) {
    for (const auto& tag : tags_[c]) {
      if (tag.empty()) fail(ErrorCode::InvalidSpec, "empty hashtag in lexicon");
      for (char ch : tag) {
        if (std::isspace(static_cast<unsigned char>(ch)) || std::isupper(static_cast<unsigned char>(ch))) {
          fail(ErrorCode::InvalidSpec, "lexicon hashtag '" + tag + "' must be lowercase without whitespace");
        }
      }
      if (!seen.insert(tag).second) {
        fail(ErrorCode::InvalidSpec, "hashtag '" + tag + "' is listed under more than one class");
      }
    }
  }
}

HashtagLexicon HashtagLexicon::from_json(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("lexicon: ") + e.what());
  }
  if (!doc.is_object()) fail(ErrorCode::Parse, "lexicon must be a JSON object");
  std::array<std::set<std::string>, kNumEmotionClasses> tags;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (it.key().rfind("_", 0) == 0) continue;  // "_comment" and friends
    const EmotionClass c = parse_emotion_class(it.key());
    if (!it.value().is_array()) fail(ErrorCode::Parse, "lexicon entry '" + it.key() + "' must be an array");
    for (const auto& tag : it.value()) {
      std::string t = tag.get<std::string>();
      if (!t.empty() && t.front() == '#') t.erase(0, 1);
      tags[class_index(c)].insert(std::move(t));
    }
  }
  return HashtagLexicon(std::move(tags));
}

std::string HashtagLexicon::to_json() const {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  for (auto c : kAllEmotionClasses) doc[std::string(to_string(c))] = tags(c);
  return doc.dump(2) + "\n";
}

std::optional<EmotionClass> HashtagLexicon::lookup(std::string_view tag) const {
  for (auto c : kAllEmotionClasses) {
    if (tags_[class_index(c)].count(std::string(tag))) return c;
  }
  return std::nullopt;
}

ClassCounts Dataset::counts() const {
  ClassCounts out{};
  for (const auto& m : items) ++out[class_index(m.label)];
  return out;
}

std::string clean_text(std::string_view text) {
  std::string ascii;
  ascii.reserve(text.size());
  for (char ch : text) {
    const auto u = static_cast<unsigned char>(ch);
    if (u < 0x80) ascii.push_back(static_cast<char>(std::tolower(u)));
  }
  std::vector<std::string> kept;
  for (const auto& raw : split_whitespace(ascii)) {
    if (raw.front() == '@') continue;
    // Truncate before collapsing so "www." survives as a URL marker, and
    // again after, since collapsing can form one ("htttp" -> "http").
    std::string token = collapse_runs(truncate_url(raw));
    token = truncate_url(token);
    if (!token.empty()) kept.push_back(std::move(token));
  }
  return join(kept);
}

bool is_retweet(std::string_view text) {
  for (const auto& token : split_whitespace(text)) {
    if (token.size() == 2 && std::tolower(static_cast<unsigned char>(token[0])) == 'r' &&
        std::tolower(static_cast<unsigned char>(token[1])) == 't') {
      return true;
    }
  }
  return false;
}

std::vector<std::string> extract_hashtags(std::string_view text) {
  std::vector<std::string> tags;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '#') continue;
    std::size_t j = i + 1;
    while (j < text.size() && is_tag_char(text[j])) ++j;
    if (j > i + 1) {
      std::string tag(text.substr(i + 1, j - i - 1));
      for (char& ch : tag) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
      tags.push_back(std::move(tag));
    }
    i = j - 1;
  }
  return tags;
}

LabelResult extract_label(std::string_view text, const HashtagLexicon& lexicon) {
  std::optional<EmotionClass> found;
  for (const auto& tag : extract_hashtags(text)) {
    const auto c = lexicon.lookup(tag);
    if (!c) continue;
    if (found && *found != *c) return AmbiguousLabel{};
    found = c;
  }
  if (!found) return NoLabel{};
  return *found;
}

std::string strip_label_hashtags(std::string_view clean, const HashtagLexicon& lexicon) {
  std::vector<std::string> kept;
  for (auto& token : split_whitespace(clean)) {
    const auto tags = extract_hashtags(token);
    const bool labelled = std::any_of(tags.begin(), tags.end(), [&](const auto& t) { return lexicon.lookup(t); });
    if (!labelled) kept.push_back(std::move(token));
  }
  return join(kept);
}

BuiltDataset build_dataset(const std::vector<RawMessage>& messages, const HashtagLexicon& lexicon) {
  BuiltDataset out;
  out.stats.input = messages.size();
  std::unordered_set<std::string> seen;
  for (const auto& msg : messages) {
    if (is_retweet(msg.text)) {
      ++out.stats.retweets;
      continue;
    }
    const LabelResult label = extract_label(msg.text, lexicon);
    if (std::holds_alternative<NoLabel>(label)) {
      ++out.stats.unlabeled;
      continue;
    }
    if (std::holds_alternative<AmbiguousLabel>(label)) {
      ++out.stats.ambiguous;
      continue;
    }
    std::string text = strip_label_hashtags(clean_text(msg.text), lexicon);
    if (text.empty()) {
      ++out.stats.empty_after_cleaning;
      continue;
    }
    if (!seen.insert(text).second) {
      ++out.stats.duplicates;
      continue;
    }
    out.dataset.items.push_back({msg.id, std::move(text), std::get<EmotionClass>(label)});
  }
  if (out.dataset.empty()) fail(ErrorCode::EmptyDataset, "no messages survived filtering and labelling");
  out.counts = out.dataset.counts();
  return out;
}

Fraction Fraction::parse(std::string_view text) {
  auto bad = [&] { fail(ErrorCode::InvalidSpec, "cannot parse fraction '" + std::string(text) + "'"); };
  auto parse_uint = [&](std::string_view digits) {
    if (digits.empty() || digits.size() > 12) bad();
    std::uint64_t x = 0;
    for (char ch : digits) {
      if (!std::isdigit(static_cast<unsigned char>(ch))) bad();
      x = x * 10 + static_cast<std::uint64_t>(ch - '0');
    }
    return x;
  };
  Fraction f;
  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    f.num = parse_uint(text.substr(0, slash));
    f.den = parse_uint(text.substr(slash + 1));
    if (f.den == 0) bad();
  } else if (const auto dot = text.find('.'); dot != std::string_view::npos) {
    const auto whole = text.substr(0, dot);
    const auto frac = text.substr(dot + 1);
    f.den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) f.den *= 10;
    f.num = (whole.empty() ? 0 : parse_uint(whole)) * f.den + (frac.empty() ? 0 : parse_uint(frac));
  } else {
    f.num = parse_uint(text);
  }
  const std::uint64_t g = std::gcd(f.num, f.den);
  if (g > 1) {
    f.num /= g;
    f.den /= g;
  }
  return f;
}

std::string Fraction::to_string() const {
  return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
}

void SplitSpec::validate() const {
  using u128 = unsigned __int128;
  const u128 lhs = u128(train.num) * val.den * test.den + u128(val.num) * train.den * test.den +
                   u128(test.num) * train.den * val.den;
  const u128 rhs = u128(train.den) * val.den * test.den;
  if (lhs != rhs) {
    fail(ErrorCode::InvalidSpec, "split fractions " + train.to_string() + " + " + val.to_string() + " + " +
                                     test.to_string() + " do not sum to 1");
  }
}

std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitSpec& spec) {
  spec.validate();
  using u128 = unsigned __int128;
  const auto train = static_cast<std::size_t>(u128(spec.train.num) * n / spec.train.den);
  const auto val = static_cast<std::size_t>(u128(spec.val.num) * n / spec.val.den);
  return {train, val, n - train - val};
}

Splits split_dataset(const Dataset& dataset, const SplitSpec& spec) {
  const auto sizes = split_sizes(dataset.size(), spec);
  if (dataset.empty()) fail(ErrorCode::EmptyDataset, "cannot split an empty dataset");
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(spec.seed);
  rng.shuffle(order);
  Splits out;
  for (std::size_t i = 0; i < order.size(); ++i) {
    Dataset& dst = i < sizes[0] ? out.train : (i < sizes[0] + sizes[1] ? out.val : out.test);
    dst.items.push_back(dataset.items[order[i]]);
  }
  return out;
}

namespace {

template <typename F>
void for_each_json_line(const std::string& path, F&& fn) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open '" + path + "'");
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      fn(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::Parse, path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

}  // namespace

std::vector<RawMessage> read_raw_jsonl(const std::string& path) {
  std::vector<RawMessage> out;
  for_each_json_line(path, [&](const nlohmann::json& obj) {
    RawMessage msg{obj.at("id").is_string() ? obj.at("id").get<std::string>() : obj.at("id").dump(),
                   obj.at("text").get<std::string>()};
    if (msg.id.empty() || msg.text.empty()) return;
    out.push_back(std::move(msg));
  });
  return out;
}

Dataset read_dataset_jsonl(const std::string& path) {
  Dataset out;
  for_each_json_line(path, [&](const nlohmann::json& obj) {
    out.items.push_back({obj.value("id", std::to_string(out.items.size())), obj.at("text").get<std::string>(),
                         parse_emotion_class(obj.at("label").get<std::string>())});
  });
  return out;
}

std::string dataset_to_jsonl(const Dataset& dataset) {
  std::string out;
  for (const auto& m : dataset.items) {
    nlohmann::ordered_json line;
    line["id"] = m.id;
    line["text"] = m.text;
    line["label"] = to_string(m.label);
    out += line.dump();
    out.push_back('\n');
  }
  return out;
}

}  // namespace emolab
