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

#include <gtest/gtest.h>

#include <random>

#include "common.hpp"
#include "fuzz.hpp"
#include "tokenizer.hpp"

namespace emolab {
namespace {

using namespace token_id;

TEST(Vocabulary, ReservedTokensComeFirst) {
  const Vocabulary v;
  EXPECT_EQ(v.size(), 5u);
  EXPECT_EQ(v.id("[PAD]"), kPad);
  EXPECT_EQ(v.id("[UNK]"), kUnk);
  EXPECT_EQ(v.id("[CLS]"), kCls);
  EXPECT_EQ(v.id("[SEP]"), kSep);
  EXPECT_EQ(v.id("[MASK]"), kMask);
  EXPECT_EQ(v.id("never"), kUnk);
}

TEST(BuildVocab, FrequencyOrder) {
  const Vocabulary v = build_vocab({"a a b"}, 1, 100);
  ASSERT_TRUE(v.contains("a"));
  ASSERT_TRUE(v.contains("b"));
  EXPECT_LT(v.id("a"), v.id("b"));
}

TEST(BuildVocab, MinCount) {
  const Vocabulary v = build_vocab({"a a b"}, 2, 100);
  EXPECT_TRUE(v.contains("a"));
  EXPECT_FALSE(v.contains("b"));
}

TEST(BuildVocab, MaxSizeCountsReservedTokens) {
  std::string corpus;
  for (int i = 0; i < 100; ++i) corpus += "w" + std::to_string(i % 40) + " ";
  const Vocabulary v = build_vocab({corpus}, 1, 20);
  EXPECT_EQ(v.size(), 20u);
}

TEST(BuildVocab, TiesBrokenLexicographically) {
  const Vocabulary v = build_vocab({"c b a", "d d"}, 1, 100);
  EXPECT_EQ(v.token(5), "d");
  EXPECT_EQ(v.token(6), "a");
  EXPECT_EQ(v.token(7), "b");
  EXPECT_EQ(v.token(8), "c");
}

TEST(Vocabulary, JsonRoundTrip) {
  const Vocabulary v = build_vocab({"x y y z"}, 1, 100);
  const Vocabulary w = Vocabulary::from_json(v.to_json());
  ASSERT_EQ(w.size(), v.size());
  for (std::int32_t i = 0; i < static_cast<std::int32_t>(v.size()); ++i) EXPECT_EQ(w.token(i), v.token(i));
  EXPECT_THROW(Vocabulary::from_json(R"(["a", "b"])"), Error);
}

TEST(Encode, PadsToMaxLen) {
  const Vocabulary v({"i", "am", "happy"});
  const TokenSequence s = encode("i am happy", v, 8);
  EXPECT_EQ(s.ids, (std::vector<std::int32_t>{kCls, v.id("i"), v.id("am"), v.id("happy"), kSep, kPad, kPad, kPad}));
  EXPECT_EQ(s.mask, (std::vector<std::uint8_t>{1, 1, 1, 1, 1, 0, 0, 0}));
}

TEST(Encode, EmptyText) {
  const TokenSequence s = encode("", Vocabulary(), 4);
  EXPECT_EQ(s.ids, (std::vector<std::int32_t>{kCls, kSep, kPad, kPad}));
}

TEST(Encode, TruncatesTrailingTokens) {
  const Vocabulary v({"t1", "t2", "t3", "t4"});
  const TokenSequence s = encode("t1 t2 t3 t4 t1 t2 t3 t4 t1 t2", v, 5);
  EXPECT_EQ(s.ids, (std::vector<std::int32_t>{kCls, v.id("t1"), v.id("t2"), v.id("t3"), kSep}));
}

TEST(Encode, OutOfVocabularyAndReservedSpellingsBecomeUnk) {
  const Vocabulary v({"ok"});
  const TokenSequence s = encode("ok nope [CLS] [PAD]", v, 8);
  EXPECT_EQ(s.ids[1], v.id("ok"));
  EXPECT_EQ(s.ids[2], kUnk);
  EXPECT_EQ(s.ids[3], kUnk);
  EXPECT_EQ(s.ids[4], kUnk);
}

TEST(Decode, RoundTripAndErrors) {
  const Vocabulary v({"i", "am", "happy"});
  EXPECT_EQ(decode(encode("i am happy", v, 8).ids, v), (std::vector<std::string>{"i", "am", "happy"}));
  const std::vector<std::int32_t> pads(6, kPad);
  EXPECT_TRUE(decode(pads, v).empty());
  const std::vector<std::int32_t> bad{static_cast<std::int32_t>(v.size())};
  try {
    decode(bad, v);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownId);
  }
}

TEST(Encode, LayoutInvariantsOnFuzzedInput) {
  std::mt19937_64 gen(8);
  const Vocabulary v = build_vocab({"a b rt happy x yes ooo", "a a b"}, 1, 100);
  for (int i = 0; i < 2000; ++i) {
    const std::size_t max_len = 3 + gen() % 12;
    const TokenSequence s = encode(testing::fuzz_text(gen), v, max_len);
    ASSERT_EQ(s.length(), max_len);
    EXPECT_NO_THROW(validate_sequence(s));
    EXPECT_EQ(s.ids[0], kCls);
    std::size_t seps = 0;
    bool in_pad = false;
    for (std::size_t p = 0; p < max_len; ++p) {
      if (s.mask[p] == 0) in_pad = true;
      EXPECT_EQ(s.mask[p], in_pad ? 0 : 1);
      if (in_pad) EXPECT_EQ(s.ids[p], kPad);
      if (s.mask[p] && s.ids[p] == kSep) ++seps;
    }
    EXPECT_EQ(seps, 1u);
  }
}

TEST(Decode, RoundTripProperty) {
  std::mt19937_64 gen(12);
  std::vector<std::string> words;
  for (int i = 0; i < 30; ++i) words.push_back("w" + std::to_string(i));
  const Vocabulary v(words);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t max_len = 4 + gen() % 10;
    std::vector<std::string> tokens;
    std::string text;
    for (std::size_t i = 0; i + 2 < max_len - (gen() % 2); ++i) {
      tokens.push_back(words[gen() % words.size()]);
      text += tokens.back() + " ";
    }
    EXPECT_EQ(decode(encode(text, v, max_len).ids, v), tokens);
  }
}

TEST(ValidateSequence, RejectsBrokenLayouts) {
  TokenSequence s = encode("a", Vocabulary({"a"}), 5);
  s.mask[4] = 1;
  EXPECT_THROW(validate_sequence(s), Error);
  TokenSequence t = encode("a", Vocabulary({"a"}), 5);
  t.ids[0] = kSep;
  EXPECT_THROW(validate_sequence(t), Error);
}

}  // namespace
}  // namespace emolab
