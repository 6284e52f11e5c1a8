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

#include <cmath>
#include <filesystem>

#include "adapt.hpp"
#include "autodiff/ops.hpp"
#include "common.hpp"
#include "eval.hpp"
#include "synthetic.hpp"

namespace emolab {
namespace {

using ad::Tensor;

Model small_model(const Vocabulary& vocab, std::uint64_t seed, HeadKind head = HeadKind::Linear,
                  EncoderKind kind = EncoderKind::Transformer) {
  Model m;
  m.vocab = vocab;
  m.encoder_config.kind = kind;
  m.encoder_config.num_layers = 1;
  m.encoder_config.num_heads = 2;
  m.encoder_config.hidden_dim = 16;
  m.encoder_config.ffn_dim = 32;
  m.encoder_config.max_len = 16;
  m.encoder_config.vocab_size = vocab.size();
  m.encoder = init_encoder(m.encoder_config, seed);
  m.head_config.kind = head;
  m.head_config.input_dim = 16;
  m.head_config.inner_dim = 8;
  m.head = init_head(m.head_config, seed + 1);
  return m;
}

struct Corpus {
  Dataset train, val;
  Vocabulary vocab;
};

Corpus synthetic_corpus(std::size_t n_train) {
  const SyntheticLanguage lang({6, 30, 1});
  Corpus c{lang.labeled(n_train, 2), lang.labeled(100, 3), {}};
  std::vector<std::string> texts;
  for (const auto& m : c.train.items) texts.push_back(m.text);
  c.vocab = build_vocab(texts, 1, 1000);
  return c;
}

TEST(ForwardClassify, ZeroHeadGivesUniform) {
  Model m = small_model(Vocabulary({"a"}), 1);
  for (auto& v : m.head.weight.data()) v = 0.0;
  const Tensor p = forward_classify(m.encoder, m.encoder_config, m.head, encode("a", m.vocab, 16));
  for (double v : p.data()) EXPECT_DOUBLE_EQ(v, 0.25);
}

TEST(ForwardClassify, DominantBias) {
  Model m = small_model(Vocabulary({"a"}), 1);
  for (auto& v : m.head.weight.data()) v = 0.0;
  m.head.bias.data()[0] = 1e3;
  const Tensor p = forward_classify(m.encoder, m.encoder_config, m.head, encode("a", m.vocab, 16));
  EXPECT_NEAR(p.at(0), 1.0, 1e-12);
}

TEST(ForwardClassify, SimplexAndShiftInvariance) {
  const Vocabulary v({"a", "b", "c", "d"});
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Model m = small_model(v, seed, seed % 2 ? HeadKind::Relu : HeadKind::Linear);
    const TokenSequence s = encode(seed % 3 ? "a b" : "d c b a a", v, 16);
    const Tensor p = forward_classify(m.encoder, m.encoder_config, m.head, s);
    double total = 0.0;
    for (double x : p.data()) {
      EXPECT_GT(x, 0.0);
      EXPECT_LT(x, 1.0);
      total += x;
    }
    EXPECT_NEAR(total, 1.0, 1e-9);
    for (auto& b : m.head.bias.data()) b += 3.75;
    const Tensor q = forward_classify(m.encoder, m.encoder_config, m.head, s);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(q.at(i), p.at(i), 1e-12);
  }
}

TEST(Predict, TiesGoToFirstClass) {
  Model m = small_model(Vocabulary({"a"}), 1);
  for (auto& v : m.head.weight.data()) v = 0.0;
  EXPECT_EQ(predict(m, "a").class_id, 0u);
  m.head.bias.data()[2] = 1.0;
  m.head.bias.data()[3] = 1.0;
  EXPECT_EQ(predict(m, "a").class_id, 2u);
}

TEST(Predict, OutOfVocabularyTextIsClassified) {
  const Model m = small_model(Vocabulary({"a"}), 1);
  const Prediction p = predict(m, "zzz qqq");
  EXPECT_LT(p.class_id, 4u);
  EXPECT_EQ(p.probabilities.size(), 4u);
}

TEST(Predict, EmptyTextWithAveragingEncoder) {
  const Model m = small_model(Vocabulary({"a"}), 1, HeadKind::Linear, EncoderKind::Dan);
  const Prediction p = predict(m, "@someone http://t.co/x");
  EXPECT_EQ(p.probabilities, predict(m, "unseenword").probabilities);
}

TEST(FineTune, FrozenLeavesEncoderBytesUnchanged) {
  const Corpus c = synthetic_corpus(200);
  const Model m = small_model(c.vocab, 4);
  const std::string before = encoder_fingerprint(m.encoder);
  FineTuneConfig f;
  f.mode = AdaptMode::Frozen;
  f.epochs = 2;
  const FineTuneResult r = fine_tune(m, c.train, c.val, f);
  EXPECT_TRUE(r.encoder_unchanged);
  EXPECT_EQ(encoder_fingerprint(r.model.encoder), before);
  EXPECT_NE(ad::serialize_tensors(r.model.head.named()), ad::serialize_tensors(m.head.named()));
  EXPECT_EQ(r.history.size(), 2u);
}

TEST(FineTune, ZeroEpochsChangesNothing) {
  const Corpus c = synthetic_corpus(50);
  const Model m = small_model(c.vocab, 4);
  FineTuneConfig f;
  f.epochs = 0;
  const FineTuneResult r = fine_tune(m, c.train, c.val, f);
  EXPECT_TRUE(r.history.empty());
  EXPECT_EQ(encoder_fingerprint(r.model.encoder), encoder_fingerprint(m.encoder));
  EXPECT_EQ(ad::serialize_tensors(r.model.head.named()), ad::serialize_tensors(m.head.named()));
}

TEST(FineTune, UnfrozenUpdatesEncoderAndLearnsSeparableCorpus) {
  const Corpus c = synthetic_corpus(600);
  const Model m = small_model(c.vocab, 5);
  FineTuneConfig f;
  f.epochs = 5;
  f.learning_rate = 3e-3;
  const FineTuneResult r = fine_tune(m, c.train, c.val, f);
  EXPECT_FALSE(r.encoder_unchanged);
  EXPECT_GE(r.history.back().val_micro_f, 0.95);
  EXPECT_LT(r.history.back().train_loss, r.history.front().train_loss);
}

TEST(FineTune, DanAndReluHeadTrain) {
  const Corpus c = synthetic_corpus(400);
  const Model m = small_model(c.vocab, 6, HeadKind::Relu, EncoderKind::Dan);
  FineTuneConfig f;
  f.epochs = 8;
  f.learning_rate = 5e-3;
  const FineTuneResult r = fine_tune(m, c.train, c.val, f);
  EXPECT_GE(r.history.back().val_micro_f, 0.9);
}

TEST(FineTune, SeedDeterminism) {
  const Corpus c = synthetic_corpus(120);
  const Model m = small_model(c.vocab, 7);
  FineTuneConfig f;
  f.epochs = 2;
  f.seed = 99;
  f.class_weighted = true;
  const FineTuneResult a = fine_tune(m, c.train, c.val, f), b = fine_tune(m, c.train, c.val, f);
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    EXPECT_EQ(a.history[i].train_loss, b.history[i].train_loss);
    EXPECT_EQ(a.history[i].val_micro_f, b.history[i].val_micro_f);
  }
  EXPECT_EQ(encoder_fingerprint(a.model.encoder), encoder_fingerprint(b.model.encoder));
  EXPECT_EQ(ad::serialize_tensors(a.model.head.named()), ad::serialize_tensors(b.model.head.named()));
}

TEST(FineTune, Errors) {
  const Corpus c = synthetic_corpus(20);
  Model m = small_model(c.vocab, 8);
  try {
    fine_tune(m, Dataset{}, c.val, FineTuneConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyDataset);
  }
  m.head_config.num_classes = 2;
  m.head = init_head(m.head_config, 1);
  Dataset bad;
  bad.items.push_back({"x", "text", EmotionClass::UnhappyInactive});
  try {
    fine_tune(m, bad, bad, FineTuneConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::LabelOutOfRange);
  }
}

TEST(Model, BundleRoundTrip) {
  const auto dir = (std::filesystem::temp_directory_path() / "emolab_model_test").string();
  const Corpus c = synthetic_corpus(30);
  const Model m = small_model(c.vocab, 9, HeadKind::Relu);
  save_model(dir, m);
  const Model loaded = load_model(dir);
  EXPECT_EQ(encoder_fingerprint(loaded.encoder), encoder_fingerprint(m.encoder));
  EXPECT_EQ(ad::serialize_tensors(loaded.head.named()), ad::serialize_tensors(m.head.named()));
  for (const auto& item : c.val.items) {
    EXPECT_EQ(predict(loaded, item.text).probabilities, predict(m, item.text).probabilities);
  }
  std::filesystem::remove(dir + "/vocab.json");
  EXPECT_THROW(load_model(dir), Error);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace emolab
