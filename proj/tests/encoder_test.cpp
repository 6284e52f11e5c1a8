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

#include <filesystem>
#include <random>

#include "adapt.hpp"
#include "autodiff/ops.hpp"
#include "common.hpp"
#include "encoder.hpp"
#include "gradient_cases.hpp"
#include "test_support.hpp"
#include "tokenizer.hpp"

namespace emolab {
namespace {

using ad::Tensor;

Vocabulary tiny_vocab() { return Vocabulary({"a", "b", "c", "d", "e", "f", "g"}); }

EncoderConfig tiny_config(EncoderKind kind = EncoderKind::Transformer) {
  EncoderConfig c;
  c.kind = kind;
  c.num_layers = 2;
  c.num_heads = 2;
  c.hidden_dim = 8;
  c.ffn_dim = 12;
  c.max_len = 8;
  c.vocab_size = tiny_vocab().size();
  return c;
}

TEST(EncoderConfig, Validation) {
  EncoderConfig c = tiny_config();
  EXPECT_NO_THROW(c.validate());
  c.num_heads = 3;
  EXPECT_THROW(c.validate(), Error);
  c = tiny_config();
  c.ffn_dim = 4;
  EXPECT_THROW(c.validate(), Error);
  c = tiny_config();
  EXPECT_EQ(EncoderConfig::from_json(c.to_json()), c);
}

TEST(Transformer, ZeroLayersPoolsClsPlusPosition) {
  EncoderConfig c = tiny_config();
  c.num_layers = 0;
  const EncoderParams p = init_encoder(c, 3);
  const TokenSequence s = encode("a b c", tiny_vocab(), c.max_len);
  const TransformerOutput out = encode_transformer(p, c, s);
  for (std::size_t j = 0; j < c.hidden_dim; ++j) {
    EXPECT_EQ(out.pooled.at(j),
              p.token_embedding.at(token_id::kCls * c.hidden_dim + j) + p.position_embedding.at(j));
  }
}

TEST(Transformer, PaddedKeysGetExactlyZeroAttention) {
  const EncoderConfig c = tiny_config();
  const EncoderParams p = init_encoder(c, 4);
  const TokenSequence s = encode("a b", tiny_vocab(), c.max_len);
  AttentionTrace trace;
  encode_transformer(p, c, s, &trace);
  ASSERT_EQ(trace.layers.size(), c.num_layers);
  // The trace spans the full padded length; padded keys get exact zeros.
  for (std::size_t l = 0; l < c.num_layers; ++l) {
    for (std::size_t h = 0; h < c.num_heads; ++h) {
      for (std::size_t q = 0; q < s.real_length(); ++q) {
        double total = 0.0;
        for (std::size_t k = 0; k < trace.seq; ++k) {
          if (k >= s.real_length()) EXPECT_EQ(trace.weight(l, h, q, k), 0.0);
          total += trace.weight(l, h, q, k);
        }
        EXPECT_NEAR(total, 1.0, 1e-12);
      }
    }
  }
}

TEST(Transformer, PaddingInvariance) {
  std::mt19937_64 gen(2);
  EncoderConfig c = tiny_config();
  c.max_len = 16;
  const EncoderParams p = init_encoder(c, 5);
  const Vocabulary v = tiny_vocab();
  for (int trial = 0; trial < 50; ++trial) {
    std::string text;
    const std::size_t n = gen() % 6;
    for (std::size_t i = 0; i < n; ++i) text += v.token(5 + static_cast<std::int32_t>(gen() % 7)) + " ";
    const std::size_t short_len = std::max<std::size_t>(3, n + 2 + gen() % 3);
    const Tensor a = encode_transformer(p, c, encode(text, v, short_len)).pooled;
    const Tensor b = encode_transformer(p, c, encode(text, v, c.max_len)).pooled;
    for (std::size_t j = 0; j < c.hidden_dim; ++j) EXPECT_NEAR(a.at(j), b.at(j), 1e-10);
  }
}

TEST(Transformer, BatchMatchesSingleSequences) {
  const EncoderConfig c = tiny_config();
  const EncoderParams p = init_encoder(c, 6);
  const Vocabulary v = tiny_vocab();
  const TokenSequence s1 = encode("a b c d", v, c.max_len), s2 = encode("e", v, c.max_len);
  const std::vector<const TokenSequence*> seqs{&s1, &s2};
  const BatchEncoding batch = encode_batch(p, c, seqs);
  const Tensor one = encode_transformer(p, c, s1).pooled, two = encode_transformer(p, c, s2).pooled;
  for (std::size_t j = 0; j < c.hidden_dim; ++j) {
    EXPECT_NEAR(batch.pooled.at(j), one.at(j), 1e-12);
    EXPECT_NEAR(batch.pooled.at(c.hidden_dim + j), two.at(j), 1e-12);
  }
}

TEST(Transformer, Deterministic) {
  const EncoderConfig c = tiny_config();
  const TokenSequence s = encode("a c e g", tiny_vocab(), c.max_len);
  const Tensor a = encode_transformer(init_encoder(c, 7), c, s).hidden;
  const Tensor b = encode_transformer(init_encoder(c, 7), c, s).hidden;
  EXPECT_TRUE(std::equal(a.data().begin(), a.data().end(), b.data().begin()));
}

TEST(Transformer, FlopsGrowWithRealLength) {
  EncoderConfig c = tiny_config();
  c.max_len = 16;
  const EncoderParams p = init_encoder(c, 8);
  std::uint64_t previous = 0;
  std::string text;
  for (int n = 0; n <= 14; ++n) {
    const TokenSequence s = encode(text, tiny_vocab(), c.max_len);
    ad::NoGradGuard guard;
    const std::uint64_t before = ad::flop_counter();
    encode_transformer(p, c, s);
    const std::uint64_t used = ad::flop_counter() - before;
    EXPECT_GT(used, previous) << n << " tokens";
    previous = used;
    text += "a ";
  }
}

TEST(Dan, FlopsLinearInLength) {
  EncoderConfig c = tiny_config(EncoderKind::Dan);
  c.max_len = 16;
  const EncoderParams p = init_encoder(c, 8);
  std::vector<std::uint64_t> cost;
  std::string text = "a ";
  for (int n = 1; n <= 14; ++n) {
    ad::NoGradGuard guard;
    const std::uint64_t before = ad::flop_counter();
    encode_dan(p, c, encode(text, tiny_vocab(), c.max_len));
    cost.push_back(ad::flop_counter() - before);
    text += "b ";
  }
  for (std::size_t i = 2; i < cost.size(); ++i) {
    EXPECT_GT(cost[i], cost[i - 1]);
    EXPECT_EQ(cost[i] - cost[i - 1], cost[1] - cost[0]);
  }
}

TransformerLayerParams identity_layer(std::size_t h) {
  EncoderConfig c = tiny_config();
  c.hidden_dim = h;
  EncoderParams p = init_encoder(c, 1);
  return p.layers[0];
}

TEST(MultiHeadAttention, SingleRealTokenAttendsToItself) {
  std::mt19937_64 gen(3);
  const TransformerLayerParams layer = identity_layer(8);
  const Tensor x = testing::random_tensor({3, 8}, gen, -1, 1, false);
  const std::vector<std::uint8_t> mask{1, 0, 0};
  std::vector<double> w;
  multi_head_attention(x, layer, mask, 1, 3, 2, &w);
  for (std::size_t h = 0; h < 2; ++h) EXPECT_EQ(w[(h * 3 + 0) * 3 + 0], 1.0);
}

TEST(MultiHeadAttention, IdenticalRowsGiveUniformWeights) {
  const TransformerLayerParams layer = identity_layer(8);
  std::vector<double> row{0.3, -0.2, 0.5, 0.1, -0.7, 0.2, 0.9, -0.4};
  std::vector<double> values;
  for (int i = 0; i < 4; ++i) values.insert(values.end(), row.begin(), row.end());
  const Tensor x({4, 8}, values);
  const std::vector<std::uint8_t> mask{1, 1, 1, 1};
  std::vector<double> w;
  multi_head_attention(x, layer, mask, 1, 4, 2, &w);
  for (double v : w) EXPECT_NEAR(v, 0.25, 1e-15);
}

TEST(MultiHeadAttention, PermutationEquivariant) {
  std::mt19937_64 gen(4);
  const TransformerLayerParams layer = identity_layer(8);
  const Tensor x = testing::random_tensor({5, 8}, gen, -1, 1, false);
  const std::vector<std::size_t> perm{3, 0, 4, 1, 2};
  const std::vector<std::uint8_t> mask(5, 1);
  const Tensor y = multi_head_attention(x, layer, mask, 1, 5, 2);
  const Tensor yp = multi_head_attention(ad::gather_rows(x, perm), layer, mask, 1, 5, 2);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 8; ++j) EXPECT_NEAR(yp.at(i * 8 + j), y.at(perm[i] * 8 + j), 1e-12);
  }
}

TEST(Transformer, TokenPermutationWithZeroPositions) {
  // With position embeddings zeroed the whole encoder is permutation
  // equivariant over content tokens; the CLS row therefore does not move.
  EncoderConfig c = tiny_config();
  EncoderParams p = init_encoder(c, 9);
  for (auto& v : p.position_embedding.data()) v = 0.0;
  const Vocabulary v = tiny_vocab();
  const Tensor a = encode_transformer(p, c, encode("a b c d", v, c.max_len)).pooled;
  const Tensor b = encode_transformer(p, c, encode("c a d b", v, c.max_len)).pooled;
  for (std::size_t j = 0; j < c.hidden_dim; ++j) EXPECT_NEAR(a.at(j), b.at(j), 1e-12);
}

TEST(Dan, AveragesContentTokens) {
  EncoderConfig c = tiny_config(EncoderKind::Dan);
  c.num_layers = 0;
  EncoderParams p = init_encoder(c, 10);
  const Vocabulary v = tiny_vocab();
  const Tensor one = encode_dan(p, c, encode("a", v, c.max_len));
  const Tensor twice = encode_dan(p, c, encode("a a", v, c.max_len));
  for (std::size_t j = 0; j < c.hidden_dim; ++j) EXPECT_EQ(one.at(j), twice.at(j));
  try {
    encode_dan(p, c, encode("", v, c.max_len));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptySequence);
  }
}

TEST(Dan, SingleTokenMeanIsItsEmbedding) {
  // With the feed-forward stack set to identity-like ReLU passes on positive
  // inputs, the pooled vector is exactly the token embedding.
  EncoderConfig c = tiny_config(EncoderKind::Dan);
  c.ffn_dim = c.hidden_dim;
  EncoderParams p = init_encoder(c, 11);
  const std::int32_t id = tiny_vocab().id("c");
  for (std::size_t j = 0; j < c.hidden_dim; ++j) p.token_embedding.data()[id * c.hidden_dim + j] = 0.1 * (j + 1);
  for (Tensor* m : {&p.dan_hidden, &p.dan_output}) {
    auto d = m->data();
    std::fill(d.begin(), d.end(), 0.0);
    for (std::size_t j = 0; j < c.hidden_dim; ++j) d[j * c.hidden_dim + j] = 1.0;
  }
  const Tensor out = encode_dan(p, c, encode("c", tiny_vocab(), c.max_len));
  for (std::size_t j = 0; j < c.hidden_dim; ++j) EXPECT_NEAR(out.at(j), 0.1 * (j + 1), 1e-15);
}

TEST(Dan, PaddingInvariance) {
  EncoderConfig c = tiny_config(EncoderKind::Dan);
  c.max_len = 16;
  const EncoderParams p = init_encoder(c, 12);
  const Tensor a = encode_dan(p, c, encode("a b c", tiny_vocab(), 5));
  const Tensor b = encode_dan(p, c, encode("a b c", tiny_vocab(), 16));
  for (std::size_t j = 0; j < c.hidden_dim; ++j) EXPECT_NEAR(a.at(j), b.at(j), 1e-10);
}

TEST(Encoder, ShapeMismatchDetected) {
  const EncoderConfig c = tiny_config();
  EncoderParams p = init_encoder(c, 1);
  EncoderConfig other = c;
  other.hidden_dim = 12;
  try {
    check_params(p, other);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ShapeMismatch);
  }
}

TEST(Encoder, CheckpointRoundTrip) {
  const auto dir = (std::filesystem::temp_directory_path() / "emolab_encoder_test").string();
  const EncoderConfig c = tiny_config();
  const EncoderParams p = init_encoder(c, 13);
  save_encoder(dir, p, c);
  const auto [q, qc] = load_encoder(dir);
  EXPECT_EQ(qc, c);
  EXPECT_EQ(ad::serialize_tensors(q.named()), ad::serialize_tensors(p.named()));
  std::filesystem::remove_all(dir);
}

// End-to-end classifier gradients over all encoder and head parameters.
class ClassifierGradient : public ::testing::TestWithParam<int> {};

using testing::classifier_gradient_error;

TEST_P(ClassifierGradient, TransformerLinearHead) {
  EXPECT_LT(classifier_gradient_error(EncoderKind::Transformer, HeadKind::Linear, GetParam()), 1e-4);
}

TEST_P(ClassifierGradient, TransformerReluHead) {
  EXPECT_LT(classifier_gradient_error(EncoderKind::Transformer, HeadKind::Relu, GetParam()), 1e-4);
}

TEST_P(ClassifierGradient, DanLinearHead) {
  EXPECT_LT(classifier_gradient_error(EncoderKind::Dan, HeadKind::Linear, GetParam()), 1e-4);
}

INSTANTIATE_TEST_SUITE_P(Seeds, ClassifierGradient, ::testing::Range(0, 20));

}  // namespace
}  // namespace emolab
