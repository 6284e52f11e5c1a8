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
#include <vector>

#include "autodiff/checkpoint.hpp"
#include "autodiff/tensor.hpp"
#include "tokenizer.hpp"

namespace emolab {

enum class EncoderKind { Transformer, Dan };

std::string_view to_string(EncoderKind kind);
EncoderKind parse_encoder_kind(std::string_view name);

struct EncoderConfig {
  EncoderKind kind = EncoderKind::Transformer;
  std::size_t num_layers = 2;
  std::size_t num_heads = 4;
  std::size_t hidden_dim = 64;
  std::size_t ffn_dim = 128;
  std::size_t max_len = 32;
  std::size_t vocab_size = 0;

  void validate() const;
  std::string to_json() const;
  static EncoderConfig from_json(std::string_view json_text);
  bool operator==(const EncoderConfig&) const = default;
};

struct TransformerLayerParams {
  ad::Tensor query, key, value, output;  // H x H each
  ad::Tensor attn_norm_gain, attn_norm_bias;
  ad::Tensor ffn_in, ffn_in_bias;    // H x F, F
  ad::Tensor ffn_out, ffn_out_bias;  // F x H, H
  ad::Tensor ffn_norm_gain, ffn_norm_bias;
};

struct EncoderParams {
  ad::Tensor token_embedding;     // V x H
  ad::Tensor position_embedding;  // max_len x H (transformer only)
  std::vector<TransformerLayerParams> layers;
  // Deep averaging network feed-forward stack (DAN only).
  ad::Tensor dan_hidden, dan_hidden_bias;  // H x F, F
  ad::Tensor dan_output, dan_output_bias;  // F x H, H

  /// Stable, name-addressed view used for checkpoints and optimisers.
  ad::NamedTensors named() const;
  std::vector<ad::Tensor> tensors() const;
  EncoderParams clone() const;
  void set_requires_grad(bool on) const;
};

EncoderParams init_encoder(const EncoderConfig& config, std::uint64_t seed);

/// Throws ShapeMismatch if any tensor disagrees with the config.
void check_params(const EncoderParams& params, const EncoderConfig& config);

/// Attention probabilities per layer, [head][query][key] for one sequence.
struct AttentionTrace {
  std::size_t heads = 0;
  std::size_t seq = 0;
  std::vector<std::vector<double>> layers;

  double weight(std::size_t layer, std::size_t head, std::size_t query, std::size_t key) const {
    return layers[layer][(head * seq + query) * seq + key];
  }
};

struct TransformerOutput {
  ad::Tensor hidden;  // seq.length() x H; rows at PAD positions are zero
  ad::Tensor pooled;  // 1 x H, the final [CLS] state
};

/// Only the unmasked prefix is computed, so cost grows with the number of
/// real tokens and trailing padding never changes the result.
TransformerOutput encode_transformer(const EncoderParams& params, const EncoderConfig& config,
                                     const TokenSequence& seq, AttentionTrace* trace = nullptr);

/// Self-attention sublayer for a packed batch: x is [batch*seq x H], mask is
/// [batch*seq]. Returns the output-projected concatenation of heads.
ad::Tensor multi_head_attention(const ad::Tensor& x, const TransformerLayerParams& layer,
                                std::span<const std::uint8_t> mask, std::size_t batch, std::size_t seq,
                                std::size_t heads, std::vector<double>* weights = nullptr);

/// 1 x H. Throws EmptySequence when there are no content tokens.
ad::Tensor encode_dan(const EncoderParams& params, const EncoderConfig& config, const TokenSequence& seq);

struct BatchEncoding {
  ad::Tensor hidden;  // batch*seq x H over the trimmed length (transformer only)
  ad::Tensor pooled;  // batch x H
  std::size_t batch = 0;
  std::size_t seq = 0;
};

/// Packs sequences to the longest real length in the batch and encodes them
/// with whichever encoder the config selects.
BatchEncoding encode_batch(const EncoderParams& params, const EncoderConfig& config,
                           std::span<const TokenSequence* const> seqs, AttentionTrace* trace = nullptr);

void save_encoder(const std::string& dir, const EncoderParams& params, const EncoderConfig& config);
std::pair<EncoderParams, EncoderConfig> load_encoder(const std::string& dir);

}  // namespace emolab
