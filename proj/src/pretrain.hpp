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
#include <vector>

#include "autodiff/tensor.hpp"
#include "encoder.hpp"
#include "tokenizer.hpp"

namespace emolab {

struct MaskingSpec {
  double mask_prob = 0.15;
  std::uint64_t seed = 0;
};

struct PretrainConfig {
  std::size_t epochs = 5;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  MaskingSpec masking;
  std::uint64_t order_seed = 0;

  void validate() const;
};

struct MaskedTarget {
  std::size_t position;
  std::int32_t original;

  bool operator==(const MaskedTarget&) const = default;
};

struct MaskedSequence {
  TokenSequence masked;
  std::vector<MaskedTarget> targets;
};

/// Replaces each content position with [MASK] independently with probability
/// mask_prob. Deterministic in (seq, spec.seed).
MaskedSequence mask_tokens(const TokenSequence& seq, const MaskingSpec& spec);

/// Cross-entropy of tied-embedding logits (hidden . embedding^T) at the given
/// rows of a packed hidden matrix. Rows not listed never enter the loss.
ad::Tensor masked_lm_loss(const ad::Tensor& hidden, const ad::Tensor& embedding, std::span<const std::size_t> rows,
                          std::span<const std::int32_t> targets);

struct PretrainResult {
  EncoderParams params;
  std::vector<double> loss_curve;  // mean masked-token loss per epoch
};

/// Masked-token pretraining of a transformer encoder. The input parameters
/// are not modified.
PretrainResult pretrain_mlm(const EncoderParams& params, const EncoderConfig& config,
                            const std::vector<TokenSequence>& corpus, const PretrainConfig& pconf);

struct MlmEvaluation {
  double loss = 0.0;
  double accuracy = 0.0;
  std::size_t masked = 0;
};

MlmEvaluation evaluate_mlm(const EncoderParams& params, const EncoderConfig& config,
                           const std::vector<TokenSequence>& corpus, const MaskingSpec& masking);

}  // namespace emolab
