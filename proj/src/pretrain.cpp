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

#include "pretrain.hpp"

#include <numeric>

#include "autodiff/adam.hpp"
#include "autodiff/ops.hpp"
#include "common.hpp"

namespace emolab {

namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

MaskingSpec derived(const MaskingSpec& base, std::uint64_t epoch, std::uint64_t index) {
  return {base.mask_prob, mix(base.seed ^ mix(epoch ^ mix(index)))};
}

struct MaskedBatch {
  std::vector<MaskedSequence> items;
  std::vector<std::size_t> rows;
  std::vector<std::int32_t> targets;
};

// Masked copies of a batch plus the packed-row index of every target.
MaskedBatch make_batch(const std::vector<TokenSequence>& corpus, std::span<const std::size_t> indices,
                       const MaskingSpec& masking, std::uint64_t epoch) {
  MaskedBatch batch;
  std::size_t seq_len = 0;
  for (auto i : indices) {
    batch.items.push_back(mask_tokens(corpus[i], derived(masking, epoch, i)));
    seq_len = std::max(seq_len, corpus[i].real_length());
  }
  for (std::size_t b = 0; b < batch.items.size(); ++b) {
    for (const auto& t : batch.items[b].targets) {
      batch.rows.push_back(b * seq_len + t.position);
      batch.targets.push_back(t.original);
    }
  }
  return batch;
}

std::vector<const TokenSequence*> pointers(const std::vector<MaskedSequence>& items) {
  std::vector<const TokenSequence*> out;
  for (const auto& m : items) out.push_back(&m.masked);
  return out;
}

}  // namespace

void PretrainConfig::validate() const {
  if (batch_size == 0) fail(ErrorCode::InvalidArgument, "pretrain batch_size must be positive");
  if (!(learning_rate > 0.0)) fail(ErrorCode::InvalidArgument, "pretrain learning_rate must be positive");
  if (!(masking.mask_prob >= 0.0 && masking.mask_prob <= 1.0)) {
    fail(ErrorCode::InvalidArgument, "mask_prob must lie in [0, 1]");
  }
}

MaskedSequence mask_tokens(const TokenSequence& seq, const MaskingSpec& spec) {
  if (!(spec.mask_prob >= 0.0 && spec.mask_prob <= 1.0)) fail(ErrorCode::InvalidArgument, "mask_prob outside [0, 1]");
  validate_sequence(seq);
  MaskedSequence out{seq, {}};
  Rng rng(spec.seed);
  const std::size_t real = seq.real_length();
  for (std::size_t i = 1; i + 1 < real; ++i) {
    if (rng.bernoulli(spec.mask_prob)) {
      out.targets.push_back({i, seq.ids[i]});
      out.masked.ids[i] = token_id::kMask;
    }
  }
  return out;
}

ad::Tensor masked_lm_loss(const ad::Tensor& hidden, const ad::Tensor& embedding, std::span<const std::size_t> rows,
                          std::span<const std::int32_t> targets) {
  if (rows.size() != targets.size()) fail(ErrorCode::ShapeMismatch, "masked_lm_loss: rows/targets differ");
  const ad::Tensor selected = ad::gather_rows(hidden, rows);
  const ad::Tensor logits = ad::matmul(selected, ad::transpose(embedding));
  return ad::cross_entropy(logits, targets);
}

PretrainResult pretrain_mlm(const EncoderParams& params, const EncoderConfig& config,
                            const std::vector<TokenSequence>& corpus, const PretrainConfig& pconf) {
  if (config.kind != EncoderKind::Transformer) {
    fail(ErrorCode::InvalidArgument, "masked-token pretraining needs a transformer encoder");
  }
  if (corpus.empty()) fail(ErrorCode::EmptyCorpus, "pretraining corpus is empty");
  pconf.validate();
  check_params(params, config);

  PretrainResult result{params.clone(), {}};
  result.params.set_requires_grad(true);
  ad::Adam optimizer(result.params.tensors(), {.learning_rate = pconf.learning_rate});
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(pconf.order_seed);
  for (std::size_t epoch = 0; epoch < pconf.epochs; ++epoch) {
    rng.shuffle(order);
    double weighted_loss = 0.0;
    std::size_t masked_total = 0;
    for (std::size_t start = 0; start < order.size(); start += pconf.batch_size) {
      const auto indices = std::span(order).subspan(start, std::min(pconf.batch_size, order.size() - start));
      const MaskedBatch batch = make_batch(corpus, indices, pconf.masking, epoch);
      if (batch.targets.empty()) continue;
      const auto seqs = pointers(batch.items);
      const BatchEncoding enc = encode_batch(result.params, config, seqs);
      const ad::Tensor loss = masked_lm_loss(enc.hidden, result.params.token_embedding, batch.rows, batch.targets);
      optimizer.zero_grad();
      ad::backward(loss);
      optimizer.step();
      weighted_loss += loss.item() * static_cast<double>(batch.targets.size());
      masked_total += batch.targets.size();
    }
    result.loss_curve.push_back(masked_total ? weighted_loss / static_cast<double>(masked_total) : 0.0);
  }
  optimizer.zero_grad();
  return result;
}

MlmEvaluation evaluate_mlm(const EncoderParams& params, const EncoderConfig& config,
                           const std::vector<TokenSequence>& corpus, const MaskingSpec& masking) {
  ad::NoGradGuard no_grad;
  MlmEvaluation out;
  double loss_sum = 0.0;
  std::size_t correct = 0;
  constexpr std::size_t kChunk = 64;
  std::vector<std::size_t> all(corpus.size());
  std::iota(all.begin(), all.end(), 0);
  for (std::size_t start = 0; start < all.size(); start += kChunk) {
    const auto indices = std::span(all).subspan(start, std::min(kChunk, all.size() - start));
    const MaskedBatch batch = make_batch(corpus, indices, masking, 0);
    if (batch.targets.empty()) continue;
    const auto seqs = pointers(batch.items);
    const BatchEncoding enc = encode_batch(params, config, seqs);
    const ad::Tensor selected = ad::gather_rows(enc.hidden, batch.rows);
    const ad::Tensor logits = ad::matmul(selected, ad::transpose(params.token_embedding));
    loss_sum += ad::cross_entropy(logits, batch.targets).item() * static_cast<double>(batch.targets.size());
    const std::size_t vocab = logits.dim(1);
    for (std::size_t r = 0; r < batch.targets.size(); ++r) {
      const auto row = logits.data().subspan(r * vocab, vocab);
      const auto best = std::max_element(row.begin(), row.end()) - row.begin();
      if (best == batch.targets[r]) ++correct;
    }
    out.masked += batch.targets.size();
  }
  if (out.masked) {
    out.loss = loss_sum / static_cast<double>(out.masked);
    out.accuracy = static_cast<double>(correct) / static_cast<double>(out.masked);
  }
  return out;
}

}  // namespace emolab
