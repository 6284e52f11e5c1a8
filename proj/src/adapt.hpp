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

#include "autodiff/checkpoint.hpp"
#include "corpus.hpp"
#include "encoder.hpp"
#include "tokenizer.hpp"

namespace emolab {

enum class HeadKind {
  Linear,  // logits = W h + b
  Relu,    // logits = W relu(U h + c) + b
};

struct HeadConfig {
  HeadKind kind = HeadKind::Linear;
  std::size_t num_classes = kNumEmotionClasses;
  std::size_t input_dim = 64;
  std::size_t inner_dim = 256;

  void validate() const;
  std::string to_json() const;
  static HeadConfig from_json(std::string_view json_text);
};

struct ClassificationHead {
  ad::Tensor weight;  // K x H (K x P for the ReLU head)
  ad::Tensor bias;    // K
  ad::Tensor inner_weight;  // P x H, ReLU head only
  ad::Tensor inner_bias;    // P

  ad::NamedTensors named() const;
  std::vector<ad::Tensor> tensors() const;
  ClassificationHead clone() const;
};

ClassificationHead init_head(const HeadConfig& config, std::uint64_t seed);

/// [batch x H] pooled states -> [batch x K] logits.
ad::Tensor head_logits(const ClassificationHead& head, const ad::Tensor& pooled);

enum class AdaptMode { Frozen, Unfrozen };

std::string_view to_string(AdaptMode mode);
AdaptMode parse_adapt_mode(std::string_view name);

struct FineTuneConfig {
  AdaptMode mode = AdaptMode::Unfrozen;
  std::size_t epochs = 2;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  bool class_weighted = false;

  void validate() const;
};

/// Everything needed to classify raw text.
struct Model {
  EncoderParams encoder;
  EncoderConfig encoder_config;
  ClassificationHead head;
  HeadConfig head_config;
  Vocabulary vocab;

  Model clone() const;
};

/// [1 x K] class probabilities for one sequence.
ad::Tensor forward_classify(const EncoderParams& encoder, const EncoderConfig& config, const ClassificationHead& head,
                            const TokenSequence& seq);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_micro_f = 0.0;
};

struct FineTuneResult {
  Model model;
  std::vector<EpochRecord> history;
  bool encoder_unchanged = false;
};

/// Cross-entropy training with Adam. Frozen mode trains only the head and
/// leaves every encoder value untouched; unfrozen mode trains both jointly.
FineTuneResult fine_tune(const Model& initial, const Dataset& train, const Dataset& val, const FineTuneConfig& fconf);

struct Prediction {
  std::size_t class_id = 0;
  std::vector<double> probabilities;

  EmotionClass label() const { return static_cast<EmotionClass>(class_id); }
};

/// Cleans the text, encodes it and returns the arg-max class; ties go to the
/// earliest class in canonical order.
Prediction predict(const Model& model, std::string_view text);
std::vector<Prediction> predict_all(const Model& model, const std::vector<std::string>& texts);

/// Stable byte image of the encoder values; equal images mean equal encoders.
std::string encoder_fingerprint(const EncoderParams& params);

void save_model(const std::string& dir, const Model& model);
Model load_model(const std::string& dir);

}  // namespace emolab
