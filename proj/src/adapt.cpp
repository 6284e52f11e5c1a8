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

#include "adapt.hpp"

#include <cmath>
#include <filesystem>
#include <numeric>

#include <nlohmann/json.hpp>

#include "autodiff/adam.hpp"
#include "autodiff/ops.hpp"
#include "common.hpp"
#include "eval.hpp"

namespace emolab {

using ad::Tensor;

void HeadConfig::validate() const {
  if (num_classes < 2) fail(ErrorCode::InvalidArgument, "head needs at least two classes");
  if (input_dim == 0) fail(ErrorCode::InvalidArgument, "head input_dim must be positive");
  if (kind == HeadKind::Relu && inner_dim == 0) fail(ErrorCode::InvalidArgument, "head inner_dim must be positive");
}

std::string HeadConfig::to_json() const {
  nlohmann::ordered_json j;
  j["kind"] = kind == HeadKind::Linear ? "linear" : "relu";
  j["num_classes"] = num_classes;
  j["input_dim"] = input_dim;
  j["inner_dim"] = inner_dim;
  return j.dump(2) + "\n";
}

HeadConfig HeadConfig::from_json(std::string_view json_text) {
  HeadConfig c;
  try {
    const auto j = nlohmann::json::parse(json_text);
    const std::string kind = j.value("kind", std::string("linear"));
    if (kind != "linear" && kind != "relu") fail(ErrorCode::Parse, "unknown head kind '" + kind + "'");
    c.kind = kind == "linear" ? HeadKind::Linear : HeadKind::Relu;
    c.num_classes = j.value("num_classes", c.num_classes);
    c.input_dim = j.value("input_dim", c.input_dim);
    c.inner_dim = j.value("inner_dim", c.inner_dim);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("head config: ") + e.what());
  }
  c.validate();
  return c;
}

ad::NamedTensors ClassificationHead::named() const {
  ad::NamedTensors out;
  if (inner_weight.defined()) {
    out.emplace_back("head.inner_weight", inner_weight);
    out.emplace_back("head.inner_bias", inner_bias);
  }
  out.emplace_back("head.weight", weight);
  out.emplace_back("head.bias", bias);
  return out;
}

std::vector<Tensor> ClassificationHead::tensors() const {
  std::vector<Tensor> out;
  for (auto& [name, t] : named()) out.push_back(t);
  return out;
}

ClassificationHead ClassificationHead::clone() const {
  auto copy = [](const Tensor& t) { return t.defined() ? t.clone() : Tensor(); };
  return {copy(weight), copy(bias), copy(inner_weight), copy(inner_bias)};
}

ClassificationHead init_head(const HeadConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  auto gaussian = [&](std::size_t rows, std::size_t cols) {
    std::vector<double> v(rows * cols);
    const double stddev = std::sqrt(2.0 / static_cast<double>(rows + cols));
    for (double& x : v) x = stddev * rng.normal();
    return Tensor({rows, cols}, std::move(v), true);
  };
  ClassificationHead head;
  std::size_t width = config.input_dim;
  if (config.kind == HeadKind::Relu) {
    head.inner_weight = gaussian(config.inner_dim, config.input_dim);
    head.inner_bias = Tensor::zeros({config.inner_dim}, true);
    width = config.inner_dim;
  }
  head.weight = gaussian(config.num_classes, width);
  head.bias = Tensor::zeros({config.num_classes}, true);
  return head;
}

Tensor head_logits(const ClassificationHead& head, const Tensor& pooled) {
  Tensor h = pooled;
  if (head.inner_weight.defined()) {
    h = ad::relu(ad::add(ad::matmul(h, ad::transpose(head.inner_weight)), head.inner_bias));
  }
  if (h.rank() != 2 || h.dim(1) != head.weight.dim(1)) {
    fail(ErrorCode::ShapeMismatch, "head expects width " + std::to_string(head.weight.dim(1)) + ", got " +
                                       ad::shape_string(h.shape()));
  }
  return ad::add(ad::matmul(h, ad::transpose(head.weight)), head.bias);
}

std::string_view to_string(AdaptMode mode) { return mode == AdaptMode::Frozen ? "frozen" : "unfrozen"; }

AdaptMode parse_adapt_mode(std::string_view name) {
  if (name == "frozen") return AdaptMode::Frozen;
  if (name == "unfrozen") return AdaptMode::Unfrozen;
  fail(ErrorCode::InvalidArgument, "mode must be 'frozen' or 'unfrozen', got '" + std::string(name) + "'");
}

void FineTuneConfig::validate() const {
  if (batch_size == 0) fail(ErrorCode::InvalidArgument, "fine-tune batch_size must be positive");
  if (!(learning_rate > 0.0)) fail(ErrorCode::InvalidArgument, "fine-tune learning_rate must be positive");
}

Model Model::clone() const { return {encoder.clone(), encoder_config, head.clone(), head_config, vocab}; }

Tensor forward_classify(const EncoderParams& encoder, const EncoderConfig& config, const ClassificationHead& head,
                        const TokenSequence& seq) {
  const Tensor pooled = config.kind == EncoderKind::Transformer ? encode_transformer(encoder, config, seq).pooled
                                                                : encode_dan(encoder, config, seq);
  return ad::softmax(head_logits(head, pooled));
}

namespace {

constexpr std::size_t kInferenceChunk = 64;

std::vector<TokenSequence> encode_texts(const Model& model, const Dataset& data) {
  std::vector<TokenSequence> out;
  out.reserve(data.size());
  for (const auto& m : data.items) out.push_back(encode(m.text, model.vocab, model.encoder_config.max_len));
  return out;
}

std::vector<std::int32_t> labels_of(const Dataset& data, std::size_t num_classes) {
  std::vector<std::int32_t> out;
  for (const auto& m : data.items) {
    const std::int32_t y = class_index(m.label);
    if (static_cast<std::size_t>(y) >= num_classes) {
      fail(ErrorCode::LabelOutOfRange, "label " + std::string(to_string(m.label)) + " outside a " +
                                           std::to_string(num_classes) + "-class head");
    }
    out.push_back(y);
  }
  return out;
}

// Pooled encoder states for all sequences without recording history.
Tensor pooled_features(const Model& model, const std::vector<TokenSequence>& seqs) {
  ad::NoGradGuard no_grad;
  const std::size_t width = model.encoder_config.hidden_dim;
  std::vector<double> values;
  values.reserve(seqs.size() * width);
  for (std::size_t start = 0; start < seqs.size(); start += kInferenceChunk) {
    std::vector<const TokenSequence*> chunk;
    for (std::size_t i = start; i < std::min(seqs.size(), start + kInferenceChunk); ++i) chunk.push_back(&seqs[i]);
    const auto pooled = encode_batch(model.encoder, model.encoder_config, chunk).pooled;
    values.insert(values.end(), pooled.data().begin(), pooled.data().end());
  }
  return Tensor({seqs.size(), width}, std::move(values));
}

std::vector<Prediction> classify_features(const ClassificationHead& head, const Tensor& features) {
  ad::NoGradGuard no_grad;
  const Tensor probs = ad::softmax(head_logits(head, features));
  const std::size_t k = probs.dim(1);
  std::vector<Prediction> out(features.dim(0));
  for (std::size_t r = 0; r < out.size(); ++r) {
    const auto row = probs.data().subspan(r * k, k);
    out[r].probabilities.assign(row.begin(), row.end());
    out[r].class_id = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

double micro_f_of(const std::vector<Prediction>& preds, const std::vector<std::int32_t>& golds, std::size_t k) {
  std::vector<std::size_t> p, g;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    p.push_back(preds[i].class_id);
    g.push_back(static_cast<std::size_t>(golds[i]));
  }
  return metrics(confusion(p, g, k)).micro_f;
}

std::vector<double> inverse_frequency_weights(const std::vector<std::int32_t>& labels, std::size_t k) {
  std::vector<double> counts(k, 0.0), weights(k, 1.0);
  for (auto y : labels) counts[static_cast<std::size_t>(y)] += 1.0;
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] > 0) weights[c] = static_cast<double>(labels.size()) / (static_cast<double>(k) * counts[c]);
  }
  return weights;
}

}  // namespace

FineTuneResult fine_tune(const Model& initial, const Dataset& train, const Dataset& val, const FineTuneConfig& fconf) {
  fconf.validate();
  if (train.empty()) fail(ErrorCode::EmptyDataset, "fine-tune training set is empty");
  if (val.empty()) fail(ErrorCode::EmptyDataset, "fine-tune validation set is empty");
  check_params(initial.encoder, initial.encoder_config);
  if (initial.head_config.input_dim != initial.encoder_config.hidden_dim) {
    fail(ErrorCode::ShapeMismatch, "head input_dim differs from encoder hidden_dim");
  }
  const std::size_t k = initial.head_config.num_classes;
  const auto train_labels = labels_of(train, k);
  const auto val_labels = labels_of(val, k);

  FineTuneResult result{initial.clone(), {}, false};
  Model& model = result.model;
  const bool frozen = fconf.mode == AdaptMode::Frozen;
  const std::string before = encoder_fingerprint(model.encoder);
  model.encoder.set_requires_grad(!frozen);
  std::vector<Tensor> trainable = model.head.tensors();
  for (auto& t : trainable) t.set_requires_grad(true);
  if (!frozen) {
    for (auto& t : model.encoder.tensors()) trainable.push_back(t);
  }
  ad::Adam optimizer(trainable, {.learning_rate = fconf.learning_rate});
  const std::vector<double> class_weights =
      fconf.class_weighted ? inverse_frequency_weights(train_labels, k) : std::vector<double>{};

  const auto train_seqs = encode_texts(model, train);
  const auto val_seqs = encode_texts(model, val);
  Tensor train_features, val_features;
  if (frozen) {
    train_features = pooled_features(model, train_seqs);
    val_features = pooled_features(model, val_seqs);
  }

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(fconf.seed);
  for (std::size_t epoch = 1; epoch <= fconf.epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += fconf.batch_size) {
      const auto idx = std::span(order).subspan(start, std::min(fconf.batch_size, order.size() - start));
      std::vector<std::int32_t> labels;
      for (auto i : idx) labels.push_back(train_labels[i]);
      Tensor pooled;
      if (frozen) {
        pooled = ad::gather_rows(train_features, idx);
      } else {
        std::vector<const TokenSequence*> seqs;
        for (auto i : idx) seqs.push_back(&train_seqs[i]);
        pooled = encode_batch(model.encoder, model.encoder_config, seqs).pooled;
      }
      const Tensor loss = ad::cross_entropy(head_logits(model.head, pooled), labels, class_weights);
      optimizer.zero_grad();
      ad::backward(loss);
      optimizer.step();
      loss_sum += loss.item();
      ++batches;
    }
    const Tensor features = frozen ? val_features : pooled_features(model, val_seqs);
    result.history.push_back({epoch, loss_sum / static_cast<double>(batches),
                              micro_f_of(classify_features(model.head, features), val_labels, k)});
  }
  optimizer.zero_grad();
  result.encoder_unchanged = encoder_fingerprint(model.encoder) == before;
  return result;
}

Prediction predict(const Model& model, std::string_view text) { return predict_all(model, {std::string(text)}).front(); }

std::vector<Prediction> predict_all(const Model& model, const std::vector<std::string>& texts) {
  std::vector<TokenSequence> seqs;
  seqs.reserve(texts.size());
  for (const auto& t : texts) {
    TokenSequence seq = encode(clean_text(t), model.vocab, model.encoder_config.max_len);
    // The averaging encoder needs a content token; empty text reads as one unknown word.
    if (model.encoder_config.kind == EncoderKind::Dan && seq.real_length() <= 2) {
      seq = encode("x", Vocabulary(), model.encoder_config.max_len);
    }
    seqs.push_back(std::move(seq));
  }
  return classify_features(model.head, pooled_features(model, seqs));
}

std::string encoder_fingerprint(const EncoderParams& params) { return ad::serialize_tensors(params.named()); }

void save_model(const std::string& dir, const Model& model) {
  std::filesystem::create_directories(dir);
  save_encoder(dir, model.encoder, model.encoder_config);
  write_file(dir + "/head.json", model.head_config.to_json());
  ad::save_tensors(dir + "/head.bin", model.head.named());
  write_file(dir + "/vocab.json", model.vocab.to_json());
  nlohmann::ordered_json manifest;
  manifest["format"] = "emolab-model";
  manifest["version"] = 1;
  manifest["encoder_config"] = "encoder.json";
  manifest["encoder_tensors"] = "encoder.bin";
  manifest["head_config"] = "head.json";
  manifest["head_tensors"] = "head.bin";
  manifest["vocabulary"] = "vocab.json";
  nlohmann::ordered_json classes = nlohmann::ordered_json::array();
  for (auto c : kAllEmotionClasses) classes.push_back(to_string(c));
  manifest["classes"] = classes;
  write_file(dir + "/manifest.json", manifest.dump(2) + "\n");
}

Model load_model(const std::string& dir) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_file(dir + "/manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, "model manifest: " + std::string(e.what()));
  }
  if (manifest.value("format", "") != "emolab-model") fail(ErrorCode::Parse, "'" + dir + "' is not a model bundle");
  auto [encoder, encoder_config] = load_encoder(dir);
  const HeadConfig head_config = HeadConfig::from_json(read_file(dir + "/" + manifest.value("head_config", "head.json")));
  ClassificationHead head = init_head(head_config, 0);
  ad::assign_by_name(head.named(), ad::load_tensors(dir + "/" + manifest.value("head_tensors", "head.bin")));
  Vocabulary vocab = Vocabulary::from_json(read_file(dir + "/" + manifest.value("vocabulary", "vocab.json")));
  if (vocab.size() != encoder_config.vocab_size) {
    fail(ErrorCode::ShapeMismatch, "vocabulary size differs from encoder vocab_size");
  }
  if (head_config.input_dim != encoder_config.hidden_dim) {
    fail(ErrorCode::ShapeMismatch, "head input_dim differs from encoder hidden_dim");
  }
  return {std::move(encoder), encoder_config, std::move(head), head_config, std::move(vocab)};
}

}  // namespace emolab
