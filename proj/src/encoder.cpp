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

#include "encoder.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include <nlohmann/json.hpp>

#include "autodiff/ops.hpp"
#include "common.hpp"

namespace emolab {

using ad::Tensor;

std::string_view to_string(EncoderKind kind) { return kind == EncoderKind::Transformer ? "transformer" : "dan"; }

EncoderKind parse_encoder_kind(std::string_view name) {
  if (name == "transformer") return EncoderKind::Transformer;
  if (name == "dan") return EncoderKind::Dan;
  fail(ErrorCode::InvalidArgument, "unknown encoder kind '" + std::string(name) + "'");
}

void EncoderConfig::validate() const {
  auto bad = [](const std::string& why) { fail(ErrorCode::InvalidArgument, "encoder config: " + why); };
  if (hidden_dim == 0 || ffn_dim == 0 || max_len < 3 || vocab_size == 0) bad("dimensions must be positive");
  if (kind == EncoderKind::Transformer) {
    if (num_heads == 0 || hidden_dim % num_heads != 0) bad("hidden_dim must be divisible by num_heads");
    if (ffn_dim < hidden_dim) bad("ffn_dim must be at least hidden_dim");
  }
}

std::string EncoderConfig::to_json() const {
  nlohmann::ordered_json j;
  j["kind"] = to_string(kind);
  j["num_layers"] = num_layers;
  j["num_heads"] = num_heads;
  j["hidden_dim"] = hidden_dim;
  j["ffn_dim"] = ffn_dim;
  j["max_len"] = max_len;
  j["vocab_size"] = vocab_size;
  return j.dump(2) + "\n";
}

EncoderConfig EncoderConfig::from_json(std::string_view json_text) {
  EncoderConfig c;
  try {
    const auto j = nlohmann::json::parse(json_text);
    c.kind = parse_encoder_kind(j.value("kind", std::string("transformer")));
    c.num_layers = j.value("num_layers", c.num_layers);
    c.num_heads = j.value("num_heads", c.num_heads);
    c.hidden_dim = j.value("hidden_dim", c.hidden_dim);
    c.ffn_dim = j.value("ffn_dim", c.ffn_dim);
    c.max_len = j.value("max_len", c.max_len);
    c.vocab_size = j.value("vocab_size", c.vocab_size);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("encoder config: ") + e.what());
  }
  c.validate();
  return c;
}

ad::NamedTensors EncoderParams::named() const {
  ad::NamedTensors out;
  out.emplace_back("token_embedding", token_embedding);
  if (position_embedding.defined()) out.emplace_back("position_embedding", position_embedding);
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    const std::string p = "layer" + std::to_string(i) + ".";
    out.emplace_back(p + "attn.query", l.query);
    out.emplace_back(p + "attn.key", l.key);
    out.emplace_back(p + "attn.value", l.value);
    out.emplace_back(p + "attn.output", l.output);
    out.emplace_back(p + "attn_norm.gain", l.attn_norm_gain);
    out.emplace_back(p + "attn_norm.bias", l.attn_norm_bias);
    out.emplace_back(p + "ffn.in", l.ffn_in);
    out.emplace_back(p + "ffn.in_bias", l.ffn_in_bias);
    out.emplace_back(p + "ffn.out", l.ffn_out);
    out.emplace_back(p + "ffn.out_bias", l.ffn_out_bias);
    out.emplace_back(p + "ffn_norm.gain", l.ffn_norm_gain);
    out.emplace_back(p + "ffn_norm.bias", l.ffn_norm_bias);
  }
  if (dan_hidden.defined()) {
    out.emplace_back("dan.hidden", dan_hidden);
    out.emplace_back("dan.hidden_bias", dan_hidden_bias);
    out.emplace_back("dan.output", dan_output);
    out.emplace_back("dan.output_bias", dan_output_bias);
  }
  return out;
}

std::vector<Tensor> EncoderParams::tensors() const {
  std::vector<Tensor> out;
  for (auto& [name, t] : named()) out.push_back(t);
  return out;
}

EncoderParams EncoderParams::clone() const {
  auto copy = [](const Tensor& t) { return t.defined() ? t.clone() : Tensor(); };
  EncoderParams p;
  p.token_embedding = copy(token_embedding);
  p.position_embedding = copy(position_embedding);
  for (const auto& l : layers) {
    p.layers.push_back({copy(l.query), copy(l.key), copy(l.value), copy(l.output), copy(l.attn_norm_gain),
                        copy(l.attn_norm_bias), copy(l.ffn_in), copy(l.ffn_in_bias), copy(l.ffn_out),
                        copy(l.ffn_out_bias), copy(l.ffn_norm_gain), copy(l.ffn_norm_bias)});
  }
  p.dan_hidden = copy(dan_hidden);
  p.dan_hidden_bias = copy(dan_hidden_bias);
  p.dan_output = copy(dan_output);
  p.dan_output_bias = copy(dan_output_bias);
  return p;
}

void EncoderParams::set_requires_grad(bool on) const {
  for (auto t : tensors()) t.set_requires_grad(on);
}

namespace {

Tensor gaussian(ad::Shape shape, double stddev, Rng& rng) {
  std::vector<double> v(ad::numel(shape));
  for (double& x : v) x = stddev * rng.normal();
  return Tensor(std::move(shape), std::move(v), true);
}

Tensor xavier(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  return gaussian({fan_in, fan_out}, std::sqrt(2.0 / static_cast<double>(fan_in + fan_out)), rng);
}

void expect_shape(const Tensor& t, const ad::Shape& shape, const std::string& name) {
  if (!t.defined() || t.shape() != shape) {
    fail(ErrorCode::ShapeMismatch, "encoder tensor '" + name + "' has shape " +
                                       (t.defined() ? ad::shape_string(t.shape()) : "<missing>") + ", config needs " +
                                       ad::shape_string(shape));
  }
}

constexpr double kEmbeddingStddev = 0.02;

}  // namespace

EncoderParams init_encoder(const EncoderConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  const std::size_t h = config.hidden_dim, f = config.ffn_dim;
  EncoderParams p;
  p.token_embedding = gaussian({config.vocab_size, h}, kEmbeddingStddev, rng);
  if (config.kind == EncoderKind::Transformer) {
    p.position_embedding = gaussian({config.max_len, h}, kEmbeddingStddev, rng);
    for (std::size_t i = 0; i < config.num_layers; ++i) {
      TransformerLayerParams l;
      l.query = xavier(h, h, rng);
      l.key = xavier(h, h, rng);
      l.value = xavier(h, h, rng);
      l.output = xavier(h, h, rng);
      l.attn_norm_gain = Tensor::filled({h}, 1.0, true);
      l.attn_norm_bias = Tensor::zeros({h}, true);
      l.ffn_in = xavier(h, f, rng);
      l.ffn_in_bias = Tensor::zeros({f}, true);
      l.ffn_out = xavier(f, h, rng);
      l.ffn_out_bias = Tensor::zeros({h}, true);
      l.ffn_norm_gain = Tensor::filled({h}, 1.0, true);
      l.ffn_norm_bias = Tensor::zeros({h}, true);
      p.layers.push_back(std::move(l));
    }
  } else {
    p.dan_hidden = xavier(h, f, rng);
    p.dan_hidden_bias = Tensor::zeros({f}, true);
    p.dan_output = xavier(f, h, rng);
    p.dan_output_bias = Tensor::zeros({h}, true);
  }
  return p;
}

void check_params(const EncoderParams& params, const EncoderConfig& config) {
  config.validate();
  const std::size_t h = config.hidden_dim, f = config.ffn_dim;
  expect_shape(params.token_embedding, {config.vocab_size, h}, "token_embedding");
  if (config.kind == EncoderKind::Transformer) {
    expect_shape(params.position_embedding, {config.max_len, h}, "position_embedding");
    if (params.layers.size() != config.num_layers) {
      fail(ErrorCode::ShapeMismatch, "encoder has " + std::to_string(params.layers.size()) + " layers, config says " +
                                         std::to_string(config.num_layers));
    }
    for (const auto& l : params.layers) {
      expect_shape(l.query, {h, h}, "attn.query");
      expect_shape(l.key, {h, h}, "attn.key");
      expect_shape(l.value, {h, h}, "attn.value");
      expect_shape(l.output, {h, h}, "attn.output");
      expect_shape(l.attn_norm_gain, {h}, "attn_norm.gain");
      expect_shape(l.attn_norm_bias, {h}, "attn_norm.bias");
      expect_shape(l.ffn_in, {h, f}, "ffn.in");
      expect_shape(l.ffn_in_bias, {f}, "ffn.in_bias");
      expect_shape(l.ffn_out, {f, h}, "ffn.out");
      expect_shape(l.ffn_out_bias, {h}, "ffn.out_bias");
      expect_shape(l.ffn_norm_gain, {h}, "ffn_norm.gain");
      expect_shape(l.ffn_norm_bias, {h}, "ffn_norm.bias");
    }
  } else {
    expect_shape(params.dan_hidden, {h, f}, "dan.hidden");
    expect_shape(params.dan_hidden_bias, {f}, "dan.hidden_bias");
    expect_shape(params.dan_output, {f, h}, "dan.output");
    expect_shape(params.dan_output_bias, {h}, "dan.output_bias");
  }
}

Tensor multi_head_attention(const Tensor& x, const TransformerLayerParams& layer, std::span<const std::uint8_t> mask,
                            std::size_t batch, std::size_t seq, std::size_t heads, std::vector<double>* weights) {
  const Tensor q = ad::matmul(x, layer.query);
  const Tensor k = ad::matmul(x, layer.key);
  const Tensor v = ad::matmul(x, layer.value);
  const Tensor context = ad::attention(q, k, v, mask, batch, seq, heads, weights);
  return ad::matmul(context, layer.output);
}

namespace {

// Post-norm transformer stack over a packed [batch*seq x H] input.
Tensor run_transformer(const EncoderParams& params, const EncoderConfig& config, std::span<const std::int32_t> ids,
                       std::span<const std::uint8_t> mask, std::size_t batch, std::size_t seq,
                       AttentionTrace* trace) {
  std::vector<std::int32_t> positions(batch * seq);
  for (std::size_t i = 0; i < positions.size(); ++i) positions[i] = static_cast<std::int32_t>(i % seq);
  Tensor x = ad::add(ad::embedding_lookup(params.token_embedding, ids),
                     ad::embedding_lookup(params.position_embedding, positions));
  if (trace) {
    trace->heads = config.num_heads;
    trace->seq = seq;
    trace->layers.clear();
  }
  for (const auto& layer : params.layers) {
    std::vector<double>* weights = nullptr;
    if (trace) weights = &trace->layers.emplace_back();
    const Tensor attended = multi_head_attention(x, layer, mask, batch, seq, config.num_heads, weights);
    x = ad::layer_norm(ad::add(x, attended), layer.attn_norm_gain, layer.attn_norm_bias);
    const Tensor inner = ad::relu(ad::add(ad::matmul(x, layer.ffn_in), layer.ffn_in_bias));
    const Tensor ffn = ad::add(ad::matmul(inner, layer.ffn_out), layer.ffn_out_bias);
    x = ad::layer_norm(ad::add(x, ffn), layer.ffn_norm_gain, layer.ffn_norm_bias);
  }
  return x;
}

void check_sequence_fits(const TokenSequence& seq, const EncoderConfig& config) {
  validate_sequence(seq);
  if (seq.real_length() > config.max_len) {
    fail(ErrorCode::ShapeMismatch, "sequence of " + std::to_string(seq.real_length()) +
                                       " real tokens exceeds encoder max_len " + std::to_string(config.max_len));
  }
}

Tensor dan_pool(const EncoderParams& params, std::span<const TokenSequence* const> seqs) {
  std::vector<std::int32_t> content;
  std::vector<std::size_t> counts;
  for (const TokenSequence* s : seqs) {
    const std::size_t real = s->real_length();
    const std::size_t before = content.size();
    for (std::size_t i = 1; i + 1 < real; ++i) content.push_back(s->ids[i]);
    counts.push_back(content.size() - before);
    if (counts.back() == 0) fail(ErrorCode::EmptySequence, "DAN encoder needs at least one content token");
  }
  // Averaging as a constant [batch x tokens] matrix product.
  std::vector<double> averaging(seqs.size() * content.size(), 0.0);
  std::size_t offset = 0;
  for (std::size_t b = 0; b < seqs.size(); ++b) {
    for (std::size_t i = 0; i < counts[b]; ++i) {
      averaging[b * content.size() + offset + i] = 1.0 / static_cast<double>(counts[b]);
    }
    offset += counts[b];
  }
  const Tensor embedded = ad::embedding_lookup(params.token_embedding, content);
  const Tensor average = ad::matmul(Tensor({seqs.size(), content.size()}, std::move(averaging)), embedded);
  const Tensor hidden = ad::relu(ad::add(ad::matmul(average, params.dan_hidden), params.dan_hidden_bias));
  return ad::relu(ad::add(ad::matmul(hidden, params.dan_output), params.dan_output_bias));
}

}  // namespace

TransformerOutput encode_transformer(const EncoderParams& params, const EncoderConfig& config,
                                     const TokenSequence& seq, AttentionTrace* trace) {
  if (config.kind != EncoderKind::Transformer) fail(ErrorCode::InvalidArgument, "config is not a transformer");
  check_params(params, config);
  check_sequence_fits(seq, config);
  const std::size_t real = seq.real_length();
  const Tensor hidden = run_transformer(params, config, std::span(seq.ids).first(real),
                                        std::span(seq.mask).first(real), 1, real, trace);
  const std::size_t cls_row = 0;
  return {ad::pad_rows(hidden, seq.length()), ad::gather_rows(hidden, std::span(&cls_row, 1))};
}

Tensor encode_dan(const EncoderParams& params, const EncoderConfig& config, const TokenSequence& seq) {
  if (config.kind != EncoderKind::Dan) fail(ErrorCode::InvalidArgument, "config is not a DAN encoder");
  check_params(params, config);
  validate_sequence(seq);
  const TokenSequence* one[] = {&seq};
  return dan_pool(params, one);
}

BatchEncoding encode_batch(const EncoderParams& params, const EncoderConfig& config,
                           std::span<const TokenSequence* const> seqs, AttentionTrace* trace) {
  if (seqs.empty()) fail(ErrorCode::InvalidArgument, "empty batch");
  BatchEncoding out;
  out.batch = seqs.size();
  if (config.kind == EncoderKind::Dan) {
    for (const TokenSequence* s : seqs) validate_sequence(*s);
    out.pooled = dan_pool(params, seqs);
    return out;
  }
  std::size_t seq_len = 0;
  for (const TokenSequence* s : seqs) {
    check_sequence_fits(*s, config);
    seq_len = std::max(seq_len, s->real_length());
  }
  out.seq = seq_len;
  std::vector<std::int32_t> ids(seqs.size() * seq_len, token_id::kPad);
  std::vector<std::uint8_t> mask(seqs.size() * seq_len, 0);
  for (std::size_t b = 0; b < seqs.size(); ++b) {
    const std::size_t real = seqs[b]->real_length();
    std::copy_n(seqs[b]->ids.begin(), real, ids.begin() + static_cast<std::ptrdiff_t>(b * seq_len));
    std::fill_n(mask.begin() + static_cast<std::ptrdiff_t>(b * seq_len), real, std::uint8_t{1});
  }
  out.hidden = run_transformer(params, config, ids, mask, seqs.size(), seq_len, trace);
  std::vector<std::size_t> cls_rows(seqs.size());
  for (std::size_t b = 0; b < seqs.size(); ++b) cls_rows[b] = b * seq_len;
  out.pooled = ad::gather_rows(out.hidden, cls_rows);
  return out;
}

void save_encoder(const std::string& dir, const EncoderParams& params, const EncoderConfig& config) {
  check_params(params, config);
  std::filesystem::create_directories(dir);
  write_file(dir + "/encoder.json", config.to_json());
  ad::save_tensors(dir + "/encoder.bin", params.named());
}

std::pair<EncoderParams, EncoderConfig> load_encoder(const std::string& dir) {
  const EncoderConfig config = EncoderConfig::from_json(read_file(dir + "/encoder.json"));
  EncoderParams params = init_encoder(config, 0);
  ad::assign_by_name(params.named(), ad::load_tensors(dir + "/encoder.bin"));
  return {std::move(params), config};
}

}  // namespace emolab
