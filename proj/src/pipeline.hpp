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
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "adapt.hpp"
#include "corpus.hpp"
#include "encoder.hpp"
#include "eval.hpp"
#include "pretrain.hpp"

namespace emolab {

/// Input paths left empty resolve to the matching file in output_dir, except
/// vocab, pretrained and map, which are optional.
struct RunPaths {
  std::string output_dir = ".";
  std::string corpus;      // raw.jsonl
  std::string lexicon;     // lexicon.json
  std::string train;       // train.jsonl
  std::string val;         // val.jsonl
  std::string test;        // test.jsonl
  std::string unlabeled;   // unlabeled.txt, one sentence per line
  std::string vocab;       // optional vocab.json
  std::string pretrained;  // optional encoder directory written by pretrain
  std::string model;       // model
  std::string benchmark;   // benchmark.jsonl
  std::string map;         // optional taxonomy map, standard map when empty
  std::string frozen_history;
  std::string unfrozen_history;
};

struct SynthConfig {
  std::size_t messages = 6000;
  std::size_t unlabeled = 20000;
  std::size_t benchmark = 600;
  std::size_t keywords_per_class = 25;
  std::size_t fillers = 400;
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  RunPaths paths;
  SplitSpec split;
  std::size_t vocab_min_count = 1;
  std::size_t vocab_max_size = 20000;
  EncoderConfig encoder;
  PretrainConfig pretrain;
  FineTuneConfig finetune;
  HeadKind head = HeadKind::Linear;
  std::size_t head_inner_dim = 256;
  std::vector<std::size_t> sweep_batch_sizes{50, 100, 150, 200, 250};
  std::vector<std::size_t> ablation_sizes{200, 2000, 20000};
  bool ablation_on_benchmark = false;
  SynthConfig synth;

  /// Missing keys keep their defaults; throws InvalidArgument on bad values.
  static RunConfig from_json(std::string_view json_text);
  std::string to_json() const;

  std::string output(std::string_view name) const;
  std::string corpus_path() const;
  std::string lexicon_path() const;
  std::string train_path() const;
  std::string val_path() const;
  std::string test_path() const;
  std::string unlabeled_path() const;
  std::string model_path() const;
  std::string benchmark_path() const;
};

using LogFn = std::function<void(std::string_view)>;

/// Writes raw.jsonl, lexicon.json, unlabeled.txt, benchmark.jsonl and map.json.
void cmd_synthesize(const RunConfig& config, const LogFn& log);
/// raw corpus + lexicon -> train/val/test.jsonl and stats.json.
void cmd_prepare(const RunConfig& config, const LogFn& log);
/// Training texts (plus the unlabeled corpus when set) -> vocab.json.
void cmd_build_vocab(const RunConfig& config, const LogFn& log);
/// Unlabeled corpus -> pretrained/ (encoder, vocab, loss_curve.json).
void cmd_pretrain(const RunConfig& config, const LogFn& log);
/// -> model/, history.json, test_metrics.json.
void cmd_finetune(const RunConfig& config, const LogFn& log);
/// One fine-tune per batch size -> sweep.csv.
void cmd_sweep(const RunConfig& config, const LogFn& log);
/// model + benchmark -> report.json and report.csv.
void cmd_evaluate(const RunConfig& config, const LogFn& log);
/// -> curve.csv and curve.svg.
void cmd_ablate(const RunConfig& config, const LogFn& log);
/// Paired t-test over the per-epoch validation scores of a frozen and an
/// unfrozen history -> comparison.json.
void cmd_report(const RunConfig& config, const LogFn& log);

/// Vocabulary and encoder a fine-tune starts from: the pretrained encoder when
/// paths.pretrained is set, a seeded random one otherwise.
Model initial_model(const RunConfig& config, const Dataset& train);

FineTuneConfig finetune_config(const RunConfig& config);

std::string history_to_json(const std::vector<EpochRecord>& history, AdaptMode mode, bool encoder_unchanged);
std::vector<EpochRecord> history_from_json(std::string_view json_text);

std::string ablation_csv(const std::vector<AblationPoint>& curve);
std::string ablation_svg(const std::vector<AblationPoint>& curve);

}  // namespace emolab
