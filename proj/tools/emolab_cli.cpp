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

// Command-line front end. Every command builds a run configuration from
// --config plus flag overrides and hands it to the shared library.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "emolab/emolab.h"
#include "json.hpp"

namespace {

using nlohmann::json;

struct Flags {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
  std::string mode, encoder, head;
  std::size_t batch_size = 0, epochs = 0;
  double lr = 0.0;
  std::vector<std::size_t> sizes, batch_sizes;
  std::string corpus, lexicon, train, val, test, unlabeled, vocab, pretrained, model, benchmark, map;
  std::string frozen_history, unfrozen_history;
  std::vector<std::string> texts;
};

void log_line(const char* line, void*) { std::fprintf(stderr, "%s\n", line); }

// Returns false and prints a message when the config file cannot be used.
bool build_config(const Flags& f, const CLI::App& app, json& cfg) {
  cfg = json::object();
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) {
      std::fprintf(stderr, "error: cannot read config file %s\n", f.config.c_str());
      return false;
    }
    try {
      in >> cfg;
    } catch (const json::exception& e) {
      std::fprintf(stderr, "error: config file %s: %s\n", f.config.c_str(), e.what());
      return false;
    }
    if (!cfg.is_object()) {
      std::fprintf(stderr, "error: config file %s is not a JSON object\n", f.config.c_str());
      return false;
    }
  }
  auto given = [&](const char* name) { return app.count(name) > 0; };
  if (given("--seed")) cfg["seed"] = f.seed;
  if (given("--threads")) cfg["threads"] = f.threads;
  if (given("--out")) cfg["paths"]["output_dir"] = f.out;
  const std::pair<const char*, const std::string*> paths[] = {
      {"corpus", &f.corpus},         {"lexicon", &f.lexicon},
      {"train", &f.train},           {"val", &f.val},
      {"test", &f.test},             {"unlabeled", &f.unlabeled},
      {"vocab", &f.vocab},           {"pretrained", &f.pretrained},
      {"model", &f.model},           {"benchmark", &f.benchmark},
      {"map", &f.map},               {"frozen_history", &f.frozen_history},
      {"unfrozen_history", &f.unfrozen_history}};
  for (const auto& [key, value] : paths) {
    if (!value->empty()) cfg["paths"][key] = *value;
  }
  if (given("--mode")) cfg["finetune"]["mode"] = f.mode;
  if (given("--batch-size")) cfg["finetune"]["batch_size"] = f.batch_size;
  if (given("--epochs")) cfg["finetune"]["epochs"] = f.epochs;
  if (given("--lr")) cfg["finetune"]["lr"] = f.lr;
  if (given("--head")) cfg["finetune"]["head"] = f.head;
  if (given("--encoder")) cfg["encoder"]["kind"] = f.encoder;
  if (given("--sizes")) cfg["ablation"]["sizes"] = f.sizes;
  if (given("--batch-sizes")) cfg["sweep"]["batch_sizes"] = f.batch_sizes;
  return true;
}

int report(emolab_context* ctx, emolab_status status) {
  if (status != EMOLAB_OK) std::fprintf(stderr, "error: %s\n", emolab_last_error(ctx));
  return static_cast<int>(status);
}

int predict(emolab_context* ctx, const Flags& f, const json& cfg) {
  std::string dir = f.model;
  if (dir.empty()) {
    const std::string out = cfg.contains("paths") ? cfg["paths"].value("output_dir", ".") : ".";
    dir = cfg.contains("paths") ? cfg["paths"].value("model", "") : "";
    if (dir.empty()) dir = out + "/model";
  }
  emolab_model* model = nullptr;
  if (emolab_status s = emolab_model_load(ctx, dir.c_str(), &model); s != EMOLAB_OK) return report(ctx, s);
  std::vector<std::string> texts = f.texts;
  if (texts.empty()) {
    for (std::string line; std::getline(std::cin, line);) texts.push_back(line);
  }
  const std::size_t k = emolab_model_num_classes(model);
  std::vector<double> probs(k);
  int rc = 0;
  for (const auto& text : texts) {
    std::size_t id = 0;
    if (emolab_status s = emolab_model_predict(ctx, model, text.c_str(), &id, probs.data(), k); s != EMOLAB_OK) {
      rc = report(ctx, s);
      break;
    }
    std::printf("%s", emolab_class_name(id));
    for (double p : probs) std::printf("\t%.6f", p);
    std::printf("\n");
  }
  emolab_model_destroy(model);
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"emolab: emotion classification by pretraining and fine-tuning small encoders"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags f;
  app.add_option("--config", f.config, "JSON run configuration");
  app.add_option("--out", f.out, "Output directory");
  app.add_option("--seed", f.seed, "Root seed");
  app.add_option("--threads", f.threads, "Worker threads for sweep and ablate")->check(CLI::PositiveNumber);
  app.add_option("--mode", f.mode, "Adaptation mode")->check(CLI::IsMember({"frozen", "unfrozen"}));
  app.add_option("--encoder", f.encoder, "Encoder kind")->check(CLI::IsMember({"transformer", "dan"}));
  app.add_option("--head", f.head, "Classification head")->check(CLI::IsMember({"linear", "relu"}));
  app.add_option("--batch-size", f.batch_size, "Fine-tuning batch size")->check(CLI::PositiveNumber);
  app.add_option("--epochs", f.epochs, "Fine-tuning epochs")->check(CLI::PositiveNumber);
  app.add_option("--lr", f.lr, "Fine-tuning learning rate")->check(CLI::PositiveNumber);
  app.add_option("--sizes", f.sizes, "Ablation training-set sizes")->delimiter(',');
  app.add_option("--batch-sizes", f.batch_sizes, "Sweep batch sizes")->delimiter(',');
  app.add_option("--corpus", f.corpus, "Raw messages (JSON lines)");
  app.add_option("--lexicon", f.lexicon, "Hashtag lexicon (JSON)");
  app.add_option("--train", f.train, "Training split");
  app.add_option("--val", f.val, "Validation split");
  app.add_option("--test", f.test, "Test split");
  app.add_option("--unlabeled", f.unlabeled, "Unlabeled sentences, one per line");
  app.add_option("--vocab", f.vocab, "Vocabulary (JSON)");
  app.add_option("--pretrained", f.pretrained, "Pretrained encoder directory");
  app.add_option("--model", f.model, "Model bundle directory");
  app.add_option("--benchmark", f.benchmark, "Benchmark items (JSON lines)");
  app.add_option("--map", f.map, "Benchmark taxonomy map (JSON)");
  app.add_option("--frozen-history", f.frozen_history, "history.json of a frozen run");
  app.add_option("--unfrozen-history", f.unfrozen_history, "history.json of an unfrozen run");

  using CommandFn = emolab_status (*)(emolab_context*, const char*);
  const std::vector<std::tuple<const char*, const char*, CommandFn>> commands = {
      {"synth", "Generate a synthetic corpus, lexicon, benchmark and unlabeled text", emolab_synthesize},
      {"prepare", "Label, clean, deduplicate and split raw messages", emolab_prepare},
      {"vocab", "Build a vocabulary from the training split", emolab_build_vocab},
      {"pretrain", "Masked-token pretraining on unlabeled text", emolab_pretrain},
      {"finetune", "Fine-tune an encoder and classification head", emolab_finetune},
      {"sweep", "Fine-tune once per batch size", emolab_sweep},
      {"evaluate", "Score a model on a three-class benchmark", emolab_evaluate},
      {"ablate", "Fine-tune on nested subsamples of the training split", emolab_ablate},
      {"report", "Paired t-test of frozen against unfrozen validation scores", emolab_report},
  };
  for (const auto& [name, help, fn] : commands) app.add_subcommand(name, help);
  CLI::App* pred = app.add_subcommand("predict", "Classify texts given with --text or read from stdin");
  pred->add_option("--text", f.texts, "Text to classify (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return EMOLAB_USAGE;
  }

  json cfg;
  if (!build_config(f, app, cfg)) return EMOLAB_USAGE;
  emolab_context* ctx = emolab_context_create();
  if (ctx == nullptr) return EMOLAB_INTERNAL;
  emolab_context_set_log(ctx, log_line, nullptr);

  int rc = EMOLAB_USAGE;
  if (pred->parsed()) {
    rc = predict(ctx, f, cfg);
  } else {
    const std::string config_text = cfg.dump();
    for (const auto& [name, help, fn] : commands) {
      if (app.got_subcommand(name)) rc = report(ctx, fn(ctx, config_text.c_str()));
    }
  }
  emolab_context_destroy(ctx);
  return rc;
}
