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

#include "pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "common.hpp"
#include "synthetic.hpp"

namespace emolab {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

template <typename T>
void read_into(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void read_path(const json& j, const char* key, std::string& out) { read_into(j, key, out); }

std::string or_default(const std::string& path, const RunConfig& c, std::string_view name) {
  return path.empty() ? c.output(name) : path;
}

void require_path(const std::string& path) {
  if (!fs::exists(path)) fail(ErrorCode::Io, "path does not exist: " + path);
}

void prepare_output(const RunConfig& c) {
  std::error_code ec;
  fs::create_directories(c.paths.output_dir, ec);
  if (ec || !fs::is_directory(c.paths.output_dir)) {
    fail(ErrorCode::Io, "cannot create output directory: " + c.paths.output_dir);
  }
}

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

std::vector<std::string> texts_of(const Dataset& d) {
  std::vector<std::string> out;
  out.reserve(d.size());
  for (const auto& m : d.items) out.push_back(m.text);
  return out;
}

std::string class_counts_json(const ClassCounts& counts) {
  ordered_json j;
  for (auto c : kAllEmotionClasses) j[std::string(to_string(c))] = counts[class_index(c)];
  return j.dump();
}

BenchmarkTaxonomyMap load_map(const RunConfig& c) {
  if (c.paths.map.empty()) return BenchmarkTaxonomyMap::standard();
  return BenchmarkTaxonomyMap::from_json(read_file(c.paths.map));
}

}  // namespace

RunConfig RunConfig::from_json(std::string_view json_text) {
  RunConfig c;
  try {
    const json j = json::parse(json_text);
    if (!j.is_object()) fail(ErrorCode::InvalidArgument, "run config must be a JSON object");
    read_into(j, "seed", c.seed);
    read_into(j, "threads", c.threads);
    if (j.contains("paths")) {
      const json& p = j.at("paths");
      read_path(p, "output_dir", c.paths.output_dir);
      read_path(p, "corpus", c.paths.corpus);
      read_path(p, "lexicon", c.paths.lexicon);
      read_path(p, "train", c.paths.train);
      read_path(p, "val", c.paths.val);
      read_path(p, "test", c.paths.test);
      read_path(p, "unlabeled", c.paths.unlabeled);
      read_path(p, "vocab", c.paths.vocab);
      read_path(p, "pretrained", c.paths.pretrained);
      read_path(p, "model", c.paths.model);
      read_path(p, "benchmark", c.paths.benchmark);
      read_path(p, "map", c.paths.map);
      read_path(p, "frozen_history", c.paths.frozen_history);
      read_path(p, "unfrozen_history", c.paths.unfrozen_history);
    }
    if (j.contains("split")) {
      const json& s = j.at("split");
      auto frac = [&](const char* key, Fraction& f) {
        if (!s.contains(key)) return;
        const json& v = s.at(key);
        f = Fraction::parse(v.is_string() ? v.get<std::string>() : v.dump());
      };
      frac("train", c.split.train);
      frac("val", c.split.val);
      frac("test", c.split.test);
    }
    if (j.contains("vocab")) {
      read_into(j.at("vocab"), "min_count", c.vocab_min_count);
      read_into(j.at("vocab"), "max_size", c.vocab_max_size);
    }
    if (j.contains("encoder")) {
      // The vocabulary decides vocab_size later; a placeholder keeps validation happy.
      json e = j.at("encoder");
      if (!e.contains("vocab_size")) e["vocab_size"] = 1;
      c.encoder = EncoderConfig::from_json(e.dump());
    }
    if (j.contains("pretrain")) {
      const json& p = j.at("pretrain");
      read_into(p, "epochs", c.pretrain.epochs);
      read_into(p, "batch_size", c.pretrain.batch_size);
      read_into(p, "lr", c.pretrain.learning_rate);
      read_into(p, "mask_prob", c.pretrain.masking.mask_prob);
    }
    if (j.contains("finetune")) {
      const json& f = j.at("finetune");
      if (f.contains("mode")) c.finetune.mode = parse_adapt_mode(f.at("mode").get<std::string>());
      read_into(f, "epochs", c.finetune.epochs);
      read_into(f, "batch_size", c.finetune.batch_size);
      read_into(f, "lr", c.finetune.learning_rate);
      read_into(f, "class_weighted", c.finetune.class_weighted);
      if (f.contains("head")) {
        const std::string kind = f.at("head").get<std::string>();
        if (kind != "linear" && kind != "relu") fail(ErrorCode::InvalidArgument, "unknown head kind '" + kind + "'");
        c.head = kind == "linear" ? HeadKind::Linear : HeadKind::Relu;
      }
      read_into(f, "head_inner_dim", c.head_inner_dim);
    }
    if (j.contains("sweep")) read_into(j.at("sweep"), "batch_sizes", c.sweep_batch_sizes);
    if (j.contains("ablation")) {
      read_into(j.at("ablation"), "sizes", c.ablation_sizes);
      read_into(j.at("ablation"), "on_benchmark", c.ablation_on_benchmark);
    }
    if (j.contains("synth")) {
      const json& s = j.at("synth");
      read_into(s, "messages", c.synth.messages);
      read_into(s, "unlabeled", c.synth.unlabeled);
      read_into(s, "benchmark", c.synth.benchmark);
      read_into(s, "keywords_per_class", c.synth.keywords_per_class);
      read_into(s, "fillers", c.synth.fillers);
    }
    c.pretrain.validate();
    c.finetune.validate();
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("run config: ") + e.what());
  } catch (const Error& e) {
    fail(ErrorCode::InvalidArgument, std::string("run config: ") + e.what());
  }
  if (c.threads == 0) fail(ErrorCode::InvalidArgument, "threads must be positive");
  return c;
}

std::string RunConfig::to_json() const {
  ordered_json j;
  j["seed"] = seed;
  j["threads"] = threads;
  j["paths"] = {{"output_dir", paths.output_dir}, {"corpus", paths.corpus},
                {"lexicon", paths.lexicon},       {"train", paths.train},
                {"val", paths.val},               {"test", paths.test},
                {"unlabeled", paths.unlabeled},   {"vocab", paths.vocab},
                {"pretrained", paths.pretrained}, {"model", paths.model},
                {"benchmark", paths.benchmark},   {"map", paths.map},
                {"frozen_history", paths.frozen_history}, {"unfrozen_history", paths.unfrozen_history}};
  j["split"] = {{"train", split.train.to_string()}, {"val", split.val.to_string()}, {"test", split.test.to_string()}};
  j["vocab"] = {{"min_count", vocab_min_count}, {"max_size", vocab_max_size}};
  j["encoder"] = ordered_json::parse(encoder.to_json());
  j["pretrain"] = {{"epochs", pretrain.epochs},
                   {"batch_size", pretrain.batch_size},
                   {"lr", pretrain.learning_rate},
                   {"mask_prob", pretrain.masking.mask_prob}};
  j["finetune"] = {{"mode", std::string(emolab::to_string(finetune.mode))},
                   {"epochs", finetune.epochs},
                   {"batch_size", finetune.batch_size},
                   {"lr", finetune.learning_rate},
                   {"class_weighted", finetune.class_weighted},
                   {"head", head == HeadKind::Linear ? "linear" : "relu"},
                   {"head_inner_dim", head_inner_dim}};
  j["sweep"] = {{"batch_sizes", sweep_batch_sizes}};
  j["ablation"] = {{"sizes", ablation_sizes}, {"on_benchmark", ablation_on_benchmark}};
  j["synth"] = {{"messages", synth.messages},
                {"unlabeled", synth.unlabeled},
                {"benchmark", synth.benchmark},
                {"keywords_per_class", synth.keywords_per_class},
                {"fillers", synth.fillers}};
  return j.dump(2) + "\n";
}

std::string RunConfig::output(std::string_view name) const { return (fs::path(paths.output_dir) / name).string(); }
std::string RunConfig::corpus_path() const { return or_default(paths.corpus, *this, "raw.jsonl"); }
std::string RunConfig::lexicon_path() const { return or_default(paths.lexicon, *this, "lexicon.json"); }
std::string RunConfig::train_path() const { return or_default(paths.train, *this, "train.jsonl"); }
std::string RunConfig::val_path() const { return or_default(paths.val, *this, "val.jsonl"); }
std::string RunConfig::test_path() const { return or_default(paths.test, *this, "test.jsonl"); }
std::string RunConfig::unlabeled_path() const { return or_default(paths.unlabeled, *this, "unlabeled.txt"); }
std::string RunConfig::model_path() const { return or_default(paths.model, *this, "model"); }
std::string RunConfig::benchmark_path() const { return or_default(paths.benchmark, *this, "benchmark.jsonl"); }

void cmd_synthesize(const RunConfig& c, const LogFn& log) {
  prepare_output(c);
  const std::uint64_t seed = c.seed + seed_offset::kSynthetic;
  const SyntheticLanguage lang({c.synth.keywords_per_class, c.synth.fillers, seed});
  const HashtagLexicon lexicon = example_lexicon();

  std::string raw;
  for (const auto& m : lang.raw_messages(c.synth.messages, seed + 1, lexicon)) {
    ordered_json j;
    j["id"] = m.id;
    j["text"] = m.text;
    raw += j.dump() + "\n";
  }
  write_file(c.output("raw.jsonl"), raw);
  write_file(c.output("lexicon.json"), lexicon.to_json());

  std::string unlabeled;
  SentenceOptions pairs;
  pairs.min_keywords = 2;
  for (const auto& s : lang.unlabeled(c.synth.unlabeled, seed + 2, pairs)) unlabeled += s + "\n";
  write_file(c.output("unlabeled.txt"), unlabeled);

  std::string bench;
  for (const auto& b : lang.benchmark(c.synth.benchmark, seed + 3)) {
    ordered_json j;
    j["text"] = b.text;
    j["label"] = b.label;
    bench += j.dump() + "\n";
  }
  write_file(c.output("benchmark.jsonl"), bench);
  write_file(c.output("map.json"), BenchmarkTaxonomyMap::standard().to_json());
  log("synthesized " + std::to_string(c.synth.messages) + " messages, " + std::to_string(c.synth.unlabeled) +
      " unlabeled sentences, " + std::to_string(c.synth.benchmark) + " benchmark items");
}

void cmd_prepare(const RunConfig& c, const LogFn& log) {
  const std::string corpus = c.corpus_path(), lexicon_path = c.lexicon_path();
  SplitSpec spec = c.split;
  spec.seed = c.seed + seed_offset::kSplit;
  spec.validate();
  require_path(corpus);
  require_path(lexicon_path);
  prepare_output(c);

  const HashtagLexicon lexicon = HashtagLexicon::from_json(read_file(lexicon_path));
  const BuiltDataset built = build_dataset(read_raw_jsonl(corpus), lexicon);
  const Splits splits = split_dataset(built.dataset, spec);
  write_file(c.output("train.jsonl"), dataset_to_jsonl(splits.train));
  write_file(c.output("val.jsonl"), dataset_to_jsonl(splits.val));
  write_file(c.output("test.jsonl"), dataset_to_jsonl(splits.test));

  ordered_json stats;
  ordered_json rows = ordered_json::array();
  const ClassCounts tr = splits.train.counts(), va = splits.val.counts(), te = splits.test.counts();
  for (auto cls : kAllEmotionClasses) {
    const auto i = static_cast<std::size_t>(class_index(cls));
    ordered_json row;
    row["class"] = std::string(to_string(cls));
    row["hashtags"] = lexicon.tags(cls);
    row["count"] = built.counts[i];
    row["train"] = tr[i];
    row["val"] = va[i];
    row["test"] = te[i];
    rows.push_back(row);
  }
  stats["classes"] = rows;
  stats["total"] = built.dataset.size();
  stats["splits"] = {{"train", splits.train.size()}, {"val", splits.val.size()}, {"test", splits.test.size()}};
  stats["dropped"] = {{"retweets", built.stats.retweets},
                      {"unlabeled", built.stats.unlabeled},
                      {"ambiguous", built.stats.ambiguous},
                      {"empty_after_cleaning", built.stats.empty_after_cleaning},
                      {"duplicates", built.stats.duplicates}};
  stats["input"] = built.stats.input;
  write_file(c.output("stats.json"), stats.dump(2) + "\n");
  log("prepared " + std::to_string(built.dataset.size()) + " of " + std::to_string(built.stats.input) +
      " messages: train " + std::to_string(splits.train.size()) + ", val " + std::to_string(splits.val.size()) +
      ", test " + std::to_string(splits.test.size()) + " " + class_counts_json(built.counts));
}

void cmd_build_vocab(const RunConfig& c, const LogFn& log) {
  const std::string train = c.train_path();
  require_path(train);
  if (!c.paths.unlabeled.empty()) require_path(c.paths.unlabeled);
  prepare_output(c);
  std::vector<std::string> corpus = texts_of(read_dataset_jsonl(train));
  if (!c.paths.unlabeled.empty()) {
    for (auto& line : read_lines(c.paths.unlabeled)) corpus.push_back(std::move(line));
  }
  const Vocabulary vocab = build_vocab(corpus, c.vocab_min_count, c.vocab_max_size);
  write_file(c.output("vocab.json"), vocab.to_json());
  log("vocabulary of " + std::to_string(vocab.size()) + " tokens from " + std::to_string(corpus.size()) + " texts");
}

void cmd_pretrain(const RunConfig& c, const LogFn& log) {
  const std::string unlabeled = c.unlabeled_path();
  require_path(unlabeled);
  if (!c.paths.vocab.empty()) require_path(c.paths.vocab);
  prepare_output(c);
  const std::vector<std::string> lines = read_lines(unlabeled);
  const Vocabulary vocab = c.paths.vocab.empty() ? build_vocab(lines, c.vocab_min_count, c.vocab_max_size)
                                                 : Vocabulary::from_json(read_file(c.paths.vocab));
  EncoderConfig econf = c.encoder;
  econf.vocab_size = vocab.size();
  econf.validate();
  std::vector<TokenSequence> seqs;
  seqs.reserve(lines.size());
  for (const auto& l : lines) seqs.push_back(encode(clean_text(l), vocab, econf.max_len));

  PretrainConfig pconf = c.pretrain;
  pconf.masking.seed = c.seed + seed_offset::kMasking;
  pconf.order_seed = c.seed + seed_offset::kPretrainOrder;
  const PretrainResult result =
      pretrain_mlm(init_encoder(econf, c.seed + seed_offset::kEncoderInit), econf, seqs, pconf);

  const std::string dir = c.output("pretrained");
  save_encoder(dir, result.params, econf);
  write_file(dir + "/vocab.json", vocab.to_json());
  ordered_json curve = result.loss_curve;
  write_file(dir + "/loss_curve.json", curve.dump(2) + "\n");
  for (std::size_t e = 0; e < result.loss_curve.size(); ++e) {
    log("pretrain epoch " + std::to_string(e + 1) + " masked-token loss " + fixed(result.loss_curve[e]));
  }
}

Model initial_model(const RunConfig& c, const Dataset& train) {
  Model m;
  if (!c.paths.pretrained.empty()) {
    require_path(c.paths.pretrained);
    auto [params, econf] = load_encoder(c.paths.pretrained);
    m.encoder = std::move(params);
    m.encoder_config = econf;
    m.vocab = Vocabulary::from_json(read_file(c.paths.pretrained + "/vocab.json"));
    if (m.vocab.size() != econf.vocab_size) {
      fail(ErrorCode::ShapeMismatch, "pretrained vocabulary does not match its encoder");
    }
  } else {
    m.vocab = c.paths.vocab.empty() ? build_vocab(texts_of(train), c.vocab_min_count, c.vocab_max_size)
                                    : Vocabulary::from_json(read_file(c.paths.vocab));
    m.encoder_config = c.encoder;
    m.encoder_config.vocab_size = m.vocab.size();
    m.encoder_config.validate();
    m.encoder = init_encoder(m.encoder_config, c.seed + seed_offset::kEncoderInit);
  }
  m.head_config.kind = c.head;
  m.head_config.num_classes = kNumEmotionClasses;
  m.head_config.input_dim = m.encoder_config.hidden_dim;
  m.head_config.inner_dim = c.head_inner_dim;
  m.head_config.validate();
  m.head = init_head(m.head_config, c.seed + seed_offset::kHeadInit);
  return m;
}

FineTuneConfig finetune_config(const RunConfig& c) {
  FineTuneConfig f = c.finetune;
  f.seed = c.seed + seed_offset::kFineTuneOrder;
  f.validate();
  return f;
}

std::string history_to_json(const std::vector<EpochRecord>& history, AdaptMode mode, bool encoder_unchanged) {
  ordered_json j;
  j["mode"] = std::string(to_string(mode));
  j["encoder_unchanged"] = encoder_unchanged;
  ordered_json epochs = ordered_json::array();
  for (const auto& r : history) {
    epochs.push_back({{"epoch", r.epoch}, {"train_loss", r.train_loss}, {"val_micro_f", r.val_micro_f}});
  }
  j["epochs"] = epochs;
  return j.dump(2) + "\n";
}

std::vector<EpochRecord> history_from_json(std::string_view json_text) {
  std::vector<EpochRecord> out;
  try {
    const json j = json::parse(json_text);
    for (const auto& e : j.at("epochs")) {
      out.push_back({e.at("epoch").get<std::size_t>(), e.at("train_loss").get<double>(),
                     e.at("val_micro_f").get<double>()});
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, std::string("history: ") + e.what());
  }
  return out;
}

namespace {

struct Splits3 {
  Dataset train, val, test;
};

Splits3 load_splits(const RunConfig& c) {
  const std::string tr = c.train_path(), va = c.val_path(), te = c.test_path();
  require_path(tr);
  require_path(va);
  require_path(te);
  return {read_dataset_jsonl(tr), read_dataset_jsonl(va), read_dataset_jsonl(te)};
}

std::vector<std::string> class_names() {
  std::vector<std::string> out;
  for (auto c : kAllEmotionClasses) out.emplace_back(to_string(c));
  return out;
}

}  // namespace

void cmd_finetune(const RunConfig& c, const LogFn& log) {
  if (!c.paths.vocab.empty()) require_path(c.paths.vocab);
  const Splits3 data = load_splits(c);
  prepare_output(c);
  const Model initial = initial_model(c, data.train);
  const FineTuneConfig fconf = finetune_config(c);
  const FineTuneResult tuned = fine_tune(initial, data.train, data.val, fconf);
  for (const auto& r : tuned.history) {
    log("epoch " + std::to_string(r.epoch) + " train loss " + fixed(r.train_loss) + " val micro-F " +
        fixed(r.val_micro_f));
  }
  if (fconf.mode == AdaptMode::Frozen) {
    log(std::string("encoder unchanged: ") + (tuned.encoder_unchanged ? "true" : "false"));
  }
  save_model(c.model_path(), tuned.model);
  write_file(c.output("history.json"), history_to_json(tuned.history, fconf.mode, tuned.encoder_unchanged));
  const MetricsReport test = evaluate_dataset(tuned.model, data.test);
  write_file(c.output("test_metrics.json"), metrics_to_json(test, class_names()));
  log("test micro-F " + fixed(test.micro_f));
}

void cmd_sweep(const RunConfig& c, const LogFn& log) {
  if (c.sweep_batch_sizes.empty()) fail(ErrorCode::InvalidArgument, "sweep needs at least one batch size");
  if (!c.paths.vocab.empty()) require_path(c.paths.vocab);
  const Splits3 data = load_splits(c);
  prepare_output(c);
  const Model initial = initial_model(c, data.train);
  const std::size_t n = c.sweep_batch_sizes.size();
  std::vector<double> val(n), test(n);
  std::vector<std::exception_ptr> errors(n);
  auto run = [&](std::size_t i) {
    try {
      FineTuneConfig f = finetune_config(c);
      f.batch_size = c.sweep_batch_sizes[i];
      f.validate();
      const FineTuneResult tuned = fine_tune(initial, data.train, data.val, f);
      val[i] = tuned.history.empty() ? 0.0 : tuned.history.back().val_micro_f;
      test[i] = evaluate_dataset(tuned.model, data.test).micro_f;
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  const std::size_t threads = std::min(c.threads, n);
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < threads; ++w) {
    workers.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += threads) run(i);
    });
  }
  for (auto& t : workers) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::string csv = "batch_size,val_micro_f,test_micro_f\n";
  for (std::size_t i = 0; i < n; ++i) {
    csv += std::to_string(c.sweep_batch_sizes[i]) + "," + fixed(val[i]) + "," + fixed(test[i]) + "\n";
    log("batch size " + std::to_string(c.sweep_batch_sizes[i]) + ": val micro-F " + fixed(val[i]) +
        ", test micro-F " + fixed(test[i]));
  }
  write_file(c.output("sweep.csv"), csv);
}

void cmd_evaluate(const RunConfig& c, const LogFn& log) {
  const std::string model_dir = c.model_path(), bench = c.benchmark_path();
  require_path(model_dir);
  require_path(bench);
  if (!c.paths.map.empty()) require_path(c.paths.map);
  prepare_output(c);
  const Model model = load_model(model_dir);
  const BenchmarkTaxonomyMap map = load_map(c);
  const BenchmarkReport report = evaluate_benchmark(model, read_benchmark_jsonl(bench), map);

  ordered_json rows = ordered_json::array();
  for (std::size_t i = 0; i < report.class_names.size(); ++i) {
    const auto& m = report.metrics.per_class[i];
    rows.push_back({{"class", report.class_names[i]},
                    {"precision", m.precision},
                    {"recall", m.recall},
                    {"f_score", m.f_score},
                    {"support", m.support}});
  }
  rows.push_back({{"class", "micro_average"},
                  {"precision", report.metrics.micro_precision},
                  {"recall", report.metrics.micro_recall},
                  {"f_score", report.metrics.micro_f},
                  {"support", report.metrics.n}});
  ordered_json confusion = ordered_json::array();
  for (std::size_t g = 0; g < report.matrix.num_classes; ++g) {
    ordered_json row = ordered_json::array();
    for (std::size_t p = 0; p < report.matrix.num_classes; ++p) row.push_back(report.matrix.at(g, p));
    confusion.push_back(row);
  }
  ordered_json j;
  j["rows"] = rows;
  j["confusion"] = confusion;
  j["unassigned"] = report.matrix.unassigned;
  j["accuracy"] = report.metrics.accuracy;
  write_file(c.output("report.json"), j.dump(2) + "\n");
  write_file(c.output("report.csv"), benchmark_report_csv(report));
  for (std::size_t i = 0; i < report.class_names.size(); ++i) {
    log(report.class_names[i] + " F " + fixed(report.metrics.per_class[i].f_score));
  }
  log("micro-average F " + fixed(report.metrics.micro_f) + " over " + std::to_string(report.metrics.n) + " items");
}

std::string ablation_csv(const std::vector<AblationPoint>& curve) {
  std::string csv = "size,micro_f\n";
  for (const auto& p : curve) csv += std::to_string(p.size) + "," + fixed(p.micro_f) + "\n";
  return csv;
}

std::string ablation_svg(const std::vector<AblationPoint>& curve) {
  constexpr double kW = 480, kH = 320, kPad = 48;
  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"480\" height=\"320\" viewBox=\"0 0 480 320\">\n";
  svg += "<rect width=\"480\" height=\"320\" fill=\"white\"/>\n";
  svg += "<line x1=\"48\" y1=\"272\" x2=\"456\" y2=\"272\" stroke=\"black\"/>\n";
  svg += "<line x1=\"48\" y1=\"272\" x2=\"48\" y2=\"24\" stroke=\"black\"/>\n";
  svg += "<text x=\"252\" y=\"308\" font-size=\"12\" text-anchor=\"middle\">fine-tuning examples (log scale)</text>\n";
  svg += "<text x=\"14\" y=\"148\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 148)\">micro-F</text>\n";
  if (curve.empty()) return svg + "</svg>\n";
  double lo = std::log10(static_cast<double>(curve.front().size));
  double hi = lo;
  for (const auto& p : curve) {
    lo = std::min(lo, std::log10(static_cast<double>(p.size)));
    hi = std::max(hi, std::log10(static_cast<double>(p.size)));
  }
  const double span = hi > lo ? hi - lo : 1.0;
  std::string points;
  std::string marks;
  for (const auto& p : curve) {
    const double x = kPad + (kW - 2 * kPad) * (std::log10(static_cast<double>(p.size)) - lo) / span;
    const double y = (kH - kPad) - (kH - 2 * kPad) * p.micro_f;
    points += fixed(x, 1) + "," + fixed(y, 1) + " ";
    marks += "<circle cx=\"" + fixed(x, 1) + "\" cy=\"" + fixed(y, 1) + "\" r=\"3\"/>\n";
    marks += "<text x=\"" + fixed(x, 1) + "\" y=\"288\" font-size=\"10\" text-anchor=\"middle\">" +
             std::to_string(p.size) + "</text>\n";
  }
  points.pop_back();
  svg += "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"" + points + "\"/>\n";
  return svg + marks + "</svg>\n";
}

void cmd_ablate(const RunConfig& c, const LogFn& log) {
  if (c.ablation_sizes.empty()) fail(ErrorCode::InvalidArgument, "ablation needs at least one size");
  if (!c.paths.vocab.empty()) require_path(c.paths.vocab);
  const Splits3 data = load_splits(c);
  if (c.ablation_on_benchmark) require_path(c.benchmark_path());
  if (!c.paths.map.empty()) require_path(c.paths.map);
  prepare_output(c);
  AblationSetup setup{initial_model(c, data.train), data.train, data.val, data.test, finetune_config(c),
                      c.seed + seed_offset::kAblationSample, std::nullopt, load_map(c)};
  if (c.ablation_on_benchmark) setup.benchmark = read_benchmark_jsonl(c.benchmark_path());
  const auto curve = ablation(c.ablation_sizes, setup, c.threads);
  write_file(c.output("curve.csv"), ablation_csv(curve));
  write_file(c.output("curve.svg"), ablation_svg(curve));
  for (const auto& p : curve) log("size " + std::to_string(p.size) + ": micro-F " + fixed(p.micro_f));
  log(std::string("non-decreasing within 0.02: ") + (non_decreasing(curve, 0.02) ? "true" : "false"));
}

void cmd_report(const RunConfig& c, const LogFn& log) {
  const std::string frozen = or_default(c.paths.frozen_history, c, "history_frozen.json");
  const std::string unfrozen = or_default(c.paths.unfrozen_history, c, "history_unfrozen.json");
  require_path(frozen);
  require_path(unfrozen);
  prepare_output(c);
  const auto hf = history_from_json(read_file(frozen));
  const auto hu = history_from_json(read_file(unfrozen));
  if (hf.size() != hu.size()) fail(ErrorCode::LengthMismatch, "histories have different numbers of epochs");
  std::vector<double> a, b;
  for (const auto& r : hu) a.push_back(r.val_micro_f);
  for (const auto& r : hf) b.push_back(r.val_micro_f);
  const TTestResult t = paired_ttest(a, b);
  ordered_json j;
  j["unfrozen_val_micro_f"] = a;
  j["frozen_val_micro_f"] = b;
  j["mean_difference"] = t.mean_difference;
  j["t"] = t.t;
  j["df"] = t.df;
  j["p"] = t.p;
  write_file(c.output("comparison.json"), j.dump(2) + "\n");
  log("unfrozen - frozen mean difference " + fixed(t.mean_difference) + ", t = " + fixed(t.t, 4) + ", df = " +
      std::to_string(t.df) + ", p = " + fixed(t.p, 6));
}

}  // namespace emolab
