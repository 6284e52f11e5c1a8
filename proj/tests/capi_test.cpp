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
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "emolab/emolab.h"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t line_count(const fs::path& p) {
  const std::string s = slurp(p);
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

class CApi : public ::testing::Test {
 protected:
  void SetUp() override {
    ctx_ = emolab_context_create();
    emolab_context_set_log(
        ctx_, [](const char* line, void* data) { static_cast<std::vector<std::string>*>(data)->push_back(line); },
        &log_);
    dir_ = fs::temp_directory_path() / ("emolab_capi_" + std::string(
                                            ::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
  }
  void TearDown() override {
    emolab_context_destroy(ctx_);
    fs::remove_all(dir_);
  }

  std::string error() const { return emolab_last_error(ctx_); }

  emolab_context* ctx_ = nullptr;
  std::vector<std::string> log_;
  fs::path dir_;
};

TEST_F(CApi, BadConfigIsUsageError) {
  EXPECT_EQ(emolab_prepare(ctx_, "{not json"), EMOLAB_USAGE);
  EXPECT_FALSE(error().empty());
  EXPECT_EQ(emolab_prepare(ctx_, R"({"split": {"train": 0.9, "val": 0.2, "test": 0.1}})"), EMOLAB_USAGE);
  EXPECT_EQ(emolab_finetune(ctx_, R"({"finetune": {"mode": "thawed"}})"), EMOLAB_USAGE);
  EXPECT_EQ(emolab_prepare(nullptr, "{}"), EMOLAB_USAGE);
}

TEST_F(CApi, PrepareFixture) {
  const json cfg = {{"seed", 3},
                    {"paths",
                     {{"output_dir", dir_.string()},
                      {"corpus", EMOLAB_TEST_DATA "/fixture_raw.jsonl"},
                      {"lexicon", EMOLAB_TEST_DATA "/fixture_lexicon.json"}}}};
  ASSERT_EQ(emolab_prepare(ctx_, cfg.dump().c_str()), EMOLAB_OK) << error();
  const json stats = json::parse(slurp(dir_ / "stats.json"));
  EXPECT_EQ(stats["input"], 12);
  EXPECT_EQ(stats["total"], 7);
  EXPECT_EQ(stats["dropped"]["retweets"], 1);
  EXPECT_EQ(stats["dropped"]["unlabeled"], 1);
  EXPECT_EQ(stats["dropped"]["ambiguous"], 1);
  EXPECT_EQ(stats["dropped"]["empty_after_cleaning"], 1);
  EXPECT_EQ(stats["dropped"]["duplicates"], 1);
  // 7 items at 0.555/0.111/0.334: floor(3.885), floor(0.777), remainder.
  EXPECT_EQ(stats["splits"]["train"], 3);
  EXPECT_EQ(stats["splits"]["val"], 0);
  EXPECT_EQ(stats["splits"]["test"], 4);
  const std::vector<int> counts{2, 1, 2, 2};
  for (int c = 0; c < 4; ++c) EXPECT_EQ(stats["classes"][c]["count"], counts[c]) << c;
  EXPECT_EQ(stats["classes"][0]["class"], "happy_active");
  EXPECT_EQ(line_count(dir_ / "train.jsonl") + line_count(dir_ / "val.jsonl") + line_count(dir_ / "test.jsonl"), 7u);

  std::string all = slurp(dir_ / "train.jsonl") + slurp(dir_ / "val.jsonl") + slurp(dir_ / "test.jsonl");
  EXPECT_NE(all.find(R"("text":"check so cool")"), std::string::npos) << all;
  EXPECT_NE(all.find(R"("text":"soo tired of it")"), std::string::npos) << all;
  EXPECT_EQ(all.find('#'), std::string::npos);
  EXPECT_FALSE(log_.empty());
}

TEST_F(CApi, MissingLexiconNamesThePath) {
  const std::string missing = (dir_ / "nope.json").string();
  const json cfg = {{"paths",
                     {{"output_dir", dir_.string()},
                      {"corpus", EMOLAB_TEST_DATA "/fixture_raw.jsonl"},
                      {"lexicon", missing}}}};
  EXPECT_EQ(emolab_prepare(ctx_, cfg.dump().c_str()), EMOLAB_DATA);
  EXPECT_NE(error().find(missing), std::string::npos) << error();
}

TEST_F(CApi, CleanTextBuffer) {
  std::size_t needed = 0;
  ASSERT_EQ(emolab_clean_text(ctx_, "@u HELLO http://x.io/abc", nullptr, 0, &needed), EMOLAB_OK);
  std::string buf(needed, '\0');
  EXPECT_EQ(emolab_clean_text(ctx_, "@u HELLO http://x.io/abc", buf.data(), needed - 1, &needed), EMOLAB_USAGE);
  ASSERT_EQ(emolab_clean_text(ctx_, "@u HELLO http://x.io/abc", buf.data(), needed, &needed), EMOLAB_OK);
  EXPECT_STREQ(buf.c_str(), "hello");
}

TEST_F(CApi, PairedTTest) {
  const double a[] = {1, 2, 3, 4}, b[] = {1, 2, 3, 5};
  double t = 0, p = 0;
  ASSERT_EQ(emolab_paired_ttest(ctx_, a, b, 4, &t, &p), EMOLAB_OK);
  EXPECT_NEAR(std::fabs(t), 1.0, 1e-12);
  EXPECT_NEAR(p, 0.391, 5e-4);
  EXPECT_EQ(emolab_paired_ttest(ctx_, a, a, 4, &t, &p), EMOLAB_DATA);
}

TEST_F(CApi, ClassNames) {
  EXPECT_STREQ(emolab_class_name(0), "happy_active");
  EXPECT_STREQ(emolab_class_name(3), "unhappy_inactive");
  EXPECT_EQ(emolab_class_name(4), nullptr);
}

// Tiny settings so a whole run takes a few seconds.
json small_config(const fs::path& dir) {
  return {{"seed", 5},
          {"paths", {{"output_dir", dir.string()}}},
          {"synth", {{"messages", 500}, {"unlabeled", 200}, {"benchmark", 60}, {"keywords_per_class", 6},
                     {"fillers", 40}}},
          {"encoder", {{"num_layers", 1}, {"num_heads", 2}, {"hidden_dim", 16}, {"ffn_dim", 32}, {"max_len", 24}}},
          {"pretrain", {{"epochs", 1}, {"batch_size", 16}}},
          {"finetune", {{"epochs", 2}, {"batch_size", 16}, {"lr", 0.003}, {"head_inner_dim", 8}}}};
}

TEST_F(CApi, EndToEnd) {
  json cfg = small_config(dir_);
  const std::string d = dir_.string();
  ASSERT_EQ(emolab_synthesize(ctx_, cfg.dump().c_str()), EMOLAB_OK) << error();
  for (const char* f : {"raw.jsonl", "lexicon.json", "unlabeled.txt", "benchmark.jsonl", "map.json"}) {
    EXPECT_TRUE(fs::exists(dir_ / f)) << f;
  }
  ASSERT_EQ(emolab_prepare(ctx_, cfg.dump().c_str()), EMOLAB_OK) << error();
  cfg["paths"]["unlabeled"] = d + "/unlabeled.txt";
  ASSERT_EQ(emolab_build_vocab(ctx_, cfg.dump().c_str()), EMOLAB_OK) << error();
  cfg["paths"]["vocab"] = d + "/vocab.json";
  ASSERT_EQ(emolab_pretrain(ctx_, cfg.dump().c_str()), EMOLAB_OK) << error();
  EXPECT_EQ(json::parse(slurp(dir_ / "pretrained/loss_curve.json")).size(), 1u);

  json frozen = cfg;
  frozen["paths"]["output_dir"] = d + "/frozen";
  frozen["paths"]["train"] = d + "/train.jsonl";
  frozen["paths"]["val"] = d + "/val.jsonl";
  frozen["paths"]["test"] = d + "/test.jsonl";
  frozen["paths"]["pretrained"] = d + "/pretrained";
  frozen["finetune"]["mode"] = "frozen";
  ASSERT_EQ(emolab_finetune(ctx_, frozen.dump().c_str()), EMOLAB_OK) << error();
  const json hist = json::parse(slurp(dir_ / "frozen/history.json"));
  EXPECT_EQ(hist["mode"], "frozen");
  EXPECT_EQ(hist["encoder_unchanged"], true);
  EXPECT_EQ(hist["epochs"].size(), 2u);
  EXPECT_EQ(slurp(dir_ / "frozen/model/encoder.bin"), slurp(dir_ / "pretrained/encoder.bin"));

  json unfrozen = frozen;
  unfrozen["paths"]["output_dir"] = d + "/unfrozen";
  unfrozen["finetune"]["mode"] = "unfrozen";
  unfrozen["finetune"]["head"] = "relu";
  ASSERT_EQ(emolab_finetune(ctx_, unfrozen.dump().c_str()), EMOLAB_OK) << error();
  EXPECT_EQ(json::parse(slurp(dir_ / "unfrozen/history.json"))["encoder_unchanged"], false);

  json eval = cfg;
  eval["paths"]["model"] = d + "/unfrozen/model";
  ASSERT_EQ(emolab_evaluate(ctx_, eval.dump().c_str()), EMOLAB_OK) << error();
  const json report = json::parse(slurp(dir_ / "report.json"));
  std::vector<std::string> rows;
  for (const auto& r : report["rows"]) rows.push_back(r["class"]);
  EXPECT_EQ(rows, (std::vector<std::string>{"joy", "anger", "sadness", "micro_average"}));
  EXPECT_EQ(line_count(dir_ / "report.csv"), 5u);

  json rep = cfg;
  rep["paths"]["frozen_history"] = d + "/frozen/history.json";
  rep["paths"]["unfrozen_history"] = d + "/unfrozen/history.json";
  const emolab_status st = emolab_report(ctx_, rep.dump().c_str());
  if (st == EMOLAB_OK) {
    const json cmp = json::parse(slurp(dir_ / "comparison.json"));
    EXPECT_EQ(cmp["df"], 1);
  } else {
    // Identical per-epoch differences are a degenerate sample.
    EXPECT_EQ(st, EMOLAB_DATA);
  }

  emolab_model* model = nullptr;
  ASSERT_EQ(emolab_model_load(ctx_, (d + "/unfrozen/model").c_str(), &model), EMOLAB_OK) << error();
  EXPECT_EQ(emolab_model_num_classes(model), 4u);
  std::size_t cls = 9;
  double probs[4] = {};
  ASSERT_EQ(emolab_model_predict(ctx_, model, "whatever this is", &cls, probs, 4), EMOLAB_OK);
  EXPECT_LT(cls, 4u);
  EXPECT_NEAR(probs[0] + probs[1] + probs[2] + probs[3], 1.0, 1e-9);
  EXPECT_EQ(emolab_model_predict(ctx_, model, "x", &cls, probs, 2), EMOLAB_USAGE);
  emolab_model_destroy(model);
  EXPECT_EQ(emolab_model_load(ctx_, (d + "/missing").c_str(), &model), EMOLAB_DATA);
}

TEST_F(CApi, SweepAndAblate) {
  json cfg = small_config(dir_);
  ASSERT_EQ(emolab_synthesize(ctx_, cfg.dump().c_str()), EMOLAB_OK) << error();
  ASSERT_EQ(emolab_prepare(ctx_, cfg.dump().c_str()), EMOLAB_OK) << error();
  cfg["finetune"]["epochs"] = 1;
  cfg["sweep"]["batch_sizes"] = {50, 100};
  cfg["threads"] = 2;
  ASSERT_EQ(emolab_sweep(ctx_, cfg.dump().c_str()), EMOLAB_OK) << error();
  EXPECT_EQ(line_count(dir_ / "sweep.csv"), 3u);
  EXPECT_EQ(slurp(dir_ / "sweep.csv").substr(0, 13), "batch_size,va");

  cfg["ablation"]["sizes"] = {50, 200};
  ASSERT_EQ(emolab_ablate(ctx_, cfg.dump().c_str()), EMOLAB_OK) << error();
  EXPECT_EQ(line_count(dir_ / "curve.csv"), 3u);
  EXPECT_NE(slurp(dir_ / "curve.svg").find("<svg"), std::string::npos);

  cfg["ablation"]["sizes"] = {100000};
  EXPECT_EQ(emolab_ablate(ctx_, cfg.dump().c_str()), EMOLAB_DATA);
}

TEST_F(CApi, EmptyBenchmark) {
  json cfg = small_config(dir_);
  ASSERT_EQ(emolab_synthesize(ctx_, cfg.dump().c_str()), EMOLAB_OK) << error();
  ASSERT_EQ(emolab_prepare(ctx_, cfg.dump().c_str()), EMOLAB_OK) << error();
  cfg["finetune"]["epochs"] = 1;
  ASSERT_EQ(emolab_finetune(ctx_, cfg.dump().c_str()), EMOLAB_OK) << error();
  std::ofstream(dir_ / "empty.jsonl").close();
  cfg["paths"]["benchmark"] = (dir_ / "empty.jsonl").string();
  EXPECT_EQ(emolab_evaluate(ctx_, cfg.dump().c_str()), EMOLAB_DATA);
  EXPECT_NE(error().find("empty"), std::string::npos) << error();
}

}  // namespace
