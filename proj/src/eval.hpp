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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "adapt.hpp"
#include "corpus.hpp"

namespace emolab {

/// Rows are gold classes, columns predicted classes. `unassigned` counts, per
/// gold class, predictions that fell outside every class.
struct ConfusionMatrix {
  std::size_t num_classes = 0;
  std::vector<std::size_t> counts;
  std::vector<std::size_t> unassigned;

  explicit ConfusionMatrix(std::size_t k = 0) : num_classes(k), counts(k * k, 0), unassigned(k, 0) {}

  std::size_t& at(std::size_t gold, std::size_t pred) { return counts[gold * num_classes + pred]; }
  std::size_t at(std::size_t gold, std::size_t pred) const { return counts[gold * num_classes + pred]; }
  std::size_t total() const;
  std::size_t trace() const;
};

ConfusionMatrix confusion(std::span<const std::size_t> preds, std::span<const std::size_t> golds,
                          std::size_t num_classes);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f_score = 0.0;
  std::size_t support = 0;
};

struct MetricsReport {
  std::vector<ClassMetrics> per_class;
  double micro_precision = 0.0;
  double micro_recall = 0.0;
  double micro_f = 0.0;
  double accuracy = 0.0;
  std::size_t n = 0;
};

/// Per-class and micro-averaged scores; zero whenever a denominator is zero.
MetricsReport metrics(const ConfusionMatrix& matrix);

/// Benchmark label -> emotion classes counted as a correct prediction. Entry
/// order is the report row order.
class BenchmarkTaxonomyMap {
 public:
  struct Entry {
    std::string name;
    std::vector<EmotionClass> accepts;
  };

  BenchmarkTaxonomyMap() = default;
  /// Throws InvalidSpec if two entries accept the same emotion class.
  explicit BenchmarkTaxonomyMap(std::vector<Entry> entries);

  /// joy -> {happy_active, happy_inactive}, anger -> {unhappy_active},
  /// sadness -> {unhappy_inactive}.
  static BenchmarkTaxonomyMap standard();
  static BenchmarkTaxonomyMap from_json(std::string_view json_text);
  std::string to_json() const;

  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  /// Throws UnknownBenchmarkClass.
  std::size_t index_of(std::string_view name) const;
  /// Benchmark class whose accept set holds `c`, if any.
  std::optional<std::size_t> target_of(EmotionClass c) const;

 private:
  std::vector<Entry> entries_;
};

bool map_benchmark(std::string_view gold, EmotionClass pred, const BenchmarkTaxonomyMap& map);

struct BenchmarkItem {
  std::string text;
  std::string label;
};

std::vector<BenchmarkItem> read_benchmark_jsonl(const std::string& path);

struct BenchmarkReport {
  std::vector<std::string> class_names;
  ConfusionMatrix matrix;
  MetricsReport metrics;
};

/// Scores emotion-class predictions against benchmark labels through the map.
BenchmarkReport score_benchmark(std::span<const EmotionClass> preds, std::span<const std::string> golds,
                                const BenchmarkTaxonomyMap& map);

BenchmarkReport evaluate_benchmark(const Model& model, const std::vector<BenchmarkItem>& items,
                                   const BenchmarkTaxonomyMap& map);

/// Four-class report for a labelled dataset.
MetricsReport evaluate_dataset(const Model& model, const Dataset& data);

struct TTestResult {
  double t = 0.0;
  double p = 1.0;
  std::size_t df = 0;
  double mean_difference = 0.0;
};

/// Two-tailed paired Student t-test on a - b.
TTestResult paired_ttest(std::span<const double> a, std::span<const double> b);

/// n items drawn by a seeded permutation, kept in their original order.
/// Nested: a smaller n under the same seed yields a subset of a larger one.
Dataset subsample(const Dataset& data, std::size_t n, std::uint64_t seed);

struct AblationSetup {
  Model initial;
  Dataset train;
  Dataset val;
  Dataset test;
  FineTuneConfig fconf;
  std::uint64_t sample_seed = 0;
  // When present, points are scored on the benchmark instead of `test`.
  std::optional<std::vector<BenchmarkItem>> benchmark;
  BenchmarkTaxonomyMap map = BenchmarkTaxonomyMap::standard();
};

struct AblationPoint {
  std::size_t size = 0;
  double micro_f = 0.0;
  std::vector<EpochRecord> history;
};

/// One fine-tune per size from the same initial model, scored on the same
/// evaluation set. Points run on up to `threads` workers.
std::vector<AblationPoint> ablation(std::span<const std::size_t> sizes, const AblationSetup& setup,
                                    std::size_t threads = 1);

/// True when every point is at least the previous one minus `tolerance`.
bool non_decreasing(const std::vector<AblationPoint>& curve, double tolerance);

std::string metrics_to_json(const MetricsReport& report, const std::vector<std::string>& class_names);
std::string benchmark_report_csv(const BenchmarkReport& report);

}  // namespace emolab
