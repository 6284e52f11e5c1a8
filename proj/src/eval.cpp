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

#include "eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include <boost/math/distributions/students_t.hpp>
#include <nlohmann/json.hpp>

#include "common.hpp"

namespace emolab {

std::size_t ConfusionMatrix::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::size_t{0}) +
         std::accumulate(unassigned.begin(), unassigned.end(), std::size_t{0});
}

std::size_t ConfusionMatrix::trace() const {
  std::size_t t = 0;
  for (std::size_t c = 0; c < num_classes; ++c) t += at(c, c);
  return t;
}

ConfusionMatrix confusion(std::span<const std::size_t> preds, std::span<const std::size_t> golds,
                          std::size_t num_classes) {
  if (preds.size() != golds.size()) {
    fail(ErrorCode::LengthMismatch, std::to_string(preds.size()) + " predictions for " +
                                        std::to_string(golds.size()) + " gold labels");
  }
  ConfusionMatrix m(num_classes);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] >= num_classes || golds[i] >= num_classes) {
      fail(ErrorCode::IndexOutOfRange, "label outside [0," + std::to_string(num_classes) + ")");
    }
    ++m.at(golds[i], preds[i]);
  }
  return m;
}

namespace {
double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }
double harmonic(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }
}  // namespace

MetricsReport metrics(const ConfusionMatrix& matrix) {
  const std::size_t total = matrix.total();
  if (total == 0) fail(ErrorCode::EmptyMatrix, "metrics of an empty confusion matrix");
  const std::size_t k = matrix.num_classes;
  MetricsReport r;
  r.n = total;
  std::size_t tp_all = 0, fp_all = 0, fn_all = 0;
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t tp = matrix.at(c, c), fp = 0, fn = matrix.unassigned[c];
    for (std::size_t o = 0; o < k; ++o) {
      if (o == c) continue;
      fp += matrix.at(o, c);
      fn += matrix.at(c, o);
    }
    ClassMetrics cm;
    cm.support = tp + fn;
    cm.precision = ratio(static_cast<double>(tp), static_cast<double>(tp + fp));
    cm.recall = ratio(static_cast<double>(tp), static_cast<double>(tp + fn));
    cm.f_score = harmonic(cm.precision, cm.recall);
    r.per_class.push_back(cm);
    tp_all += tp;
    fp_all += fp;
    fn_all += fn;
  }
  r.micro_precision = ratio(static_cast<double>(tp_all), static_cast<double>(tp_all + fp_all));
  r.micro_recall = ratio(static_cast<double>(tp_all), static_cast<double>(tp_all + fn_all));
  // Pooled-count form; equals the harmonic mean of micro P and R.
  r.micro_f = ratio(2.0 * static_cast<double>(tp_all), static_cast<double>(2 * tp_all + fp_all + fn_all));
  r.accuracy = static_cast<double>(matrix.trace()) / static_cast<double>(total);
  return r;
}

BenchmarkTaxonomyMap::BenchmarkTaxonomyMap(std::vector<Entry> entries) : entries_(std::move(entries)) {
  std::vector<bool> taken(kNumEmotionClasses, false);
  for (const auto& e : entries_) {
    if (e.name.empty()) fail(ErrorCode::InvalidSpec, "benchmark class with an empty name");
    for (auto c : e.accepts) {
      if (taken[class_index(c)]) {
        fail(ErrorCode::InvalidSpec, std::string(to_string(c)) + " is accepted by more than one benchmark class");
      }
      taken[class_index(c)] = true;
    }
  }
}

BenchmarkTaxonomyMap BenchmarkTaxonomyMap::standard() {
  return BenchmarkTaxonomyMap({{"joy", {EmotionClass::HappyActive, EmotionClass::HappyInactive}},
                               {"anger", {EmotionClass::UnhappyActive}},
                               {"sadness", {EmotionClass::UnhappyInactive}}});
}

BenchmarkTaxonomyMap BenchmarkTaxonomyMap::from_json(std::string_view json_text) {
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("taxonomy map: ") + e.what());
  }
  if (!doc.is_object()) fail(ErrorCode::Parse, "taxonomy map must be a JSON object");
  std::vector<Entry> entries;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (it.key().rfind("_", 0) == 0) continue;
    Entry e{it.key(), {}};
    for (const auto& name : it.value()) e.accepts.push_back(parse_emotion_class(name.get<std::string>()));
    entries.push_back(std::move(e));
  }
  return BenchmarkTaxonomyMap(std::move(entries));
}

std::string BenchmarkTaxonomyMap::to_json() const {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  for (const auto& e : entries_) {
    auto& arr = doc[e.name] = nlohmann::ordered_json::array();
    for (auto c : e.accepts) arr.push_back(to_string(c));
  }
  return doc.dump(2) + "\n";
}

std::size_t BenchmarkTaxonomyMap::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name == name) return i;
  }
  fail(ErrorCode::UnknownBenchmarkClass, "benchmark class '" + std::string(name) + "' is not in the map");
}

std::optional<std::size_t> BenchmarkTaxonomyMap::target_of(EmotionClass c) const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& acc = entries_[i].accepts;
    if (std::find(acc.begin(), acc.end(), c) != acc.end()) return i;
  }
  return std::nullopt;
}

bool map_benchmark(std::string_view gold, EmotionClass pred, const BenchmarkTaxonomyMap& map) {
  const auto& accepts = map.entries()[map.index_of(gold)].accepts;
  return std::find(accepts.begin(), accepts.end(), pred) != accepts.end();
}

std::vector<BenchmarkItem> read_benchmark_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open '" + path + "'");
  std::vector<BenchmarkItem> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto obj = nlohmann::json::parse(line);
      out.push_back({obj.at("text").get<std::string>(), obj.at("label").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::Parse, path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

BenchmarkReport score_benchmark(std::span<const EmotionClass> preds, std::span<const std::string> golds,
                                const BenchmarkTaxonomyMap& map) {
  if (preds.size() != golds.size()) fail(ErrorCode::LengthMismatch, "benchmark predictions and labels differ in length");
  if (golds.empty()) fail(ErrorCode::EmptyDataset, "benchmark is empty");
  BenchmarkReport report;
  for (const auto& e : map.entries()) report.class_names.push_back(e.name);
  report.matrix = ConfusionMatrix(map.size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const std::size_t gold = map.index_of(golds[i]);
    if (const auto target = map.target_of(preds[i])) {
      ++report.matrix.at(gold, *target);
    } else {
      ++report.matrix.unassigned[gold];
    }
  }
  report.metrics = metrics(report.matrix);
  return report;
}

BenchmarkReport evaluate_benchmark(const Model& model, const std::vector<BenchmarkItem>& items,
                                   const BenchmarkTaxonomyMap& map) {
  if (items.empty()) fail(ErrorCode::EmptyDataset, "benchmark is empty");
  std::vector<std::string> texts, golds;
  for (const auto& it : items) {
    map.index_of(it.label);
    texts.push_back(it.text);
    golds.push_back(it.label);
  }
  std::vector<EmotionClass> preds;
  for (const auto& p : predict_all(model, texts)) preds.push_back(p.label());
  return score_benchmark(preds, golds, map);
}

MetricsReport evaluate_dataset(const Model& model, const Dataset& data) {
  if (data.empty()) fail(ErrorCode::EmptyDataset, "evaluation set is empty");
  std::vector<std::string> texts;
  std::vector<std::size_t> golds, preds;
  for (const auto& m : data.items) {
    texts.push_back(m.text);
    golds.push_back(static_cast<std::size_t>(class_index(m.label)));
  }
  for (const auto& p : predict_all(model, texts)) preds.push_back(p.class_id);
  return metrics(confusion(preds, golds, model.head_config.num_classes));
}

TTestResult paired_ttest(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) fail(ErrorCode::LengthMismatch, "paired samples differ in length");
  if (a.size() < 2) fail(ErrorCode::InvalidArgument, "paired t-test needs at least two pairs");
  const std::size_t n = a.size();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
  const double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double x : d) ss += (x - mean) * (x - mean);
  const double var = ss / static_cast<double>(n - 1);
  if (!(var > 0.0)) fail(ErrorCode::DegenerateSample, "differences have zero variance");
  TTestResult r;
  r.df = n - 1;
  r.mean_difference = mean;
  r.t = mean / std::sqrt(var / static_cast<double>(n));
  const boost::math::students_t dist(static_cast<double>(r.df));
  r.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(r.t)));
  return r;
}

Dataset subsample(const Dataset& data, std::size_t n, std::uint64_t seed) {
  if (n > data.size()) {
    fail(ErrorCode::SizeTooLarge, "requested " + std::to_string(n) + " items from a set of " +
                                      std::to_string(data.size()));
  }
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);
  order.resize(n);
  std::sort(order.begin(), order.end());
  Dataset out;
  for (auto i : order) out.items.push_back(data.items[i]);
  return out;
}

std::vector<AblationPoint> ablation(std::span<const std::size_t> sizes, const AblationSetup& setup,
                                    std::size_t threads) {
  for (auto s : sizes) {
    if (s > setup.train.size()) {
      fail(ErrorCode::SizeTooLarge, "ablation size " + std::to_string(s) + " exceeds training set of " +
                                        std::to_string(setup.train.size()));
    }
    if (s == 0) fail(ErrorCode::InvalidArgument, "ablation sizes must be positive");
  }
  std::vector<AblationPoint> points(sizes.size());
  auto run = [&](std::size_t i) {
    const Dataset sample = subsample(setup.train, sizes[i], setup.sample_seed);
    const FineTuneResult tuned = fine_tune(setup.initial, sample, setup.val, setup.fconf);
    points[i].size = sizes[i];
    points[i].history = tuned.history;
    points[i].micro_f = setup.benchmark ? evaluate_benchmark(tuned.model, *setup.benchmark, setup.map).metrics.micro_f
                                        : evaluate_dataset(tuned.model, setup.test).micro_f;
  };
  threads = std::max<std::size_t>(1, std::min(threads, sizes.size()));
  if (threads == 1) {
    for (std::size_t i = 0; i < sizes.size(); ++i) run(i);
    return points;
  }
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errors(sizes.size());
  std::atomic<std::size_t> next{0};
  for (std::size_t w = 0; w < threads; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i; (i = next++) < sizes.size();) {
        try {
          run(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return points;
}

bool non_decreasing(const std::vector<AblationPoint>& curve, double tolerance) {
  for (std::size_t i = 1; i < curve.size(); ++i) {
    if (curve[i].micro_f < curve[i - 1].micro_f - tolerance) return false;
  }
  return true;
}

std::string metrics_to_json(const MetricsReport& report, const std::vector<std::string>& class_names) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < report.per_class.size(); ++c) {
    const auto& m = report.per_class[c];
    nlohmann::ordered_json row;
    row["class"] = c < class_names.size() ? class_names[c] : std::to_string(c);
    row["precision"] = m.precision;
    row["recall"] = m.recall;
    row["f_score"] = m.f_score;
    row["support"] = m.support;
    rows.push_back(row);
  }
  j["per_class"] = rows;
  j["micro_precision"] = report.micro_precision;
  j["micro_recall"] = report.micro_recall;
  j["micro_f"] = report.micro_f;
  j["accuracy"] = report.accuracy;
  j["n"] = report.n;
  return j.dump(2) + "\n";
}

std::string benchmark_report_csv(const BenchmarkReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "class,precision,recall,f_score,support\n";
  for (std::size_t c = 0; c < report.class_names.size(); ++c) {
    const auto& m = report.metrics.per_class[c];
    out << report.class_names[c] << ',' << m.precision << ',' << m.recall << ',' << m.f_score << ',' << m.support
        << '\n';
  }
  out << "micro_average," << report.metrics.micro_precision << ',' << report.metrics.micro_recall << ','
      << report.metrics.micro_f << ',' << report.metrics.n << '\n';
  return out.str();
}

}  // namespace emolab
