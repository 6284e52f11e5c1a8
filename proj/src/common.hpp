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
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace emolab {

enum class ErrorCode {
  InvalidArgument,
  ShapeMismatch,
  IndexOutOfRange,
  NotScalar,
  NumericalFailure,
  EmptyDataset,
  EmptyCorpus,
  EmptySequence,
  InvalidSpec,
  UnknownId,
  LengthMismatch,
  EmptyMatrix,
  UnknownBenchmarkClass,
  DegenerateSample,
  SizeTooLarge,
  LabelOutOfRange,
  Io,
  Parse,
};

std::string_view to_string(ErrorCode code);

/// Library-wide exception. The code is what the C API reports; the message is
/// for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

/// Deterministic random source. Only the raw 64-bit engine output is used so
/// that sequences do not depend on the standard library's distribution
/// implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n).
  std::size_t below(std::size_t n);
  double normal();
  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

/// Per-stage seeds are derived from one root seed by fixed offsets.
namespace seed_offset {
inline constexpr std::uint64_t kSplit = 1;
inline constexpr std::uint64_t kEncoderInit = 2;
inline constexpr std::uint64_t kMasking = 3;
inline constexpr std::uint64_t kPretrainOrder = 4;
inline constexpr std::uint64_t kHeadInit = 5;
inline constexpr std::uint64_t kFineTuneOrder = 6;
inline constexpr std::uint64_t kAblationSample = 7;
inline constexpr std::uint64_t kSynthetic = 8;
}  // namespace seed_offset

std::vector<std::string> split_whitespace(std::string_view text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace emolab
