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
#include <vector>

#include "autodiff/tensor.hpp"

namespace emolab::ad {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First/second moment buffers for a fixed list of parameters, in the order
/// the parameters were registered.
class Adam {
 public:
  Adam(std::vector<Tensor> params, AdamOptions options);

  /// One bias-corrected update from the parameters' current gradients.
  /// Parameters that have not received a gradient are left alone.
  void step();
  void zero_grad();

  std::uint64_t steps() const { return step_; }
  const AdamOptions& options() const { return options_; }
  const std::vector<Tensor>& params() const { return params_; }

 private:
  std::vector<Tensor> params_;
  std::vector<std::vector<double>> first_;
  std::vector<std::vector<double>> second_;
  AdamOptions options_;
  std::uint64_t step_ = 0;
};

}  // namespace emolab::ad
