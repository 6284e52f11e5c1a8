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

#include "autodiff/adam.hpp"

#include <cmath>

#include "common.hpp"

namespace emolab::ad {

Adam::Adam(std::vector<Tensor> params, AdamOptions options) : params_(std::move(params)), options_(options) {
  if (!(options_.learning_rate > 0.0)) fail(ErrorCode::InvalidArgument, "Adam learning rate must be positive");
  for (const auto& p : params_) {
    first_.emplace_back(p.size(), 0.0);
    second_.emplace_back(p.size(), 0.0);
  }
}

void Adam::step() {
  ++step_;
  const double t = static_cast<double>(step_);
  const double correction1 = 1.0 - std::pow(options_.beta1, t);
  const double correction2 = 1.0 - std::pow(options_.beta2, t);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Tensor& p = params_[i];
    const auto grad = p.grad();
    if (grad.empty()) continue;
    if (grad.size() != p.size() || first_[i].size() != p.size()) {
      fail(ErrorCode::ShapeMismatch, "Adam: gradient shape differs from parameter shape");
    }
    auto value = p.data();
    auto& m = first_[i];
    auto& v = second_[i];
    for (std::size_t j = 0; j < value.size(); ++j) {
      m[j] = options_.beta1 * m[j] + (1.0 - options_.beta1) * grad[j];
      v[j] = options_.beta2 * v[j] + (1.0 - options_.beta2) * grad[j] * grad[j];
      const double m_hat = m[j] / correction1;
      const double v_hat = v[j] / correction2;
      value[j] -= options_.learning_rate * m_hat / (std::sqrt(v_hat) + options_.eps);
    }
  }
}

void Adam::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

}  // namespace emolab::ad
