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
#include <span>
#include <vector>

#include "autodiff/tensor.hpp"

namespace emolab::ad {

// Every op checks its output for NaN/Inf and throws NumericalFailure.

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

/// Elementwise sum. `b` may match `a` exactly or match a's trailing
/// dimensions, in which case it is broadcast over the leading ones.
Tensor add(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
Tensor relu(const Tensor& x);

/// Row-wise softmax over the last dimension.
Tensor softmax(const Tensor& x);

/// Per-row normalisation over the last dimension followed by gamma * x + beta.
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps = 1e-5);

/// Rows of `table` selected by ids; result is [ids.size() x table.cols].
Tensor embedding_lookup(const Tensor& table, std::span<const std::int32_t> ids);
Tensor gather_rows(const Tensor& x, std::span<const std::size_t> rows);
/// Appends zero rows to a matrix until it has `rows` rows.
Tensor pad_rows(const Tensor& x, std::size_t rows);

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

/// Mean over rows of -log softmax(logits)[label]. Optional per-class weights
/// turn it into a weighted mean.
Tensor cross_entropy(const Tensor& logits, std::span<const std::int32_t> labels,
                     std::span<const double> class_weights = {});

inline constexpr double kMaskBias = -1e9;

/// Scaled dot-product self-attention over a packed batch.
///
/// q, k, v are [batch*seq x hidden] with head h occupying columns
/// [h*d, (h+1)*d), d = hidden / heads. key_mask is [batch*seq], 1 for real
/// tokens; masked keys receive kMaskBias before the softmax. When `weights`
/// is non-null it receives the attention probabilities laid out as
/// [batch][head][query][key].
Tensor attention(const Tensor& q, const Tensor& k, const Tensor& v, std::span<const std::uint8_t> key_mask,
                 std::size_t batch, std::size_t seq, std::size_t heads, std::vector<double>* weights = nullptr);

}  // namespace emolab::ad
