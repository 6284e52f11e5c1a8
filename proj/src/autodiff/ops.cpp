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

#include "autodiff/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "common.hpp"

namespace emolab::ad {

namespace {

void require_rank(const Tensor& t, std::size_t rank, const char* op) {
  if (!t.defined() || t.rank() != rank) {
    fail(ErrorCode::ShapeMismatch, std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                                       (t.defined() ? shape_string(t.shape()) : "undefined"));
  }
}

std::size_t last_dim(const Tensor& t) { return t.rank() == 0 ? 1 : t.shape().back(); }

// Builds the output node. History is kept only when recording is enabled and
// some input needs a gradient.
Tensor make_result(const char* op, Shape shape, std::vector<double> values, std::vector<NodePtr> parents,
                   std::function<void(Node&)> backward_fn) {
  for (double v : values) {
    if (!std::isfinite(v)) fail(ErrorCode::NumericalFailure, std::string(op) + " produced a non-finite value");
  }
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  if (grad_enabled()) {
    bool needs = false;
    for (const auto& p : parents) needs = needs || p->requires_grad;
    if (needs) {
      node->requires_grad = true;
      node->parents = std::move(parents);
      node->backward = std::move(backward_fn);
    }
  }
  return Tensor(std::move(node));
}

// c[m x n] += a[m x k] * b[k x n]
void gemm_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c + i * n;
    const double* ai = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = ai[p];
      if (aip == 0.0) continue;
      const double* bp = b + p * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
    }
  }
}

// c[m x k] += g[m x n] * b[k x n]^T
void gemm_nt(const double* g, const double* b, double* c, std::size_t m, std::size_t n, std::size_t k) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* gi = g + i * n;
    double* ci = c + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double* bp = b + p * n;
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += gi[j] * bp[j];
      ci[p] += acc;
    }
  }
}

// c[k x n] += a[m x k]^T * g[m x n]
void gemm_tn(const double* a, const double* g, double* c, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a + i * k;
    const double* gi = g + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = ai[p];
      if (aip == 0.0) continue;
      double* cp = c + p * n;
      for (std::size_t j = 0; j < n; ++j) cp[j] += aip * gi[j];
    }
  }
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) {
    fail(ErrorCode::ShapeMismatch, "matmul: " + shape_string(a.shape()) + " x " + shape_string(b.shape()));
  }
  std::vector<double> out(m * n, 0.0);
  gemm_nn(a.data().data(), b.data().data(), out.data(), m, k, n);
  flop_counter() += 2 * m * k * n;
  NodePtr an = a.node(), bn = b.node();
  return make_result("matmul", {m, n}, std::move(out), {an, bn}, [an, bn, m, k, n](Node& self) {
    const double* g = self.grad.data();
    if (an->requires_grad) gemm_nt(g, bn->value.data(), an->grad_buffer(), m, n, k);
    if (bn->requires_grad) gemm_tn(an->value.data(), g, bn->grad_buffer(), m, k, n);
  });
}

Tensor transpose(const Tensor& a) {
  require_rank(a, 2, "transpose");
  const std::size_t r = a.dim(0), c = a.dim(1);
  std::vector<double> out(r * c);
  const auto src = a.data();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = src[i * c + j];
  NodePtr an = a.node();
  return make_result("transpose", {c, r}, std::move(out), {an}, [an, r, c](Node& self) {
    double* ga = an->grad_buffer();
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) ga[i * c + j] += self.grad[j * r + i];
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  const Shape& as = a.shape();
  const Shape& bs = b.shape();
  if (bs.size() > as.size() || !std::equal(bs.rbegin(), bs.rend(), as.rbegin())) {
    fail(ErrorCode::ShapeMismatch, "add: cannot broadcast " + shape_string(bs) + " onto " + shape_string(as));
  }
  const std::size_t n = a.size(), period = b.size();
  std::vector<double> out(a.data().begin(), a.data().end());
  const auto bv = b.data();
  for (std::size_t i = 0; i < n; ++i) out[i] += bv[i % period];
  NodePtr an = a.node(), bn = b.node();
  return make_result("add", as, std::move(out), {an, bn}, [an, bn, n, period](Node& self) {
    if (an->requires_grad) {
      double* ga = an->grad_buffer();
      for (std::size_t i = 0; i < n; ++i) ga[i] += self.grad[i];
    }
    if (bn->requires_grad) {
      double* gb = bn->grad_buffer();
      for (std::size_t i = 0; i < n; ++i) gb[i % period] += self.grad[i];
    }
  });
}

Tensor scale(const Tensor& a, double factor) {
  std::vector<double> out(a.data().begin(), a.data().end());
  for (double& v : out) v *= factor;
  NodePtr an = a.node();
  return make_result("scale", a.shape(), std::move(out), {an}, [an, factor](Node& self) {
    double* ga = an->grad_buffer();
    for (std::size_t i = 0; i < self.grad.size(); ++i) ga[i] += factor * self.grad[i];
  });
}

Tensor relu(const Tensor& x) {
  std::vector<double> out(x.data().begin(), x.data().end());
  for (double& v : out) v = v > 0.0 ? v : 0.0;
  NodePtr xn = x.node();
  return make_result("relu", x.shape(), std::move(out), {xn}, [xn](Node& self) {
    double* gx = xn->grad_buffer();
    for (std::size_t i = 0; i < self.grad.size(); ++i)
      if (xn->value[i] > 0.0) gx[i] += self.grad[i];
  });
}

Tensor softmax(const Tensor& x) {
  const std::size_t n = last_dim(x);
  if (n == 0) fail(ErrorCode::ShapeMismatch, "softmax over an empty dimension");
  const std::size_t rows = x.size() / n;
  std::vector<double> out(x.size());
  const auto xv = x.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = xv.data() + r * n;
    double* o = out.data() + r * n;
    const double mx = *std::max_element(in, in + n);
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) total += (o[j] = std::exp(in[j] - mx));
    for (std::size_t j = 0; j < n; ++j) o[j] /= total;
  }
  NodePtr xn = x.node();
  return make_result("softmax", x.shape(), std::move(out), {xn}, [xn, rows, n](Node& self) {
    double* gx = xn->grad_buffer();
    for (std::size_t r = 0; r < rows; ++r) {
      const double* p = self.value.data() + r * n;
      const double* g = self.grad.data() + r * n;
      double dot = 0.0;
      for (std::size_t j = 0; j < n; ++j) dot += p[j] * g[j];
      for (std::size_t j = 0; j < n; ++j) gx[r * n + j] += p[j] * (g[j] - dot);
    }
  });
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
  const std::size_t n = last_dim(x);
  if (gamma.size() != n || beta.size() != n) {
    fail(ErrorCode::ShapeMismatch, "layer_norm: gamma/beta must have " + std::to_string(n) + " entries");
  }
  const std::size_t rows = x.size() / n;
  std::vector<double> normalized(x.size()), inv_std(rows), out(x.size());
  const auto xv = x.data();
  const auto gv = gamma.data();
  const auto bv = beta.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = xv.data() + r * n;
    double mu = 0.0;
    for (std::size_t j = 0; j < n; ++j) mu += in[j];
    mu /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t j = 0; j < n; ++j) var += (in[j] - mu) * (in[j] - mu);
    var /= static_cast<double>(n);
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < n; ++j) {
      normalized[r * n + j] = (in[j] - mu) * inv_std[r];
      out[r * n + j] = gv[j] * normalized[r * n + j] + bv[j];
    }
  }
  NodePtr xn = x.node(), gn = gamma.node(), bn = beta.node();
  return make_result(
      "layer_norm", x.shape(), std::move(out), {xn, gn, bn},
      [xn, gn, bn, rows, n, normalized = std::move(normalized), inv_std = std::move(inv_std)](Node& self) {
        for (std::size_t r = 0; r < rows; ++r) {
          const double* g = self.grad.data() + r * n;
          const double* xh = normalized.data() + r * n;
          if (gn->requires_grad) {
            double* gg = gn->grad_buffer();
            for (std::size_t j = 0; j < n; ++j) gg[j] += g[j] * xh[j];
          }
          if (bn->requires_grad) {
            double* gb = bn->grad_buffer();
            for (std::size_t j = 0; j < n; ++j) gb[j] += g[j];
          }
          if (xn->requires_grad) {
            double mean_d = 0.0, mean_dx = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
              const double d = g[j] * gn->value[j];
              mean_d += d;
              mean_dx += d * xh[j];
            }
            mean_d /= static_cast<double>(n);
            mean_dx /= static_cast<double>(n);
            double* gx = xn->grad_buffer() + r * n;
            for (std::size_t j = 0; j < n; ++j) {
              gx[j] += inv_std[r] * (g[j] * gn->value[j] - mean_d - xh[j] * mean_dx);
            }
          }
        }
      });
}

Tensor embedding_lookup(const Tensor& table, std::span<const std::int32_t> ids) {
  require_rank(table, 2, "embedding_lookup");
  const std::size_t vocab = table.dim(0), width = table.dim(1);
  std::vector<std::size_t> rows(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= vocab) {
      fail(ErrorCode::IndexOutOfRange,
           "embedding id " + std::to_string(ids[i]) + " outside table of " + std::to_string(vocab) + " rows");
    }
    rows[i] = static_cast<std::size_t>(ids[i]);
  }
  (void)width;
  return gather_rows(table, rows);
}

Tensor gather_rows(const Tensor& x, std::span<const std::size_t> rows) {
  require_rank(x, 2, "gather_rows");
  const std::size_t count = x.dim(0), width = x.dim(1);
  std::vector<double> out(rows.size() * width);
  const auto xv = x.data();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= count) {
      fail(ErrorCode::IndexOutOfRange, "row " + std::to_string(rows[i]) + " of " + std::to_string(count));
    }
    std::copy_n(xv.data() + rows[i] * width, width, out.data() + i * width);
  }
  NodePtr xn = x.node();
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  return make_result("gather_rows", {rows.size(), width}, std::move(out), {xn},
                     [xn, width, idx = std::move(idx)](Node& self) {
                       double* gx = xn->grad_buffer();
                       for (std::size_t i = 0; i < idx.size(); ++i) {
                         const double* g = self.grad.data() + i * width;
                         double* dst = gx + idx[i] * width;
                         for (std::size_t j = 0; j < width; ++j) dst[j] += g[j];
                       }
                     });
}

Tensor pad_rows(const Tensor& x, std::size_t rows) {
  require_rank(x, 2, "pad_rows");
  if (rows < x.dim(0)) fail(ErrorCode::ShapeMismatch, "pad_rows cannot shrink a matrix");
  std::vector<double> out(rows * x.dim(1), 0.0);
  std::copy(x.data().begin(), x.data().end(), out.begin());
  NodePtr xn = x.node();
  return make_result("pad_rows", {rows, x.dim(1)}, std::move(out), {xn}, [xn](Node& self) {
    double* gx = xn->grad_buffer();
    for (std::size_t i = 0; i < xn->value.size(); ++i) gx[i] += self.grad[i];
  });
}

Tensor sum(const Tensor& x) {
  double total = 0.0;
  for (double v : x.data()) total += v;
  NodePtr xn = x.node();
  return make_result("sum", {}, {total}, {xn}, [xn](Node& self) {
    double* gx = xn->grad_buffer();
    for (std::size_t i = 0; i < xn->value.size(); ++i) gx[i] += self.grad[0];
  });
}

Tensor mean(const Tensor& x) {
  if (x.size() == 0) fail(ErrorCode::ShapeMismatch, "mean of an empty tensor");
  return scale(sum(x), 1.0 / static_cast<double>(x.size()));
}

Tensor cross_entropy(const Tensor& logits, std::span<const std::int32_t> labels,
                     std::span<const double> class_weights) {
  require_rank(logits, 2, "cross_entropy");
  const std::size_t batch = logits.dim(0), classes = logits.dim(1);
  if (labels.size() != batch) {
    fail(ErrorCode::ShapeMismatch, "cross_entropy: " + std::to_string(labels.size()) + " labels for " +
                                       std::to_string(batch) + " rows");
  }
  if (!class_weights.empty() && class_weights.size() != classes) {
    fail(ErrorCode::ShapeMismatch, "cross_entropy: class weight count differs from class count");
  }
  if (batch == 0) fail(ErrorCode::ShapeMismatch, "cross_entropy over an empty batch");
  std::vector<double> probs(batch * classes), weights(batch, 1.0);
  const auto lv = logits.data();
  double total = 0.0, weight_sum = 0.0;
  for (std::size_t r = 0; r < batch; ++r) {
    const std::int32_t y = labels[r];
    if (y < 0 || static_cast<std::size_t>(y) >= classes) {
      fail(ErrorCode::IndexOutOfRange, "label " + std::to_string(y) + " outside [0," + std::to_string(classes) + ")");
    }
    const double* in = lv.data() + r * classes;
    const double mx = *std::max_element(in, in + classes);
    double z = 0.0;
    for (std::size_t j = 0; j < classes; ++j) z += (probs[r * classes + j] = std::exp(in[j] - mx));
    for (std::size_t j = 0; j < classes; ++j) probs[r * classes + j] /= z;
    const double log_prob = in[y] - mx - std::log(z);
    if (!class_weights.empty()) weights[r] = class_weights[static_cast<std::size_t>(y)];
    total -= weights[r] * log_prob;
    weight_sum += weights[r];
  }
  if (weight_sum <= 0.0) fail(ErrorCode::InvalidArgument, "cross_entropy: class weights sum to zero");
  std::vector<std::int32_t> ys(labels.begin(), labels.end());
  NodePtr ln = logits.node();
  return make_result("cross_entropy", {}, {total / weight_sum}, {ln},
                     [ln, batch, classes, weight_sum, probs = std::move(probs), weights = std::move(weights),
                      ys = std::move(ys)](Node& self) {
                       double* gl = ln->grad_buffer();
                       const double g = self.grad[0] / weight_sum;
                       for (std::size_t r = 0; r < batch; ++r) {
                         for (std::size_t j = 0; j < classes; ++j) {
                           const double onehot = static_cast<std::int32_t>(j) == ys[r] ? 1.0 : 0.0;
                           gl[r * classes + j] += g * weights[r] * (probs[r * classes + j] - onehot);
                         }
                       }
                     });
}

Tensor attention(const Tensor& q, const Tensor& k, const Tensor& v, std::span<const std::uint8_t> key_mask,
                 std::size_t batch, std::size_t seq, std::size_t heads, std::vector<double>* weights) {
  require_rank(q, 2, "attention");
  const std::size_t hidden = q.dim(1);
  if (heads == 0 || hidden % heads != 0) {
    fail(ErrorCode::ShapeMismatch, "attention: hidden " + std::to_string(hidden) + " not divisible by " +
                                       std::to_string(heads) + " heads");
  }
  if (q.shape() != k.shape() || q.shape() != v.shape() || q.dim(0) != batch * seq || key_mask.size() != batch * seq) {
    fail(ErrorCode::ShapeMismatch, "attention: inconsistent q/k/v/mask shapes");
  }
  const std::size_t d = hidden / heads;
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
  std::vector<double> probs(batch * heads * seq * seq);
  std::vector<double> out(batch * seq * hidden, 0.0);
  const double* qv = q.data().data();
  const double* kv = k.data().data();
  const double* vv = v.data().data();
  std::vector<double> scores(seq);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t h = 0; h < heads; ++h) {
      const std::size_t col = h * d;
      for (std::size_t i = 0; i < seq; ++i) {
        const double* qi = qv + (b * seq + i) * hidden + col;
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < seq; ++j) {
          const double* kj = kv + (b * seq + j) * hidden + col;
          double s = 0.0;
          for (std::size_t c = 0; c < d; ++c) s += qi[c] * kj[c];
          s *= inv_sqrt_d;
          if (!key_mask[b * seq + j]) s += kMaskBias;
          scores[j] = s;
          mx = std::max(mx, s);
        }
        double z = 0.0;
        for (std::size_t j = 0; j < seq; ++j) z += (scores[j] = std::exp(scores[j] - mx));
        double* p = probs.data() + ((b * heads + h) * seq + i) * seq;
        double* oi = out.data() + (b * seq + i) * hidden + col;
        for (std::size_t j = 0; j < seq; ++j) {
          p[j] = scores[j] / z;
          if (p[j] == 0.0) continue;
          const double* vj = vv + (b * seq + j) * hidden + col;
          for (std::size_t c = 0; c < d; ++c) oi[c] += p[j] * vj[c];
        }
      }
    }
  }
  flop_counter() += 4 * batch * seq * seq * hidden;
  if (weights) *weights = probs;
  NodePtr qn = q.node(), kn = k.node(), vn = v.node();
  return make_result(
      "attention", {batch * seq, hidden}, std::move(out), {qn, kn, vn},
      [qn, kn, vn, batch, seq, heads, hidden, d, inv_sqrt_d, probs = std::move(probs)](Node& self) {
        double* gq = qn->requires_grad ? qn->grad_buffer() : nullptr;
        double* gk = kn->requires_grad ? kn->grad_buffer() : nullptr;
        double* gv = vn->requires_grad ? vn->grad_buffer() : nullptr;
        std::vector<double> dscore(seq);
        for (std::size_t b = 0; b < batch; ++b) {
          for (std::size_t h = 0; h < heads; ++h) {
            const std::size_t col = h * d;
            for (std::size_t i = 0; i < seq; ++i) {
              const double* p = probs.data() + ((b * heads + h) * seq + i) * seq;
              const double* go = self.grad.data() + (b * seq + i) * hidden + col;
              double dot = 0.0;
              for (std::size_t j = 0; j < seq; ++j) {
                const double* vj = vn->value.data() + (b * seq + j) * hidden + col;
                double dp = 0.0;
                for (std::size_t c = 0; c < d; ++c) dp += go[c] * vj[c];
                dscore[j] = dp;
                dot += p[j] * dp;
                if (gv && p[j] != 0.0) {
                  double* gvj = gv + (b * seq + j) * hidden + col;
                  for (std::size_t c = 0; c < d; ++c) gvj[c] += p[j] * go[c];
                }
              }
              const double* qi = qn->value.data() + (b * seq + i) * hidden + col;
              double* gqi = gq ? gq + (b * seq + i) * hidden + col : nullptr;
              for (std::size_t j = 0; j < seq; ++j) {
                const double ds = p[j] * (dscore[j] - dot) * inv_sqrt_d;
                if (ds == 0.0) continue;
                const double* kj = kn->value.data() + (b * seq + j) * hidden + col;
                if (gqi)
                  for (std::size_t c = 0; c < d; ++c) gqi[c] += ds * kj[c];
                if (gk) {
                  double* gkj = gk + (b * seq + j) * hidden + col;
                  for (std::size_t c = 0; c < d; ++c) gkj[c] += ds * qi[c];
                }
              }
            }
          }
        }
      });
}

}  // namespace emolab::ad
