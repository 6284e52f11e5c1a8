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

#include "emolab/emolab.h"

#include <algorithm>
#include <cstring>
#include <memory>
#include <new>
#include <span>
#include <string>

#include "adapt.hpp"
#include "common.hpp"
#include "corpus.hpp"
#include "eval.hpp"
#include "pipeline.hpp"

struct emolab_context {
  std::string last_error;
  emolab_log_fn log = nullptr;
  void* log_data = nullptr;
};

struct emolab_model {
  emolab::Model model;
};

namespace {

emolab_status status_of(emolab::ErrorCode code) {
  switch (code) {
    case emolab::ErrorCode::InvalidArgument:
    case emolab::ErrorCode::InvalidSpec:
      return EMOLAB_USAGE;
    case emolab::ErrorCode::NumericalFailure:
      return EMOLAB_NUMERICAL;
    default:
      return EMOLAB_DATA;
  }
}

template <typename F>
emolab_status guarded(emolab_context* ctx, F&& body) {
  if (ctx == nullptr) return EMOLAB_USAGE;
  ctx->last_error.clear();
  try {
    body();
    return EMOLAB_OK;
  } catch (const emolab::Error& e) {
    ctx->last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    ctx->last_error = "out of memory";
    return EMOLAB_INTERNAL;
  } catch (const std::exception& e) {
    ctx->last_error = e.what();
    return EMOLAB_INTERNAL;
  }
}

emolab::LogFn logger(const emolab_context* ctx) {
  return [ctx](std::string_view line) {
    if (ctx->log != nullptr) ctx->log(std::string(line).c_str(), ctx->log_data);
  };
}

emolab::RunConfig parse_config(const char* config_json) {
  if (config_json == nullptr || *config_json == '\0') return {};
  return emolab::RunConfig::from_json(config_json);
}

using Command = void (*)(const emolab::RunConfig&, const emolab::LogFn&);

emolab_status run(emolab_context* ctx, const char* config_json, Command cmd) {
  return guarded(ctx, [&] { cmd(parse_config(config_json), logger(ctx)); });
}

}  // namespace

extern "C" {

emolab_context* emolab_context_create(void) { return new (std::nothrow) emolab_context(); }

void emolab_context_destroy(emolab_context* ctx) { delete ctx; }

void emolab_context_set_log(emolab_context* ctx, emolab_log_fn fn, void* user_data) {
  if (ctx == nullptr) return;
  ctx->log = fn;
  ctx->log_data = user_data;
}

const char* emolab_last_error(const emolab_context* ctx) { return ctx == nullptr ? "" : ctx->last_error.c_str(); }

emolab_status emolab_synthesize(emolab_context* ctx, const char* c) { return run(ctx, c, emolab::cmd_synthesize); }
emolab_status emolab_prepare(emolab_context* ctx, const char* c) { return run(ctx, c, emolab::cmd_prepare); }
emolab_status emolab_build_vocab(emolab_context* ctx, const char* c) { return run(ctx, c, emolab::cmd_build_vocab); }
emolab_status emolab_pretrain(emolab_context* ctx, const char* c) { return run(ctx, c, emolab::cmd_pretrain); }
emolab_status emolab_finetune(emolab_context* ctx, const char* c) { return run(ctx, c, emolab::cmd_finetune); }
emolab_status emolab_sweep(emolab_context* ctx, const char* c) { return run(ctx, c, emolab::cmd_sweep); }
emolab_status emolab_evaluate(emolab_context* ctx, const char* c) { return run(ctx, c, emolab::cmd_evaluate); }
emolab_status emolab_ablate(emolab_context* ctx, const char* c) { return run(ctx, c, emolab::cmd_ablate); }
emolab_status emolab_report(emolab_context* ctx, const char* c) { return run(ctx, c, emolab::cmd_report); }

emolab_status emolab_model_load(emolab_context* ctx, const char* dir, emolab_model** out) {
  return guarded(ctx, [&] {
    if (dir == nullptr || out == nullptr) emolab::fail(emolab::ErrorCode::InvalidArgument, "null argument");
    *out = nullptr;
    auto handle = std::make_unique<emolab_model>();
    handle->model = emolab::load_model(dir);
    *out = handle.release();
  });
}

void emolab_model_destroy(emolab_model* model) { delete model; }

size_t emolab_model_num_classes(const emolab_model* model) {
  return model == nullptr ? 0 : model->model.head_config.num_classes;
}

emolab_status emolab_model_predict(emolab_context* ctx, const emolab_model* model, const char* text,
                                   size_t* class_id, double* probabilities, size_t num_probabilities) {
  return guarded(ctx, [&] {
    if (model == nullptr || text == nullptr || class_id == nullptr) {
      emolab::fail(emolab::ErrorCode::InvalidArgument, "null argument");
    }
    const emolab::Prediction p = emolab::predict(model->model, text);
    if (probabilities != nullptr) {
      if (num_probabilities < p.probabilities.size()) {
        emolab::fail(emolab::ErrorCode::InvalidArgument, "probability buffer too small");
      }
      std::copy(p.probabilities.begin(), p.probabilities.end(), probabilities);
    }
    *class_id = p.class_id;
  });
}

const char* emolab_class_name(size_t class_id) {
  if (class_id >= emolab::kNumEmotionClasses) return nullptr;
  return emolab::to_string(static_cast<emolab::EmotionClass>(class_id)).data();
}

emolab_status emolab_clean_text(emolab_context* ctx, const char* text, char* out, size_t capacity, size_t* needed) {
  return guarded(ctx, [&] {
    if (text == nullptr || needed == nullptr) emolab::fail(emolab::ErrorCode::InvalidArgument, "null argument");
    const std::string clean = emolab::clean_text(text);
    *needed = clean.size() + 1;
    if (out == nullptr && capacity == 0) return;
    if (out == nullptr || capacity < *needed) {
      emolab::fail(emolab::ErrorCode::InvalidArgument, "output buffer too small");
    }
    std::memcpy(out, clean.c_str(), *needed);
  });
}

emolab_status emolab_paired_ttest(emolab_context* ctx, const double* a, const double* b, size_t n, double* t,
                                  double* p) {
  return guarded(ctx, [&] {
    if ((n > 0 && (a == nullptr || b == nullptr)) || t == nullptr || p == nullptr) {
      emolab::fail(emolab::ErrorCode::InvalidArgument, "null argument");
    }
    const auto r = emolab::paired_ttest(std::span<const double>(a, n), std::span<const double>(b, n));
    *t = r.t;
    *p = r.p;
  });
}

}  // extern "C"
