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

/* C interface to the emolab library. All functions are thread-compatible:
 * distinct contexts and model handles may be used from different threads. */
#ifndef EMOLAB_EMOLAB_H_
#define EMOLAB_EMOLAB_H_

#include <stddef.h>

#if defined(EMOLAB_BUILDING_LIBRARY)
#define EMOLAB_API __attribute__((visibility("default")))
#else
#define EMOLAB_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes double as the command-line exit codes. */
typedef enum emolab_status {
  EMOLAB_OK = 0,
  EMOLAB_INTERNAL = 1,
  EMOLAB_USAGE = 2,     /* bad argument or configuration */
  EMOLAB_DATA = 3,      /* missing file, malformed or empty data, shape errors */
  EMOLAB_NUMERICAL = 4  /* a NaN or infinity was produced */
} emolab_status;

typedef struct emolab_context emolab_context;
typedef struct emolab_model emolab_model;

typedef void (*emolab_log_fn)(const char* line, void* user_data);

EMOLAB_API emolab_context* emolab_context_create(void);
EMOLAB_API void emolab_context_destroy(emolab_context* ctx);
/* Progress lines from commands go here; NULL silences them. */
EMOLAB_API void emolab_context_set_log(emolab_context* ctx, emolab_log_fn fn, void* user_data);
/* Message of the last failed call on this context, "" if none. Valid until
 * the next call on the context. */
EMOLAB_API const char* emolab_last_error(const emolab_context* ctx);

/* Pipeline commands. config_json is a run configuration; NULL or "" means
 * all defaults. */
EMOLAB_API emolab_status emolab_synthesize(emolab_context* ctx, const char* config_json);
EMOLAB_API emolab_status emolab_prepare(emolab_context* ctx, const char* config_json);
EMOLAB_API emolab_status emolab_build_vocab(emolab_context* ctx, const char* config_json);
EMOLAB_API emolab_status emolab_pretrain(emolab_context* ctx, const char* config_json);
EMOLAB_API emolab_status emolab_finetune(emolab_context* ctx, const char* config_json);
EMOLAB_API emolab_status emolab_sweep(emolab_context* ctx, const char* config_json);
EMOLAB_API emolab_status emolab_evaluate(emolab_context* ctx, const char* config_json);
EMOLAB_API emolab_status emolab_ablate(emolab_context* ctx, const char* config_json);
EMOLAB_API emolab_status emolab_report(emolab_context* ctx, const char* config_json);

/* Loads a model bundle written by emolab_finetune. */
EMOLAB_API emolab_status emolab_model_load(emolab_context* ctx, const char* dir, emolab_model** out);
EMOLAB_API void emolab_model_destroy(emolab_model* model);
EMOLAB_API size_t emolab_model_num_classes(const emolab_model* model);
/* Writes the predicted class id and, when probabilities is non-NULL, one
 * probability per class (num_probabilities must be at least num_classes). */
EMOLAB_API emolab_status emolab_model_predict(emolab_context* ctx, const emolab_model* model, const char* text,
                                              size_t* class_id, double* probabilities, size_t num_probabilities);
/* Serialized class name ("happy_active", ...), NULL when out of range. */
EMOLAB_API const char* emolab_class_name(size_t class_id);

/* Copies the cleaned text into out (NUL-terminated) and stores the needed
 * size, terminator included, in *needed. Returns EMOLAB_USAGE when the buffer
 * is too small; pass out = NULL, capacity = 0 to query the size. */
EMOLAB_API emolab_status emolab_clean_text(emolab_context* ctx, const char* text, char* out, size_t capacity,
                                           size_t* needed);

/* Two-tailed paired t-test of a - b. */
EMOLAB_API emolab_status emolab_paired_ttest(emolab_context* ctx, const double* a, const double* b, size_t n,
                                             double* t, double* p);

#ifdef __cplusplus
}
#endif

#endif /* EMOLAB_EMOLAB_H_ */
