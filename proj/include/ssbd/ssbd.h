/* SPDX-License-Identifier: Apache-2.0 */
/* Copyright 2026 The ssbd Authors */

/*
 * C interface to the ssbd streaming decoder.
 *
 * All objects are opaque handles created and released through this API.
 * Every fallible call returns an ssbd_status; on failure a human-readable
 * message is available from ssbd_last_error() on the calling thread until the
 * next failing call on that thread.
 *
 * Models are immutable and may be shared across threads. A session handle
 * must be used by one thread at a time.
 */

#ifndef SSBD_SSBD_H_
#define SSBD_SSBD_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(SSBD_BUILDING_LIBRARY)
#    define SSBD_API __declspec(dllexport)
#  else
#    define SSBD_API __declspec(dllimport)
#  endif
#else
#  define SSBD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ssbd_status {
  SSBD_OK = 0,
  SSBD_ERR_CONFIG = 1,
  SSBD_ERR_INVALID_TOKEN = 2,
  SSBD_ERR_MALFORMED_LOGITS = 3,
  SSBD_ERR_MALFORMED_DISTRIBUTION = 4,
  SSBD_ERR_TRANSPORT = 5,
  SSBD_ERR_PROTOCOL = 6,
  SSBD_ERR_FILE = 7,
  SSBD_ERR_PARSE = 8,
  SSBD_ERR_VALIDATION = 9,
  SSBD_ERR_PRECONDITION = 10,
  SSBD_ERR_LOGIC = 11,
  SSBD_ERR_UNDEFINED_METRIC = 12,
  SSBD_ERR_INVALID_ARGUMENT = 100, /* null handle or pointer */
  SSBD_ERR_BUFFER_TOO_SMALL = 101,
  SSBD_ERR_INTERNAL = 102
} ssbd_status;

typedef enum ssbd_paradigm {
  SSBD_PARADIGM_AR = 0,   /* greedy re-translation from scratch */
  SSBD_PARADIGM_SSBD = 1  /* previous output as a biased-verified draft */
} ssbd_paradigm;

typedef enum ssbd_mask_mode {
  SSBD_MASK_NONE = 0,
  SSBD_MASK_TRIM_DRAFT = 1,
  SSBD_MASK_DISPLAY_ONLY = 2
} ssbd_mask_mode;

typedef struct ssbd_model ssbd_model;
typedef struct ssbd_session ssbd_session;
typedef struct ssbd_server ssbd_server;

SSBD_API const char* ssbd_status_name(ssbd_status status);
SSBD_API const char* ssbd_last_error(void);
SSBD_API const char* ssbd_version(void);

/* ---- models ------------------------------------------------------------ */

/* Loads a table or n-gram model document. */
SSBD_API ssbd_status ssbd_model_load(const char* path, ssbd_model** out);

/* Connects to a server speaking the /v1/forward protocol,
 * e.g. "http://127.0.0.1:8080". */
SSBD_API ssbd_status ssbd_model_connect(const char* endpoint, ssbd_model** out);

SSBD_API void ssbd_model_free(ssbd_model* model);

SSBD_API ssbd_status ssbd_model_vocab(const ssbd_model* model, size_t* size, uint32_t* eos_id);

/* Distributions for positions [from_position, n_tokens), row-major with
 * vocab-size columns. capacity counts doubles. */
SSBD_API ssbd_status ssbd_model_forward(const ssbd_model* model, const uint32_t* tokens,
                                        size_t n_tokens, size_t from_position, double* probs,
                                        size_t capacity);

/* Trains an add-alpha n-gram model on a whitespace-tokenized corpus (one
 * sequence per line, EOS appended) and writes the model document. prefix and
 * separator are space-separated words forming the prompt template; either may
 * be NULL or empty. */
SSBD_API ssbd_status ssbd_ngram_train(const char* corpus_path, size_t order, double alpha,
                                      const char* prefix, const char* separator,
                                      const char* out_path);

/* ---- sessions ---------------------------------------------------------- */

typedef struct ssbd_decode_config {
  double beta;            /* [0, 1] */
  size_t max_new_tokens;  /* 0 selects 4 * |input| + 16 */
  size_t mask_k;
  ssbd_mask_mode mask_mode;
} ssbd_decode_config;

SSBD_API void ssbd_decode_config_init(ssbd_decode_config* config);

typedef struct ssbd_update_info {
  size_t accepted;
  size_t draft_len;
  size_t output_len;
  size_t display_len;
  uint64_t forwards;
  uint64_t prefill_positions;
  uint64_t decode_steps;
  uint64_t wall_nanos;
  int truncated;
} ssbd_update_info;

/* The session keeps a reference to the model. */
SSBD_API ssbd_status ssbd_session_create(const ssbd_model* model, ssbd_paradigm paradigm,
                                         const ssbd_decode_config* config, ssbd_session** out);
SSBD_API void ssbd_session_free(ssbd_session* session);

/* Feeds the full current input. info may be NULL. */
SSBD_API ssbd_status ssbd_session_update(ssbd_session* session, const uint32_t* input,
                                         size_t n_input, int is_final, ssbd_update_info* info);
SSBD_API ssbd_status ssbd_session_update_text(ssbd_session* session, const char* input,
                                              int is_final, ssbd_update_info* info);

/* Latest output (display != 0: the displayed view). *len receives the
 * length even when the buffer is too small. */
SSBD_API ssbd_status ssbd_session_output(const ssbd_session* session, int display,
                                         uint32_t* tokens, size_t capacity, size_t* len);

/* ---- experiments ------------------------------------------------------- */

typedef struct ssbd_experiment_options {
  ssbd_paradigm paradigm;        /* ssbd_run only */
  ssbd_decode_config config;
  const double* beta_grid;       /* ssbd_compare only; NULL uses config.beta */
  size_t beta_grid_len;
  size_t jobs;                   /* worker threads, >= 1 */
  int timing;                    /* 0 writes wall_nanos as 0 */
  const char* transcript_path;   /* exactly one of transcript_path ... */
  const char* corpus_path;       /* ... or corpus_path with lag_k */
  size_t lag_k;
  const char* trace_path;        /* optional */
  const char* report_path;       /* "-" writes the report to stdout */
} ssbd_experiment_options;

SSBD_API void ssbd_experiment_options_init(ssbd_experiment_options* options);

SSBD_API ssbd_status ssbd_run(const ssbd_model* model, const ssbd_experiment_options* options);

/* AR and SSBD on identical inputs, one SSBD pass per grid value. */
SSBD_API ssbd_status ssbd_compare(const ssbd_model* model, const ssbd_experiment_options* options);

/* Sentence-per-line corpus to transcript JSONL. */
SSBD_API ssbd_status ssbd_lagk(const char* corpus_path, size_t k, const char* out_path);

/* Recomputes the CSV report from a trace file. report_path may be "-". */
SSBD_API ssbd_status ssbd_report_from_trace(const char* trace_path, const char* report_path);

/* ---- mock server ------------------------------------------------------- */

/* Serves the model on host:port (0 picks a free port) from a background
 * thread. */
SSBD_API ssbd_status ssbd_server_start(const ssbd_model* model, const char* host, int port,
                                       ssbd_server** out);
SSBD_API int ssbd_server_port(const ssbd_server* server);
SSBD_API void ssbd_server_stop(ssbd_server* server);
/* Blocks until the server stops. */
SSBD_API void ssbd_server_wait(ssbd_server* server);
SSBD_API void ssbd_server_free(ssbd_server* server);

#ifdef __cplusplus
}
#endif

#endif /* SSBD_SSBD_H_ */
