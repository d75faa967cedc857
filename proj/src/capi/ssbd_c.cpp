// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ssbd Authors

#include "ssbd/ssbd.h"

#include <algorithm>
#include <fstream>
#include <memory>
#include <new>
#include <string>

#include "ssbd/decoder.hpp"
#include "ssbd/error.hpp"
#include "ssbd/experiment.hpp"
#include "ssbd/log.hpp"
#include "ssbd/model_io.hpp"
#include "ssbd/stream.hpp"
#include "ssbd/wire.hpp"

struct ssbd_model {
  ssbd::ModelBundle bundle;
};

struct ssbd_session {
  ssbd::ModelBundle bundle;
  ssbd::Paradigm paradigm;
  ssbd::SessionState state;
  ssbd::TokenSeq output;
  ssbd::TokenSeq display;
};

struct ssbd_server {
  std::unique_ptr<ssbd::MockServer> server;
};

namespace {

thread_local std::string g_last_error;

ssbd_status fail(ssbd_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

ssbd_status status_of(ssbd::ErrorCode code) { return static_cast<ssbd_status>(code); }

/// Runs `body`, translating exceptions into status codes.
template <typename F>
ssbd_status guarded(F&& body) noexcept {
  try {
    body();
    return SSBD_OK;
  } catch (const ssbd::Error& e) {
    return fail(status_of(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(SSBD_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SSBD_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(SSBD_ERR_INTERNAL, "unknown exception");
  }
}

#define SSBD_REQUIRE(cond)                                                      \
  do {                                                                          \
    if (!(cond)) return fail(SSBD_ERR_INVALID_ARGUMENT, "invalid argument: " #cond); \
  } while (0)

ssbd::DecodeConfig to_config(const ssbd_decode_config& c) {
  ssbd::DecodeConfig config;
  config.beta = c.beta;
  if (c.max_new_tokens > 0) config.max_new_tokens = c.max_new_tokens;
  config.mask_k = c.mask_k;
  switch (c.mask_mode) {
    case SSBD_MASK_NONE: config.mask_mode = ssbd::MaskMode::kNone; break;
    case SSBD_MASK_TRIM_DRAFT: config.mask_mode = ssbd::MaskMode::kTrimDraft; break;
    case SSBD_MASK_DISPLAY_ONLY: config.mask_mode = ssbd::MaskMode::kDisplayOnly; break;
    default: throw ssbd::Error(ssbd::ErrorCode::kConfig, "unknown mask mode");
  }
  config.validate();
  return config;
}

ssbd::Paradigm to_paradigm(ssbd_paradigm p) {
  switch (p) {
    case SSBD_PARADIGM_AR: return ssbd::Paradigm::kAr;
    case SSBD_PARADIGM_SSBD: return ssbd::Paradigm::kSsbd;
  }
  throw ssbd::Error(ssbd::ErrorCode::kConfig, "unknown paradigm");
}

std::vector<ssbd::StreamSession> load_sessions(const ssbd_experiment_options& o) {
  const bool has_transcript = o.transcript_path && *o.transcript_path;
  const bool has_corpus = o.corpus_path && *o.corpus_path;
  if (has_transcript == has_corpus) {
    throw ssbd::Error(ssbd::ErrorCode::kConfig, "exactly one of transcript or corpus is required");
  }
  if (has_transcript) return ssbd::load_transcript(o.transcript_path);
  std::ifstream in(o.corpus_path);
  if (!in) throw ssbd::Error(ssbd::ErrorCode::kFile, std::string("cannot open corpus '") + o.corpus_path + "'");
  auto sessions = ssbd::lag_k_corpus(in, o.lag_k);
  if (sessions.empty()) throw ssbd::Error(ssbd::ErrorCode::kValidation, "corpus has no sentences");
  return sessions;
}

ssbd::ExperimentSpec to_spec(const ssbd_experiment_options& o) {
  ssbd::ExperimentSpec spec;
  spec.paradigm = to_paradigm(o.paradigm);
  spec.config = to_config(o.config);
  if (o.beta_grid && o.beta_grid_len > 0) spec.beta_grid.assign(o.beta_grid, o.beta_grid + o.beta_grid_len);
  for (double b : spec.beta_grid) {
    ssbd::DecodeConfig c = spec.config;
    c.beta = b;
    c.validate();
  }
  if (o.jobs == 0) throw ssbd::Error(ssbd::ErrorCode::kConfig, "jobs must be at least 1");
  spec.jobs = o.jobs;
  spec.timing = o.timing != 0;
  return spec;
}

void write_outputs(const ssbd_experiment_options& o, const ssbd::ExperimentResult& result,
                   const ssbd::Vocab& vocab) {
  if (o.trace_path && *o.trace_path) ssbd::write_trace_file(o.trace_path, result.traces, vocab);
  if (o.report_path && *o.report_path) ssbd::emit_report(result.rows, o.report_path);
}

void fill_info(const ssbd::UpdateResult& r, ssbd_update_info* info) {
  if (!info) return;
  info->accepted = r.verification.accepted;
  info->draft_len = r.draft_len;
  info->output_len = r.output.size();
  info->display_len = r.display_output.size();
  info->forwards = r.steps.forwards;
  info->prefill_positions = r.steps.prefill_positions;
  info->decode_steps = r.steps.decode_steps;
  info->wall_nanos = r.steps.wall_nanos;
  info->truncated = r.truncated ? 1 : 0;
}

ssbd_status session_update(ssbd_session* s, ssbd::TokenSeq input, int is_final,
                           ssbd_update_info* info) {
  return guarded([&] {
    const auto& lm = *s->bundle.model;
    ssbd::UpdateResult r;
    if (s->paradigm == ssbd::Paradigm::kAr) {
      s->state.input = std::move(input);
      r = ssbd::ar_decode(lm, s->state, is_final != 0);
    } else {
      r = ssbd::ssbd_update(lm, s->state, std::move(input), is_final != 0);
    }
    fill_info(r, info);
    s->output = std::move(r.output);
    s->display = std::move(r.display_output);
  });
}

std::vector<std::string> words_or_empty(const char* text) {
  return text ? ssbd::split_words(text) : std::vector<std::string>{};
}

}  // namespace

extern "C" {

const char* ssbd_status_name(ssbd_status status) {
  switch (status) {
    case SSBD_OK: return "ok";
    case SSBD_ERR_INVALID_ARGUMENT: return "invalid argument";
    case SSBD_ERR_BUFFER_TOO_SMALL: return "buffer too small";
    case SSBD_ERR_INTERNAL: return "internal error";
    default: break;
  }
  if (status >= SSBD_ERR_CONFIG && status <= SSBD_ERR_UNDEFINED_METRIC) {
    return ssbd::to_string(static_cast<ssbd::ErrorCode>(status));
  }
  return "unknown status";
}

const char* ssbd_last_error(void) { return g_last_error.c_str(); }

const char* ssbd_version(void) { return "0.1.0"; }

ssbd_status ssbd_model_load(const char* path, ssbd_model** out) {
  SSBD_REQUIRE(path && out);
  *out = nullptr;
  return guarded([&] {
    auto bundle = ssbd::load_model_file(path);
    ssbd::log().info("loaded model '{}' (vocab {})", path, bundle.model->vocab().size());
    *out = new ssbd_model{std::move(bundle)};
  });
}

ssbd_status ssbd_model_connect(const char* endpoint, ssbd_model** out) {
  SSBD_REQUIRE(endpoint && out);
  *out = nullptr;
  return guarded([&] {
    auto remote = std::make_shared<ssbd::RemoteModel>(endpoint);
    ssbd::log().info("connected to '{}' (vocab {})", endpoint, remote->vocab().size());
    auto prompt = remote->prompt().value_or(ssbd::PromptTemplate{});
    *out = new ssbd_model{ssbd::ModelBundle{std::move(remote), std::move(prompt)}};
  });
}

void ssbd_model_free(ssbd_model* model) { delete model; }

ssbd_status ssbd_model_vocab(const ssbd_model* model, size_t* size, uint32_t* eos_id) {
  SSBD_REQUIRE(model);
  const auto& v = model->bundle.model->vocab();
  if (size) *size = v.size();
  if (eos_id) *eos_id = v.eos_id();
  return SSBD_OK;
}

ssbd_status ssbd_model_forward(const ssbd_model* model, const uint32_t* tokens, size_t n_tokens,
                               size_t from_position, double* probs, size_t capacity) {
  SSBD_REQUIRE(model && (tokens || n_tokens == 0));
  const std::size_t vsize = model->bundle.model->vocab().size();
  if (from_position <= n_tokens && (n_tokens - from_position) * vsize > capacity) {
    return fail(SSBD_ERR_BUFFER_TOO_SMALL, "output buffer holds " + std::to_string(capacity) +
                                               " values, need " +
                                               std::to_string((n_tokens - from_position) * vsize));
  }
  SSBD_REQUIRE(probs || from_position >= n_tokens);
  return guarded([&] {
    auto rows = model->bundle.model->forward(ssbd::TokenSpan(tokens, n_tokens), from_position);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      std::copy(rows[i].values().begin(), rows[i].values().end(), probs + i * vsize);
    }
  });
}

ssbd_status ssbd_ngram_train(const char* corpus_path, size_t order, double alpha,
                             const char* prefix, const char* separator, const char* out_path) {
  SSBD_REQUIRE(corpus_path && out_path);
  return guarded([&] {
    std::ifstream in(corpus_path);
    if (!in) throw ssbd::Error(ssbd::ErrorCode::kFile, std::string("cannot open corpus '") + corpus_path + "'");
    const auto prefix_words = words_or_empty(prefix);
    const auto sep_words = words_or_empty(separator);

    std::vector<std::vector<std::string>> lines;
    for (std::string line; std::getline(in, line);) {
      auto words = ssbd::split_words(line);
      if (!words.empty()) lines.push_back(std::move(words));
    }
    if (lines.empty()) throw ssbd::Error(ssbd::ErrorCode::kConfig, "corpus has no sentences");

    // "<eos>" is id 0; other ids follow first appearance.
    std::vector<std::string> strings{"<eos>"};
    auto intern = [&](const std::string& w) {
      if (std::find(strings.begin(), strings.end(), w) == strings.end()) strings.push_back(w);
    };
    for (const auto& w : prefix_words) intern(w);
    for (const auto& w : sep_words) intern(w);
    for (const auto& l : lines) {
      for (const auto& w : l) intern(w);
    }
    ssbd::Vocab vocab(strings, 0);

    std::vector<ssbd::TokenSeq> corpus;
    for (const auto& l : lines) {
      ssbd::TokenSeq seq;
      for (const auto& w : prefix_words) seq.push_back(*vocab.find(w));
      for (const auto& w : l) seq.push_back(*vocab.find(w));
      seq.push_back(vocab.eos_id());
      corpus.push_back(std::move(seq));
    }
    ssbd::PromptTemplate prompt;
    for (const auto& w : prefix_words) prompt.prefix.push_back(*vocab.find(w));
    for (const auto& w : sep_words) prompt.separator.push_back(*vocab.find(w));

    const auto model = ssbd::NgramModel::train(std::move(vocab), corpus, order, alpha);
    ssbd::save_json_file(ssbd::model_to_json(model, prompt), out_path);
  });
}

void ssbd_decode_config_init(ssbd_decode_config* config) {
  if (!config) return;
  config->beta = 0.0;
  config->max_new_tokens = 0;
  config->mask_k = 0;
  config->mask_mode = SSBD_MASK_NONE;
}

ssbd_status ssbd_session_create(const ssbd_model* model, ssbd_paradigm paradigm,
                                const ssbd_decode_config* config, ssbd_session** out) {
  SSBD_REQUIRE(model && config && out);
  *out = nullptr;
  return guarded([&] {
    auto s = std::make_unique<ssbd_session>();
    s->bundle = model->bundle;
    s->paradigm = to_paradigm(paradigm);
    s->state.prompt = model->bundle.prompt;
    s->state.config = to_config(*config);
    *out = s.release();
  });
}

void ssbd_session_free(ssbd_session* session) { delete session; }

ssbd_status ssbd_session_update(ssbd_session* session, const uint32_t* input, size_t n_input,
                                int is_final, ssbd_update_info* info) {
  SSBD_REQUIRE(session && (input || n_input == 0));
  return session_update(session, ssbd::TokenSeq(input, input + n_input), is_final, info);
}

ssbd_status ssbd_session_update_text(ssbd_session* session, const char* input, int is_final,
                                     ssbd_update_info* info) {
  SSBD_REQUIRE(session && input);
  ssbd::TokenSeq tokens;
  if (auto st = guarded([&] { tokens = session->bundle.model->vocab().encode(input); }); st != SSBD_OK) {
    return st;
  }
  return session_update(session, std::move(tokens), is_final, info);
}

ssbd_status ssbd_session_output(const ssbd_session* session, int display, uint32_t* tokens,
                                size_t capacity, size_t* len) {
  SSBD_REQUIRE(session);
  const auto& seq = display ? session->display : session->output;
  if (len) *len = seq.size();
  if (seq.size() > capacity) return fail(SSBD_ERR_BUFFER_TOO_SMALL, "output buffer too small");
  SSBD_REQUIRE(tokens || seq.empty());
  std::copy(seq.begin(), seq.end(), tokens);
  return SSBD_OK;
}

void ssbd_experiment_options_init(ssbd_experiment_options* options) {
  if (!options) return;
  *options = ssbd_experiment_options{};
  options->paradigm = SSBD_PARADIGM_SSBD;
  ssbd_decode_config_init(&options->config);
  options->jobs = 1;
  options->timing = 1;
  options->lag_k = 3;
}

ssbd_status ssbd_run(const ssbd_model* model, const ssbd_experiment_options* options) {
  SSBD_REQUIRE(model && options);
  return guarded([&] {
    const auto spec = to_spec(*options);
    const auto sessions = load_sessions(*options);
    ssbd::log().info("run: {} sessions, paradigm {}", sessions.size(), ssbd::to_string(spec.paradigm));
    const auto result = ssbd::run_experiment(model->bundle, sessions, spec);
    write_outputs(*options, result, model->bundle.model->vocab());
  });
}

ssbd_status ssbd_compare(const ssbd_model* model, const ssbd_experiment_options* options) {
  SSBD_REQUIRE(model && options);
  return guarded([&] {
    const auto spec = to_spec(*options);
    const auto sessions = load_sessions(*options);
    ssbd::log().info("compare: {} sessions, {} grid values", sessions.size(),
                     std::max<std::size_t>(spec.beta_grid.size(), 1));
    const auto result = ssbd::compare_experiment(model->bundle, sessions, spec);
    write_outputs(*options, result, model->bundle.model->vocab());
  });
}

ssbd_status ssbd_lagk(const char* corpus_path, size_t k, const char* out_path) {
  SSBD_REQUIRE(corpus_path && out_path);
  return guarded([&] {
    if (k == 0) throw ssbd::Error(ssbd::ErrorCode::kConfig, "lag k must be at least 1");
    std::ifstream in(corpus_path);
    if (!in) throw ssbd::Error(ssbd::ErrorCode::kFile, std::string("cannot open corpus '") + corpus_path + "'");
    const auto sessions = ssbd::lag_k_corpus(in, k);
    if (sessions.empty()) throw ssbd::Error(ssbd::ErrorCode::kValidation, "corpus has no sentences");
    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    if (!out) throw ssbd::Error(ssbd::ErrorCode::kFile, std::string("cannot write '") + out_path + "'");
    ssbd::write_transcript(out, sessions);
    if (!out) throw ssbd::Error(ssbd::ErrorCode::kFile, std::string("write failed for '") + out_path + "'");
  });
}

ssbd_status ssbd_report_from_trace(const char* trace_path, const char* report_path) {
  SSBD_REQUIRE(trace_path && report_path);
  return guarded([&] {
    ssbd::emit_report(ssbd::report_from_traces(ssbd::read_trace_file(trace_path)), report_path);
  });
}

ssbd_status ssbd_server_start(const ssbd_model* model, const char* host, int port,
                              ssbd_server** out) {
  SSBD_REQUIRE(model && host && out && port >= 0 && port <= 65535);
  *out = nullptr;
  return guarded([&] {
    auto s = std::make_unique<ssbd_server>();
    s->server = std::make_unique<ssbd::MockServer>(model->bundle.model, ssbd::WireOptions{},
                                                    model->bundle.prompt);
    const int bound = s->server->start(host, port);
    ssbd::log().info("serving on {}:{}", host, bound);
    *out = s.release();
  });
}

int ssbd_server_port(const ssbd_server* server) { return server ? server->server->port() : -1; }

void ssbd_server_stop(ssbd_server* server) {
  if (server) server->server->stop();
}

void ssbd_server_wait(ssbd_server* server) {
  if (server) server->server->wait();
}

void ssbd_server_free(ssbd_server* server) { delete server; }

}  // extern "C"
