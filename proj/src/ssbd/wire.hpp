// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ssbd Authors

#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <thread>

#include "ssbd/model.hpp"

namespace httplib {
class Server;
}

namespace ssbd {

// JSON over HTTP:
//   POST /v1/forward  {"tokens": [int], "from_position": int}
//     -> {"vocab_size": V, "probs": [[V floats], ...]}                 V <= threshold
//     -> {"vocab_size": V, "top_k": [[[id, p], ...], ...]}             otherwise
//   GET  /v1/vocab    -> {"size": V, "eos_id": e, "tokens": [...],
//                          "prompt": {"prefix": [...], "separator": [...]}}
//                        tokens and prompt optional
//   malformed request -> 400 {"error": "..."}

struct WireOptions {
  std::size_t full_vocab_limit = 4096;
  std::size_t top_k = 64;
};

/// Client side of the wire protocol. Missing ids in a top-K row get zero
/// probability and the row is renormalized.
class RemoteModel final : public LanguageModel {
 public:
  /// Fetches the vocabulary from `endpoint` (e.g. "http://127.0.0.1:8080").
  explicit RemoteModel(std::string endpoint,
                       std::chrono::milliseconds timeout = std::chrono::seconds(30));

  /// Validates the served vocab against `expected`; mismatch is kConfig.
  RemoteModel(std::string endpoint, const Vocab& expected,
              std::chrono::milliseconds timeout = std::chrono::seconds(30));

  const Vocab& vocab() const override { return *vocab_; }
  std::vector<ProbDist> forward(TokenSpan prompt, std::size_t from_position) const override;

  const std::string& endpoint() const noexcept { return endpoint_; }
  /// Prompt template advertised by the server, if any.
  const std::optional<PromptTemplate>& prompt() const noexcept { return prompt_; }

 private:
  std::string endpoint_;
  std::optional<PromptTemplate> prompt_;
  std::chrono::milliseconds timeout_;
  std::unique_ptr<Vocab> vocab_;
};

/// Decodes a /v1/forward response body. Exposed for protocol tests.
std::vector<ProbDist> decode_forward_response(const std::string& body, std::size_t vocab_size,
                                              std::size_t expected_rows);

/// Encodes forward output the way the mock server does.
std::string encode_forward_response(const std::vector<ProbDist>& rows, std::size_t vocab_size,
                                    const WireOptions& options);

/// Serves a model over the wire protocol on a background thread.
class MockServer {
 public:
  MockServer(std::shared_ptr<const LanguageModel> model, WireOptions options = {},
             std::optional<PromptTemplate> prompt = std::nullopt);
  ~MockServer();

  MockServer(const MockServer&) = delete;
  MockServer& operator=(const MockServer&) = delete;

  /// Binds and starts serving. Port 0 picks a free port. Returns the bound
  /// port; a bind failure is kTransport.
  int start(const std::string& host, int port);

  /// Blocks until the server has stopped.
  void wait();
  void stop();

  int port() const noexcept { return port_; }

 private:
  std::shared_ptr<const LanguageModel> model_;
  WireOptions options_;
  std::optional<PromptTemplate> prompt_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = -1;
};

}  // namespace ssbd
