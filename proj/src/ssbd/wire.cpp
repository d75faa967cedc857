// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ssbd Authors

#include "ssbd/wire.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "httplib.h"
#include "json.hpp"
#include "ssbd/error.hpp"
#include "ssbd/model_io.hpp"

namespace ssbd {

using nlohmann::json;

namespace {

constexpr double kWireSumTolerance = 1e-6;

httplib::Client make_client(const std::string& endpoint, std::chrono::milliseconds timeout) {
  httplib::Client client(endpoint);
  if (!client.is_valid()) throw Error(ErrorCode::kConfig, "invalid endpoint '" + endpoint + "'");
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  return client;
}

json parse_body(const std::string& body, const char* what) {
  try {
    return json::parse(body);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kProtocol, std::string(what) + ": " + e.what());
  }
}

std::string http_failure(const httplib::Result& res) {
  std::string msg = "HTTP " + std::to_string(res->status);
  auto body = json::parse(res->body, nullptr, false);
  if (body.is_object() && body.contains("error") && body["error"].is_string()) {
    msg += ": " + body["error"].get<std::string>();
  }
  return msg;
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  res.status = status;
  res.set_content(json{{"error", message}}.dump(), "application/json");
}

}  // namespace

RemoteModel::RemoteModel(std::string endpoint, std::chrono::milliseconds timeout)
    : endpoint_(std::move(endpoint)), timeout_(timeout) {
  auto client = make_client(endpoint_, timeout_);
  auto res = client.Get("/v1/vocab");
  if (!res) {
    throw Error(ErrorCode::kTransport, "GET " + endpoint_ + "/v1/vocab: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) throw Error(ErrorCode::kProtocol, "GET /v1/vocab: " + http_failure(res));
  auto doc = parse_body(res->body, "/v1/vocab response");
  try {
    vocab_ = std::make_unique<Vocab>(vocab_from_json(doc));
    if (doc.contains("prompt")) {
      const auto& p = doc.at("prompt");
      prompt_ = PromptTemplate{p.at("prefix").get<TokenSeq>(), p.at("separator").get<TokenSeq>()};
      vocab_->check(prompt_->prefix);
      vocab_->check(prompt_->separator);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kProtocol, std::string("/v1/vocab response: ") + e.what());
  }
}

RemoteModel::RemoteModel(std::string endpoint, const Vocab& expected,
                         std::chrono::milliseconds timeout)
    : RemoteModel(std::move(endpoint), timeout) {
  if (vocab_->size() != expected.size() || vocab_->eos_id() != expected.eos_id()) {
    throw Error(ErrorCode::kConfig, "remote vocab (size " + std::to_string(vocab_->size()) +
                                        ") does not match expected size " +
                                        std::to_string(expected.size()));
  }
}

std::vector<ProbDist> RemoteModel::forward(TokenSpan prompt, std::size_t from_position) const {
  if (prompt.empty()) throw Error(ErrorCode::kPrecondition, "remote forward needs a non-empty prompt");
  if (from_position > prompt.size()) {
    throw Error(ErrorCode::kPrecondition, "from_position beyond prompt length");
  }
  vocab_->check(prompt);
  json request{{"tokens", TokenSeq(prompt.begin(), prompt.end())}, {"from_position", from_position}};
  auto client = make_client(endpoint_, timeout_);
  auto res = client.Post("/v1/forward", request.dump(), "application/json");
  if (!res) {
    throw Error(ErrorCode::kTransport, "POST " + endpoint_ + "/v1/forward: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) throw Error(ErrorCode::kProtocol, "POST /v1/forward: " + http_failure(res));
  return decode_forward_response(res->body, vocab_->size(), prompt.size() - from_position);
}

std::vector<ProbDist> decode_forward_response(const std::string& body, std::size_t vocab_size,
                                              std::size_t expected_rows) {
  const json doc = parse_body(body, "/v1/forward response");
  std::vector<ProbDist> out;
  try {
    const auto served = doc.at("vocab_size").get<std::size_t>();
    if (served != vocab_size) {
      throw Error(ErrorCode::kConfig, "response vocab_size " + std::to_string(served) +
                                          " differs from " + std::to_string(vocab_size));
    }
    if (doc.contains("probs")) {
      for (const auto& row : doc.at("probs")) {
        auto probs = row.get<std::vector<double>>();
        if (probs.size() != vocab_size) throw Error(ErrorCode::kProtocol, "probability row has wrong length");
        const double sum = std::accumulate(probs.begin(), probs.end(), 0.0);
        if (!(std::abs(sum - 1.0) <= kWireSumTolerance)) {
          throw Error(ErrorCode::kProtocol, "probability row does not sum to 1");
        }
        out.push_back(ProbDist::renormalized(std::move(probs)));
      }
    } else if (doc.contains("top_k")) {
      for (const auto& row : doc.at("top_k")) {
        std::vector<double> probs(vocab_size, 0.0);
        for (const auto& pair : row) {
          const auto id = pair.at(0).get<TokenId>();
          const double p = pair.at(1).get<double>();
          if (id >= vocab_size) throw Error(ErrorCode::kProtocol, "top-k id outside vocab");
          if (!std::isfinite(p) || p < 0.0) throw Error(ErrorCode::kProtocol, "top-k probability invalid");
          probs[id] = p;
        }
        const double sum = std::accumulate(probs.begin(), probs.end(), 0.0);
        if (!(sum > 0.0) || sum > 1.0 + kWireSumTolerance) {
          throw Error(ErrorCode::kProtocol, "top-k row mass outside (0, 1]");
        }
        out.push_back(ProbDist::renormalized(std::move(probs)));
      }
    } else {
      throw Error(ErrorCode::kProtocol, "response has neither probs nor top_k");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kProtocol, std::string("/v1/forward response: ") + e.what());
  }
  if (out.size() != expected_rows) {
    throw Error(ErrorCode::kProtocol, "response has " + std::to_string(out.size()) +
                                          " rows, expected " + std::to_string(expected_rows));
  }
  return out;
}

std::string encode_forward_response(const std::vector<ProbDist>& rows, std::size_t vocab_size,
                                    const WireOptions& options) {
  json doc{{"vocab_size", vocab_size}};
  if (vocab_size <= options.full_vocab_limit) {
    json probs = json::array();
    for (const auto& r : rows) probs.push_back(std::vector<double>(r.values().begin(), r.values().end()));
    doc["probs"] = std::move(probs);
  } else {
    json top = json::array();
    const std::size_t k = std::min(options.top_k, vocab_size);
    std::vector<TokenId> ids(vocab_size);
    for (const auto& r : rows) {
      std::iota(ids.begin(), ids.end(), TokenId{0});
      // Highest probability first, lowest id on ties.
      std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(k), ids.end(),
                        [&r](TokenId a, TokenId b) { return r[a] > r[b] || (r[a] == r[b] && a < b); });
      json row = json::array();
      for (std::size_t i = 0; i < k; ++i) row.push_back({ids[i], r[ids[i]]});
      top.push_back(std::move(row));
    }
    doc["top_k"] = std::move(top);
  }
  return doc.dump();
}

MockServer::MockServer(std::shared_ptr<const LanguageModel> model, WireOptions options,
                       std::optional<PromptTemplate> prompt)
    : model_(std::move(model)),
      options_(options),
      prompt_(std::move(prompt)),
      server_(std::make_unique<httplib::Server>()) {
  // SO_REUSEADDR only: the library default also sets SO_REUSEPORT, which
  // would let a second server bind a port that is already in use.
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  });
  server_->Get("/v1/vocab", [this](const httplib::Request&, httplib::Response& res) {
    json doc = vocab_to_json(model_->vocab());
    if (prompt_) doc["prompt"] = {{"prefix", prompt_->prefix}, {"separator", prompt_->separator}};
    res.set_content(doc.dump(), "application/json");
  });
  server_->Post("/v1/forward", [this](const httplib::Request& req, httplib::Response& res) {
    auto doc = json::parse(req.body, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) return send_error(res, 400, "body is not a JSON object");
    if (!doc.contains("tokens") || !doc["tokens"].is_array()) {
      return send_error(res, 400, "missing array field 'tokens'");
    }
    if (!doc.contains("from_position") || !doc["from_position"].is_number_unsigned()) {
      return send_error(res, 400, "missing non-negative integer field 'from_position'");
    }
    TokenSeq tokens;
    for (const auto& t : doc["tokens"]) {
      if (!t.is_number_unsigned()) return send_error(res, 400, "tokens must be non-negative integers");
      tokens.push_back(t.get<TokenId>());
    }
    const auto from = doc["from_position"].get<std::size_t>();
    if (tokens.empty()) return send_error(res, 400, "tokens must be non-empty");
    if (from > tokens.size()) return send_error(res, 400, "from_position beyond tokens");
    try {
      auto rows = model_->forward(tokens, from);
      res.set_content(encode_forward_response(rows, model_->vocab().size(), options_),
                      "application/json");
    } catch (const Error& e) {
      send_error(res, 400, e.what());
    }
  });
}

MockServer::~MockServer() {
  stop();
  wait();
}

int MockServer::start(const std::string& host, int port) {
  if (port == 0) {
    port_ = server_->bind_to_any_port(host);
  } else {
    port_ = server_->bind_to_port(host, port) ? port : -1;
  }
  if (port_ < 0) {
    throw Error(ErrorCode::kTransport, "cannot bind " + host + ":" + std::to_string(port));
  }
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port_;
}

void MockServer::wait() {
  if (thread_.joinable()) thread_.join();
}

void MockServer::stop() {
  if (server_) server_->stop();
}

}  // namespace ssbd
