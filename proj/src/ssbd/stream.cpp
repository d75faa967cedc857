// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ssbd Authors

#include "ssbd/stream.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "ssbd/error.hpp"
#include "ssbd/log.hpp"
#include "ssbd/metrics.hpp"

namespace ssbd {

using nlohmann::json;

std::string_view to_string(Paradigm paradigm) noexcept {
  return paradigm == Paradigm::kAr ? "ar" : "ssbd";
}

Paradigm paradigm_from_string(std::string_view name) {
  if (name == "ar") return Paradigm::kAr;
  if (name == "ssbd") return Paradigm::kSsbd;
  throw Error(ErrorCode::kConfig, "unknown paradigm '" + std::string(name) + "'");
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::istringstream in{std::string(text)};
  std::string w;
  while (in >> w) words.push_back(std::move(w));
  return words;
}

namespace {

std::string join_words(const std::vector<std::string>& words, std::size_t count) {
  std::string out;
  for (std::size_t i = 0; i < count; ++i) {
    if (i) out += ' ';
    out += words[i];
  }
  return out;
}

}  // namespace

StreamSession lag_k_updates(const std::vector<std::string>& words, std::size_t k,
                            const std::string& session_id) {
  if (k == 0) throw Error(ErrorCode::kConfig, "lag k must be at least 1");
  if (words.empty()) throw Error(ErrorCode::kPrecondition, "lag-k needs at least one word");
  StreamSession out;
  const std::size_t n = (words.size() + k - 1) / k;
  for (std::size_t i = 1; i <= n; ++i) {
    out.push_back({session_id, i, join_words(words, std::min(i * k, words.size()))});
  }
  return out;
}

std::vector<StreamSession> lag_k_corpus(std::istream& corpus, std::size_t k) {
  std::vector<StreamSession> out;
  std::string line;
  while (std::getline(corpus, line)) {
    auto words = split_words(line);
    if (words.empty()) continue;
    out.push_back(lag_k_updates(words, k, "s" + std::to_string(out.size() + 1)));
  }
  return out;
}

std::vector<StreamSession> parse_transcript(std::istream& in) {
  std::map<std::string, std::map<std::size_t, StreamUpdate>> grouped;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    StreamUpdate u;
    try {
      const auto doc = json::parse(line);
      u.session_id = doc.at("session").get<std::string>();
      u.t = doc.at("t").get<std::size_t>();
      u.input = doc.at("input").get<std::string>();
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kParse, "transcript line " + std::to_string(line_no) + ": " + e.what());
    }
    if (split_words(u.input).empty()) {
      throw Error(ErrorCode::kValidation, "transcript line " + std::to_string(line_no) + ": empty input");
    }
    auto& session = grouped[u.session_id];
    const std::size_t t = u.t;
    if (!session.emplace(t, std::move(u)).second) {
      throw Error(ErrorCode::kValidation, "transcript line " + std::to_string(line_no) +
                                              ": duplicate t=" + std::to_string(t) + " in session");
    }
  }
  std::vector<StreamSession> out;
  for (auto& [id, updates] : grouped) {
    StreamSession s;
    for (auto& [t, u] : updates) s.push_back(std::move(u));
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<StreamSession> load_transcript(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFile, "cannot open transcript '" + path + "'");
  return parse_transcript(in);
}

void write_transcript(std::ostream& out, const std::vector<StreamSession>& sessions) {
  for (const auto& s : sessions) {
    for (const auto& u : s) {
      out << json{{"session", u.session_id}, {"t", u.t}, {"input", u.input}}.dump() << '\n';
    }
  }
}

SessionTrace run_session(const ModelBundle& bundle, const StreamSession& updates,
                         const DecodeConfig& config, Paradigm paradigm) {
  if (updates.empty()) throw Error(ErrorCode::kPrecondition, "session has no updates");
  const LanguageModel& lm = *bundle.model;
  SessionTrace trace;
  trace.session_id = updates.front().session_id;
  trace.paradigm = paradigm;
  trace.config = config;

  SessionState state;
  state.prompt = bundle.prompt;
  state.config = config;
  TokenSeq prev_display;

  for (std::size_t i = 0; i < updates.size(); ++i) {
    const StreamUpdate& u = updates[i];
    try {
      if (u.session_id != trace.session_id) {
        throw Error(ErrorCode::kValidation, "update belongs to session '" + u.session_id + "'");
      }
      if (i > 0 && u.t <= updates[i - 1].t) throw Error(ErrorCode::kValidation, "t not increasing");
      const bool is_final = i + 1 == updates.size();
      TokenSeq input = lm.vocab().encode(u.input);
      UpdateResult r;
      if (paradigm == Paradigm::kAr) {
        state.input = std::move(input);
        r = ar_decode(lm, state, is_final);
      } else {
        r = ssbd_update(lm, state, std::move(input), is_final);
      }
      UpdateRecord rec;
      rec.t = u.t;
      rec.input = u.input;
      rec.accepted = r.verification.accepted;
      rec.draft_len = r.draft_len;
      rec.erasure = erasure(prev_display, r.display_output);
      rec.forwards = r.steps.forwards;
      rec.prefill_positions = r.steps.prefill_positions;
      rec.decode_steps = r.steps.decode_steps;
      rec.wall_nanos = r.steps.wall_nanos;
      rec.truncated = r.truncated;
      rec.output = std::move(r.output);
      rec.display_output = std::move(r.display_output);
      prev_display = rec.display_output;
      log().debug("session {} t={}: draft {}, accepted {}, output {}, forwards {}", trace.session_id, rec.t,
                  rec.draft_len, rec.accepted, rec.output.size(), rec.forwards);
      if (rec.truncated) {
        log().warn("session {} t={}: output stopped at the {}-token cap", trace.session_id, rec.t,
                   config.token_limit(state.input.size()));
      }
      trace.records.push_back(std::move(rec));
    } catch (const Error& e) {
      throw Error(e.code(), "session " + trace.session_id + ", update t=" + std::to_string(u.t) +
                                ": " + e.what());
    }
  }
  trace.final_output = trace.records.back().output;
  return trace;
}

std::vector<SessionTrace> run_sessions(const ModelBundle& bundle,
                                       const std::vector<StreamSession>& sessions,
                                       const DecodeConfig& config, Paradigm paradigm,
                                       std::size_t jobs) {
  std::vector<std::optional<SessionTrace>> slots(sessions.size());
  std::vector<std::exception_ptr> errors(sessions.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < sessions.size(); i = next++) {
      try {
        slots[i] = run_session(bundle, sessions[i], config, paradigm);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n_workers = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(sessions.size(), 1));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<SessionTrace> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  std::stable_sort(out.begin(), out.end(),
                   [](const SessionTrace& a, const SessionTrace& b) { return a.session_id < b.session_id; });
  return out;
}

}  // namespace ssbd
