// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ssbd Authors

#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "ssbd/decoder.hpp"
#include "ssbd/model.hpp"
#include "ssbd/trace.hpp"

namespace ssbd {

struct StreamUpdate {
  std::string session_id;
  std::size_t t = 0;
  std::string input;

  friend bool operator==(const StreamUpdate&, const StreamUpdate&) = default;
};

/// Updates of one session, ordered by t.
using StreamSession = std::vector<StreamUpdate>;

std::vector<std::string> split_words(std::string_view text);

/// Reveals `words` in increments of k. Update i (1-based) carries the first
/// min(i * k, |words|) words; the last update always carries all of them.
StreamSession lag_k_updates(const std::vector<std::string>& words, std::size_t k,
                            const std::string& session_id);

/// One session per non-blank corpus line, ids "s1", "s2", ... by line order.
std::vector<StreamSession> lag_k_corpus(std::istream& corpus, std::size_t k);

/// Transcript JSONL: {"session": "s1", "t": 1, "input": "This is"} per line.
/// Sessions come back sorted by id, updates by t. Duplicate (session, t) is
/// kValidation; a bad line is kParse naming the line number.
std::vector<StreamSession> parse_transcript(std::istream& in);
std::vector<StreamSession> load_transcript(const std::string& path);
void write_transcript(std::ostream& out, const std::vector<StreamSession>& sessions);

/// Drives one session through all updates. Errors are rethrown with the
/// session id and update index in the message.
SessionTrace run_session(const ModelBundle& bundle, const StreamSession& updates,
                         const DecodeConfig& config, Paradigm paradigm);

/// Runs sessions on up to `jobs` worker threads; traces are ordered by
/// session id.
std::vector<SessionTrace> run_sessions(const ModelBundle& bundle,
                                       const std::vector<StreamSession>& sessions,
                                       const DecodeConfig& config, Paradigm paradigm,
                                       std::size_t jobs = 1);

}  // namespace ssbd
