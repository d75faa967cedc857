// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ssbd Authors

#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ssbd/core.hpp"
#include "ssbd/kv_cache.hpp"
#include "ssbd/model.hpp"

namespace ssbd {

enum class MaskMode { kNone, kTrimDraft, kDisplayOnly };

std::string_view to_string(MaskMode mode) noexcept;
MaskMode mask_mode_from_string(std::string_view name);

struct DecodeConfig {
  /// Weight pulling verification toward the draft token, in [0, 1].
  double beta = 0.0;
  /// Output length cap; unset means 4 * |input| + 16.
  std::optional<std::size_t> max_new_tokens;
  std::size_t mask_k = 0;
  MaskMode mask_mode = MaskMode::kNone;

  /// kConfig on beta outside [0, 1] or a zero token cap.
  void validate() const;
  std::size_t token_limit(std::size_t input_len) const noexcept;
};

struct PositionDecision {
  TokenId draft_token;
  TokenId model_argmax_unbiased;
  bool accepted;

  friend bool operator==(const PositionDecision&, const PositionDecision&) = default;
};

struct VerificationResult {
  std::size_t accepted = 0;
  /// Set on the first rejected position.
  std::optional<TokenId> corrected_token;
  std::vector<PositionDecision> decisions;
  /// Unbiased argmax just past a fully accepted draft.
  std::optional<TokenId> bonus_token;

  friend bool operator==(const VerificationResult&, const VerificationResult&) = default;
};

struct UpdateResult {
  TokenSeq output;
  TokenSeq display_output;
  std::size_t draft_len = 0;
  VerificationResult verification;
  StepCounts steps;
  /// The token cap stopped decoding before EOS.
  bool truncated = false;
};

/// Per-stream decoding state. A session is strictly sequential.
struct SessionState {
  TokenSeq input;
  TokenSeq prev_output;
  PromptTemplate prompt;
  KvCache cache;
  DecodeConfig config;
};

/// (1 - beta) * p + beta * onehot(draft_token).
ProbDist bias_distribution(const ProbDist& p, TokenId draft_token, double beta);

/// Scans the draft left to right. dists[i] predicts draft[i]; a position is
/// accepted when no token has a strictly larger biased probability than the
/// draft token. Requires |dists| >= |draft|.
VerificationResult verify_draft(std::span<const ProbDist> dists, TokenSpan draft, double beta);

/// Greedy decoding of state.input from scratch. Updates state.prev_output.
UpdateResult ar_decode(const LanguageModel& lm, SessionState& state, bool is_final = false);

/// One stream update: verify the previous output as a draft against
/// `new_input` in a single forward, keep the accepted prefix plus the
/// corrected (or bonus) token, then decode greedily until EOS.
UpdateResult ssbd_update(const LanguageModel& lm, SessionState& state, TokenSeq new_input,
                         bool is_final = false);

TokenSeq trim_draft_mask_k(TokenSpan draft, std::size_t k);

/// Output as shown to a reader: the last k tokens are hidden until the final
/// update.
TokenSeq display_view(TokenSpan output, std::size_t k, bool is_final);

}  // namespace ssbd
