// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ssbd Authors

#include "ssbd/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ssbd/error.hpp"

namespace ssbd {

std::string_view to_string(MaskMode mode) noexcept {
  switch (mode) {
    case MaskMode::kNone: return "none";
    case MaskMode::kTrimDraft: return "trim_draft";
    case MaskMode::kDisplayOnly: return "display_only";
  }
  return "none";
}

MaskMode mask_mode_from_string(std::string_view name) {
  if (name == "none") return MaskMode::kNone;
  if (name == "trim_draft") return MaskMode::kTrimDraft;
  if (name == "display_only") return MaskMode::kDisplayOnly;
  throw Error(ErrorCode::kConfig, "unknown mask mode '" + std::string(name) + "'");
}

void DecodeConfig::validate() const {
  if (!(beta >= 0.0 && beta <= 1.0)) {
    throw Error(ErrorCode::kConfig, "beta " + std::to_string(beta) + " outside [0, 1]");
  }
  if (max_new_tokens && *max_new_tokens == 0) {
    throw Error(ErrorCode::kConfig, "max_new_tokens must be at least 1");
  }
}

std::size_t DecodeConfig::token_limit(std::size_t input_len) const noexcept {
  return max_new_tokens.value_or(4 * input_len + 16);
}

ProbDist bias_distribution(const ProbDist& p, TokenId draft_token, double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) {
    throw Error(ErrorCode::kConfig, "beta " + std::to_string(beta) + " outside [0, 1]");
  }
  if (draft_token >= p.size()) throw Error(ErrorCode::kInvalidToken, "draft token outside distribution");
  std::vector<double> out(p.values().begin(), p.values().end());
  for (double& x : out) x *= 1.0 - beta;
  out[draft_token] += beta;
  return ProbDist(std::move(out));
}

VerificationResult verify_draft(std::span<const ProbDist> dists, TokenSpan draft, double beta) {
  if (dists.size() < draft.size()) {
    throw Error(ErrorCode::kPrecondition, "fewer distributions than draft tokens");
  }
  VerificationResult result;
  for (std::size_t i = 0; i < draft.size(); ++i) {
    const ProbDist biased = bias_distribution(dists[i], draft[i], beta);
    const auto v = biased.values();
    const double best = *std::max_element(v.begin(), v.end());
    // Ties go to the draft token.
    const bool accepted = biased[draft[i]] >= best;
    result.decisions.push_back({draft[i], canonical_argmax(dists[i]), accepted});
    if (!accepted) {
      result.corrected_token = canonical_argmax(biased);
      return result;
    }
    ++result.accepted;
  }
  if (dists.size() > draft.size()) result.bonus_token = canonical_argmax(dists[draft.size()]);
  return result;
}

namespace {

void check_input(const LanguageModel& lm, const SessionState& state, TokenSpan input) {
  if (input.empty()) throw Error(ErrorCode::kPrecondition, "input must be non-empty");
  state.config.validate();
  lm.vocab().check(input);
}

TokenSeq make_display(const DecodeConfig& config, const TokenSeq& output, bool is_final) {
  if (config.mask_mode == MaskMode::kNone) return output;
  return display_view(output, config.mask_k, is_final);
}

/// Greedy continuation of `output` one forward per token until EOS or the
/// cap. Returns true when the cap stopped decoding.
bool decode_greedy(const LanguageModel& lm, SessionState& state, const TokenSeq& prompt,
                   TokenSeq& output, std::size_t limit) {
  const TokenId eos = lm.vocab().eos_id();
  TokenSeq seq = prompt;
  seq.insert(seq.end(), output.begin(), output.end());
  while (output.size() < limit) {
    auto dist = state.cache.forward(lm, seq, seq.size() - 1);
    const TokenId next = canonical_argmax(dist.front());
    if (next == eos) return false;
    output.push_back(next);
    seq.push_back(next);
  }
  return true;
}

}  // namespace

UpdateResult ar_decode(const LanguageModel& lm, SessionState& state, bool is_final) {
  check_input(lm, state, state.input);
  const CacheLedger before = state.cache.ledger();
  const TokenId eos = lm.vocab().eos_id();
  const std::size_t limit = state.config.token_limit(state.input.size());

  const TokenSeq prompt = state.prompt.apply(state.input);
  UpdateResult result;
  TokenId next = canonical_argmax(state.cache.forward(lm, prompt, prompt.size() - 1).back());
  if (next != eos) {
    result.output.push_back(next);
    result.truncated = decode_greedy(lm, state, prompt, result.output, limit);
  }

  result.display_output = make_display(state.config, result.output, is_final);
  result.steps = StepCounts::between(before, state.cache.ledger());
  state.prev_output = result.output;
  return result;
}

UpdateResult ssbd_update(const LanguageModel& lm, SessionState& state, TokenSeq new_input,
                         bool is_final) {
  check_input(lm, state, new_input);
  const CacheLedger before = state.cache.ledger();
  const TokenId eos = lm.vocab().eos_id();
  const DecodeConfig& config = state.config;
  const std::size_t limit = config.token_limit(new_input.size());

  TokenSeq draft = config.mask_mode == MaskMode::kTrimDraft
                       ? trim_draft_mask_k(state.prev_output, config.mask_k)
                       : state.prev_output;
  if (contains_eos(draft, eos)) throw Error(ErrorCode::kLogic, "draft contains EOS");

  const TokenSeq base_prompt = state.prompt.apply(new_input);
  const std::size_t base = base_prompt.size();
  TokenSeq prompt = base_prompt;
  prompt.insert(prompt.end(), draft.begin(), draft.end());

  // One batched forward yields |draft| + 1 rows starting at the last prompt
  // position: one per draft token plus the position after the draft.
  const auto dists = state.cache.forward(lm, prompt, base - 1);

  UpdateResult result;
  result.draft_len = draft.size();
  result.verification = verify_draft(dists, draft, config.beta);
  const VerificationResult& ver = result.verification;

  const std::size_t kept = std::min(ver.accepted, limit);
  result.output.assign(draft.begin(), draft.begin() + static_cast<std::ptrdiff_t>(kept));
  // Cache entries past the last accepted draft token were computed for
  // rejected or discarded tokens.
  state.cache.truncate(base + kept);

  const TokenId next = ver.corrected_token ? *ver.corrected_token : *ver.bonus_token;
  if (kept == limit) {
    result.truncated = true;
  } else if (next != eos) {
    result.output.push_back(next);
    result.truncated = decode_greedy(lm, state, base_prompt, result.output, limit);
  }

  result.display_output = make_display(config, result.output, is_final);
  result.steps = StepCounts::between(before, state.cache.ledger());
  state.input = std::move(new_input);
  state.prev_output = result.output;
  return result;
}

TokenSeq trim_draft_mask_k(TokenSpan draft, std::size_t k) {
  const std::size_t keep = draft.size() - std::min(k, draft.size());
  return TokenSeq(draft.begin(), draft.begin() + static_cast<std::ptrdiff_t>(keep));
}

TokenSeq display_view(TokenSpan output, std::size_t k, bool is_final) {
  if (is_final) return TokenSeq(output.begin(), output.end());
  return trim_draft_mask_k(output, k);
}

}  // namespace ssbd
