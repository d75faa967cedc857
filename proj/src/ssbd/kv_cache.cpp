// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ssbd Authors

#include "ssbd/kv_cache.hpp"

#include <algorithm>
#include <chrono>

#include "ssbd/error.hpp"

namespace ssbd {

std::size_t CacheLedger::reuse_prefix(TokenSpan prev_prompt, TokenSpan new_prompt) noexcept {
  validated_len = std::min(lcp(prev_prompt, new_prompt), validated_len);
  return validated_len;
}

void CacheLedger::truncate(std::size_t keep_len) {
  if (keep_len > validated_len) {
    throw Error(ErrorCode::kLogic, "cache truncate to " + std::to_string(keep_len) +
                                       " exceeds validated length " +
                                       std::to_string(validated_len));
  }
  validated_len = keep_len;
}

void CacheLedger::charge_forward(std::size_t positions, std::uint64_t nanos) noexcept {
  ++forwards;
  if (positions > 0) {
    ++decode_steps;
    prefill_positions += positions - 1;
  }
  wall_nanos += nanos;
}

StepCounts StepCounts::between(const CacheLedger& before, const CacheLedger& after) noexcept {
  return StepCounts{after.forwards - before.forwards,
                    after.prefill_positions - before.prefill_positions,
                    after.decode_steps - before.decode_steps,
                    after.wall_nanos - before.wall_nanos};
}

std::vector<ProbDist> KvCache::forward(const LanguageModel& lm, const TokenSeq& prompt,
                                       std::size_t need_from) {
  if (need_from >= prompt.size()) {
    throw Error(ErrorCode::kLogic, "forward requested no positions");
  }
  const std::size_t reusable = ledger_.reuse_prefix(tokens_, prompt);
  // Cached positions keep no distributions, so a needed position inside the
  // reusable prefix is recomputed.
  const std::size_t start = std::min(reusable, need_from);

  const auto t0 = std::chrono::steady_clock::now();
  auto dists = lm.forward(prompt, start);
  const auto t1 = std::chrono::steady_clock::now();

  if (dists.size() != prompt.size() - start) {
    throw Error(ErrorCode::kProtocol, "model returned " + std::to_string(dists.size()) +
                                          " distributions, expected " +
                                          std::to_string(prompt.size() - start));
  }
  ledger_.charge_forward(dists.size(), static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count()));
  tokens_ = prompt;
  ledger_.validated_len = prompt.size();
  dists.erase(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(need_from - start));
  return dists;
}

void KvCache::truncate(std::size_t keep_len) {
  ledger_.truncate(keep_len);
  tokens_.resize(keep_len);
}

}  // namespace ssbd
