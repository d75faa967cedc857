// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ssbd Authors

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ssbd/core.hpp"
#include "ssbd/model.hpp"

namespace ssbd {

/// Cost counters and cache validity for one session.
///
/// Every forward is one sequential pass on the critical path and is charged
/// as one decode step; all other positions it computes are charged to
/// prefill_positions. Hence prefill_positions + decode_steps always equals the
/// number of positions for which distributions were computed.
struct CacheLedger {
  std::size_t validated_len = 0;
  std::uint64_t prefill_positions = 0;
  std::uint64_t decode_steps = 0;
  std::uint64_t forwards = 0;
  std::uint64_t wall_nanos = 0;

  /// Returns min(lcp(prev, next), validated_len) and shrinks validated_len
  /// to it.
  std::size_t reuse_prefix(TokenSpan prev_prompt, TokenSpan new_prompt) noexcept;

  /// kLogic when keep_len exceeds validated_len.
  void truncate(std::size_t keep_len);

  void charge_forward(std::size_t positions, std::uint64_t nanos) noexcept;
};

/// Counter delta between two ledger snapshots.
struct StepCounts {
  std::uint64_t forwards = 0;
  std::uint64_t prefill_positions = 0;
  std::uint64_t decode_steps = 0;
  std::uint64_t wall_nanos = 0;

  static StepCounts between(const CacheLedger& before, const CacheLedger& after) noexcept;
  friend bool operator==(const StepCounts&, const StepCounts&) = default;
};

/// Simulated KV cache: remembers which token sequence the model has already
/// processed and routes forwards through the ledger so that only positions
/// past the reusable prefix are recomputed.
class KvCache {
 public:
  /// Forward over `prompt`, returning distributions for positions
  /// [need_from, |prompt|). Computation starts at
  /// min(reusable prefix, need_from).
  std::vector<ProbDist> forward(const LanguageModel& lm, const TokenSeq& prompt,
                                std::size_t need_from);

  /// Keeps the first keep_len cached positions.
  void truncate(std::size_t keep_len);

  const CacheLedger& ledger() const noexcept { return ledger_; }
  const TokenSeq& tokens() const noexcept { return tokens_; }

 private:
  TokenSeq tokens_;
  CacheLedger ledger_;
};

}  // namespace ssbd
