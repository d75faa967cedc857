// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ssbd Authors

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ssbd {

using TokenId = std::uint32_t;
using TokenSeq = std::vector<TokenId>;
using TokenSpan = std::span<const TokenId>;

/// Absolute tolerance for the normalization check on every ProbDist.
inline constexpr double kNormTolerance = 1e-9;

/// Closed token inventory with a distinguished end-of-sequence id and an
/// optional id -> surface-string table used for word-level tokenization.
class Vocab {
 public:
  Vocab(std::size_t size, TokenId eos_id);
  Vocab(std::vector<std::string> tokens, TokenId eos_id);

  std::size_t size() const noexcept { return size_; }
  TokenId eos_id() const noexcept { return eos_id_; }
  bool has_strings() const noexcept { return !tokens_.empty(); }
  const std::vector<std::string>& strings() const noexcept { return tokens_; }

  bool contains(TokenId id) const noexcept { return id < size_; }

  /// Throws kInvalidToken when any id is outside [0, size).
  void check(TokenSpan seq) const;

  std::optional<TokenId> find(std::string_view word) const;

  /// Whitespace split followed by exact word lookup; "#<id>" is accepted for
  /// any in-range id. Unknown words raise kInvalidToken naming the word.
  TokenSeq encode(std::string_view text) const;

  /// Plain space join. Ids without a surface string render as "#<id>".
  std::string decode(TokenSpan seq) const;

  friend bool operator==(const Vocab& a, const Vocab& b) {
    return a.size_ == b.size_ && a.eos_id_ == b.eos_id_ && a.tokens_ == b.tokens_;
  }

 private:
  std::size_t size_;
  TokenId eos_id_;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

/// Normalized next-token distribution. Construction validates non-negativity
/// and a unit sum within kNormTolerance, then divides by the sum so that every
/// component is at most 1.
class ProbDist {
 public:
  explicit ProbDist(std::vector<double> probs);

  static ProbDist uniform(std::size_t size);
  static ProbDist one_hot(std::size_t size, TokenId id);

  /// Divides by the sum without the unit-sum check. Requires a positive,
  /// finite sum.
  static ProbDist renormalized(std::vector<double> weights);

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](TokenId id) const { return probs_[id]; }
  std::span<const double> values() const noexcept { return probs_; }

  friend bool operator==(const ProbDist&, const ProbDist&) = default;

 private:
  struct Trusted {};
  ProbDist(std::vector<double> probs, Trusted) : probs_(std::move(probs)) {}

  std::vector<double> probs_;
};

/// Length of the longest common prefix.
std::size_t lcp(TokenSpan a, TokenSpan b) noexcept;

/// Lowest id among the maxima.
TokenId canonical_argmax(const ProbDist& p) noexcept;

/// Numerically stable softmax. Rejects non-finite input with kMalformedLogits.
ProbDist logits_to_probs(std::span<const double> logits);

/// EOS-free check for committed outputs and drafts.
bool contains_eos(TokenSpan seq, TokenId eos_id) noexcept;

}  // namespace ssbd
