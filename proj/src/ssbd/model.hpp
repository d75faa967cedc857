// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ssbd Authors

#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <vector>

#include "ssbd/core.hpp"

namespace ssbd {

/// Next-token model over a token prefix.
///
/// forward(prompt, from) returns one distribution per position j in
/// [from, |prompt|); the distribution at j conditions on prompt[0..j] and
/// predicts the token at j + 1. Implementations are immutable after
/// construction, deterministic, and safe for concurrent calls.
class LanguageModel {
 public:
  virtual ~LanguageModel() = default;

  virtual const Vocab& vocab() const = 0;
  virtual std::vector<ProbDist> forward(TokenSpan prompt, std::size_t from_position) const = 0;
};

/// Exact-match context table with a fallback for unseen contexts.
class TableModel final : public LanguageModel {
 public:
  using Entries = std::map<TokenSeq, ProbDist>;

  /// A missing fallback means uniform.
  TableModel(Vocab vocab, Entries entries, std::optional<ProbDist> fallback = std::nullopt);

  const Vocab& vocab() const override { return vocab_; }
  std::vector<ProbDist> forward(TokenSpan prompt, std::size_t from_position) const override;

  const Entries& entries() const noexcept { return entries_; }
  const ProbDist& fallback() const noexcept { return fallback_; }

 private:
  Vocab vocab_;
  Entries entries_;
  ProbDist fallback_;
};

/// Add-alpha smoothed n-gram model with backoff to shorter contexts.
///
/// A context is predicted from its last (order - 1) tokens. When that context
/// was never observed the model backs off one token at a time, ending at the
/// unigram distribution which is always populated.
class NgramModel final : public LanguageModel {
 public:
  using Counts = std::map<TokenSeq, std::map<TokenId, std::uint64_t>>;

  NgramModel(Vocab vocab, std::size_t order, double alpha, Counts counts);

  static NgramModel train(Vocab vocab, const std::vector<TokenSeq>& corpus, std::size_t order,
                          double alpha);

  const Vocab& vocab() const override { return vocab_; }
  std::vector<ProbDist> forward(TokenSpan prompt, std::size_t from_position) const override;

  ProbDist predict(TokenSpan context) const;

  std::size_t order() const noexcept { return order_; }
  double alpha() const noexcept { return alpha_; }
  const Counts& counts() const noexcept { return counts_; }

 private:
  Vocab vocab_;
  std::size_t order_;
  double alpha_;
  Counts counts_;
  std::map<TokenSeq, std::uint64_t> totals_;
};

/// Builds the model prompt from the current input. The draft, when present,
/// is appended after the separator.
struct PromptTemplate {
  TokenSeq prefix;
  TokenSeq separator;

  TokenSeq apply(TokenSpan input) const;
  std::size_t length_for(std::size_t input_len) const noexcept {
    return prefix.size() + input_len + separator.size();
  }

  friend bool operator==(const PromptTemplate&, const PromptTemplate&) = default;
};

/// A model plus the prompt assembly rule it was built for.
struct ModelBundle {
  std::shared_ptr<const LanguageModel> model;
  PromptTemplate prompt;
};

}  // namespace ssbd
