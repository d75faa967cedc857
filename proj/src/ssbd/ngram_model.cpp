// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ssbd Authors

#include <algorithm>
#include <cmath>

#include "ssbd/error.hpp"
#include "ssbd/model.hpp"

namespace ssbd {

NgramModel::NgramModel(Vocab vocab, std::size_t order, double alpha, Counts counts)
    : vocab_(std::move(vocab)), order_(order), alpha_(alpha), counts_(std::move(counts)) {
  if (order_ < 1) throw Error(ErrorCode::kConfig, "n-gram order must be at least 1");
  if (!(alpha_ > 0.0) || !std::isfinite(alpha_)) {
    throw Error(ErrorCode::kConfig, "smoothing alpha must be positive and finite");
  }
  for (const auto& [context, next] : counts_) {
    if (context.size() + 1 > order_) throw Error(ErrorCode::kConfig, "n-gram context longer than order - 1");
    vocab_.check(context);
    std::uint64_t total = 0;
    for (const auto& [id, n] : next) {
      if (!vocab_.contains(id)) throw Error(ErrorCode::kInvalidToken, "n-gram count for id outside vocab");
      total += n;
    }
    if (total > 0) totals_[context] = total;
  }
}

NgramModel NgramModel::train(Vocab vocab, const std::vector<TokenSeq>& corpus, std::size_t order,
                             double alpha) {
  if (corpus.empty()) throw Error(ErrorCode::kConfig, "n-gram training corpus is empty");
  if (order < 1) throw Error(ErrorCode::kConfig, "n-gram order must be at least 1");
  Counts counts;
  std::size_t tokens = 0;
  for (const auto& seq : corpus) {
    vocab.check(seq);
    tokens += seq.size();
    for (std::size_t end = 0; end < seq.size(); ++end) {
      // Every window of length 1..order ending at `end`.
      for (std::size_t ctx_len = 0; ctx_len < order && ctx_len <= end; ++ctx_len) {
        TokenSeq context(seq.begin() + static_cast<std::ptrdiff_t>(end - ctx_len),
                         seq.begin() + static_cast<std::ptrdiff_t>(end));
        ++counts[context][seq[end]];
      }
    }
  }
  if (tokens == 0) throw Error(ErrorCode::kConfig, "n-gram training corpus has no tokens");
  return NgramModel(std::move(vocab), order, alpha, std::move(counts));
}

ProbDist NgramModel::predict(TokenSpan context) const {
  std::size_t len = std::min(context.size(), order_ - 1);
  for (;; --len) {
    TokenSeq key(context.end() - static_cast<std::ptrdiff_t>(len), context.end());
    auto total_it = totals_.find(key);
    if (total_it != totals_.end()) {
      const auto& next = counts_.at(key);
      const double denom = static_cast<double>(total_it->second) +
                           alpha_ * static_cast<double>(vocab_.size());
      std::vector<double> probs(vocab_.size(), alpha_ / denom);
      for (const auto& [id, n] : next) probs[id] = (static_cast<double>(n) + alpha_) / denom;
      return ProbDist::renormalized(std::move(probs));
    }
    if (len == 0) break;
  }
  return ProbDist::uniform(vocab_.size());
}

std::vector<ProbDist> NgramModel::forward(TokenSpan prompt, std::size_t from_position) const {
  if (from_position > prompt.size()) {
    throw Error(ErrorCode::kPrecondition, "from_position beyond prompt length");
  }
  vocab_.check(prompt);
  std::vector<ProbDist> out;
  out.reserve(prompt.size() - from_position);
  for (std::size_t j = from_position; j < prompt.size(); ++j) {
    out.push_back(predict(prompt.first(j + 1)));
  }
  return out;
}

}  // namespace ssbd
