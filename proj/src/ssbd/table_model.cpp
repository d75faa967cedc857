// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ssbd Authors

#include "ssbd/error.hpp"
#include "ssbd/model.hpp"

namespace ssbd {

namespace {

void check_from(TokenSpan prompt, std::size_t from_position) {
  if (from_position > prompt.size()) {
    throw Error(ErrorCode::kPrecondition, "from_position " + std::to_string(from_position) +
                                              " beyond prompt of length " +
                                              std::to_string(prompt.size()));
  }
}

}  // namespace

TableModel::TableModel(Vocab vocab, Entries entries, std::optional<ProbDist> fallback)
    : vocab_(std::move(vocab)),
      entries_(std::move(entries)),
      fallback_(fallback ? std::move(*fallback) : ProbDist::uniform(vocab_.size())) {
  if (fallback_.size() != vocab_.size()) {
    throw Error(ErrorCode::kConfig, "fallback distribution length differs from vocab size");
  }
  for (const auto& [context, dist] : entries_) {
    vocab_.check(context);
    if (dist.size() != vocab_.size()) {
      throw Error(ErrorCode::kConfig, "table entry distribution length differs from vocab size");
    }
  }
}

std::vector<ProbDist> TableModel::forward(TokenSpan prompt, std::size_t from_position) const {
  check_from(prompt, from_position);
  vocab_.check(prompt);
  std::vector<ProbDist> out;
  out.reserve(prompt.size() - from_position);
  TokenSeq context(prompt.begin(), prompt.begin() + static_cast<std::ptrdiff_t>(from_position));
  for (std::size_t j = from_position; j < prompt.size(); ++j) {
    context.push_back(prompt[j]);
    auto it = entries_.find(context);
    out.push_back(it == entries_.end() ? fallback_ : it->second);
  }
  return out;
}

TokenSeq PromptTemplate::apply(TokenSpan input) const {
  TokenSeq out;
  out.reserve(length_for(input.size()));
  out.insert(out.end(), prefix.begin(), prefix.end());
  out.insert(out.end(), input.begin(), input.end());
  out.insert(out.end(), separator.begin(), separator.end());
  return out;
}

}  // namespace ssbd
