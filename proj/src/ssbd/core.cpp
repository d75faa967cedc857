// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ssbd Authors

#include "ssbd/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "ssbd/error.hpp"

namespace ssbd {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kConfig: return "configuration error";
    case ErrorCode::kInvalidToken: return "invalid token";
    case ErrorCode::kMalformedLogits: return "malformed logits";
    case ErrorCode::kMalformedDistribution: return "malformed distribution";
    case ErrorCode::kTransport: return "transport error";
    case ErrorCode::kProtocol: return "protocol error";
    case ErrorCode::kFile: return "file error";
    case ErrorCode::kParse: return "parse error";
    case ErrorCode::kValidation: return "validation error";
    case ErrorCode::kPrecondition: return "precondition violated";
    case ErrorCode::kLogic: return "logic error";
    case ErrorCode::kUndefinedMetric: return "undefined metric";
  }
  return "unknown error";
}

Vocab::Vocab(std::size_t size, TokenId eos_id) : size_(size), eos_id_(eos_id) {
  if (size_ == 0) throw Error(ErrorCode::kConfig, "vocab size must be positive");
  if (eos_id_ >= size_) {
    throw Error(ErrorCode::kConfig, "eos_id " + std::to_string(eos_id_) +
                                        " outside vocab of size " + std::to_string(size_));
  }
}

Vocab::Vocab(std::vector<std::string> tokens, TokenId eos_id)
    : Vocab(tokens.size(), eos_id) {
  tokens_ = std::move(tokens);
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    auto [it, inserted] = index_.emplace(tokens_[i], static_cast<TokenId>(i));
    if (!inserted) throw Error(ErrorCode::kConfig, "duplicate vocab entry '" + tokens_[i] + "'");
  }
}

void Vocab::check(TokenSpan seq) const {
  for (TokenId id : seq) {
    if (id >= size_) {
      throw Error(ErrorCode::kInvalidToken, "token id " + std::to_string(id) +
                                                " outside vocab of size " + std::to_string(size_));
    }
  }
}

std::optional<TokenId> Vocab::find(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

namespace {

// "#<digits>" names a token id directly; this is how decode() renders ids
// without a surface string.
std::optional<TokenId> parse_id_word(const std::string& word) {
  if (word.size() < 2 || word[0] != '#' || word.size() > 11) return std::nullopt;
  std::uint64_t value = 0;
  for (std::size_t i = 1; i < word.size(); ++i) {
    if (word[i] < '0' || word[i] > '9') return std::nullopt;
    value = value * 10 + static_cast<std::uint64_t>(word[i] - '0');
  }
  if (value > std::numeric_limits<TokenId>::max()) return std::nullopt;
  return static_cast<TokenId>(value);
}

}  // namespace

TokenSeq Vocab::encode(std::string_view text) const {
  TokenSeq out;
  std::istringstream in{std::string(text)};
  std::string word;
  while (in >> word) {
    auto id = find(word);
    if (!id) id = parse_id_word(word);
    if (!id || *id >= size_) throw Error(ErrorCode::kInvalidToken, "word '" + word + "' not in vocab");
    out.push_back(*id);
  }
  return out;
}

std::string Vocab::decode(TokenSpan seq) const {
  std::string out;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (i) out += ' ';
    if (has_strings() && seq[i] < tokens_.size()) {
      out += tokens_[seq[i]];
    } else {
      out += '#';
      out += std::to_string(seq[i]);
    }
  }
  return out;
}

ProbDist::ProbDist(std::vector<double> probs) {
  if (probs.empty()) throw Error(ErrorCode::kMalformedDistribution, "empty distribution");
  double sum = 0.0;
  for (double p : probs) {
    if (!std::isfinite(p) || p < 0.0) {
      throw Error(ErrorCode::kMalformedDistribution, "distribution has a negative or non-finite entry");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kNormTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "distribution sums to " << sum;
    throw Error(ErrorCode::kMalformedDistribution, msg.str());
  }
  if (sum != 1.0) {
    for (double& p : probs) p /= sum;
  }
  probs_ = std::move(probs);
}

ProbDist ProbDist::uniform(std::size_t size) {
  return ProbDist(std::vector<double>(size, 1.0 / static_cast<double>(size)), Trusted{});
}

ProbDist ProbDist::one_hot(std::size_t size, TokenId id) {
  if (id >= size) throw Error(ErrorCode::kInvalidToken, "one-hot id outside distribution");
  std::vector<double> probs(size, 0.0);
  probs[id] = 1.0;
  return ProbDist(std::move(probs), Trusted{});
}

ProbDist ProbDist::renormalized(std::vector<double> weights) {
  double sum = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) {
      throw Error(ErrorCode::kMalformedDistribution, "weight is negative or non-finite");
    }
    sum += w;
  }
  if (!(sum > 0.0) || !std::isfinite(sum)) {
    throw Error(ErrorCode::kMalformedDistribution, "weights have no positive mass");
  }
  for (double& w : weights) w /= sum;
  return ProbDist(std::move(weights), Trusted{});
}

std::size_t lcp(TokenSpan a, TokenSpan b) noexcept {
  auto [ia, ib] = std::mismatch(a.begin(), a.end(), b.begin(), b.end());
  return static_cast<std::size_t>(ia - a.begin());
}

TokenId canonical_argmax(const ProbDist& p) noexcept {
  auto v = p.values();
  // max_element returns the first maximum, i.e. the lowest id.
  return static_cast<TokenId>(std::max_element(v.begin(), v.end()) - v.begin());
}

ProbDist logits_to_probs(std::span<const double> logits) {
  if (logits.empty()) throw Error(ErrorCode::kMalformedLogits, "empty logits");
  for (double x : logits) {
    if (!std::isfinite(x)) throw Error(ErrorCode::kMalformedLogits, "non-finite logit");
  }
  const double peak = *std::max_element(logits.begin(), logits.end());
  std::vector<double> w(logits.size());
  std::transform(logits.begin(), logits.end(), w.begin(),
                 [peak](double x) { return std::exp(x - peak); });
  return ProbDist::renormalized(std::move(w));
}

bool contains_eos(TokenSpan seq, TokenId eos_id) noexcept {
  return std::find(seq.begin(), seq.end(), eos_id) != seq.end();
}

}  // namespace ssbd
