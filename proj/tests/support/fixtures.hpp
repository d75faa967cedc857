// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ssbd Authors

// Test-only fixtures and reference oracles. Nothing here calls into the
// decoder; the oracles re-derive expected values from first principles.

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "ssbd/core.hpp"
#include "ssbd/model.hpp"
#include "ssbd/stream.hpp"

namespace ssbd::testing {

inline constexpr TokenId kEos = 0;
inline constexpr TokenId kBos = 1;
inline constexpr TokenId kSep = 2;
inline constexpr TokenId kFirstWord = 3;

/// "<eos>", "<s>", "<sep>", then "w3", "w4", ...
inline Vocab toy_vocab(std::size_t size) {
  std::vector<std::string> words{"<eos>", "<s>", "<sep>"};
  for (std::size_t i = kFirstWord; i < size; ++i) words.push_back("w" + std::to_string(i));
  return Vocab(std::move(words), kEos);
}

inline PromptTemplate toy_prompt() { return PromptTemplate{{kBos}, {kSep}}; }

// ---- oracles ---------------------------------------------------------------

/// Largest l with a[0..l) == b[0..l), by trying every candidate length.
inline std::size_t oracle_lcp(const TokenSeq& a, const TokenSeq& b) {
  for (std::size_t l = std::min(a.size(), b.size());; --l) {
    if (std::equal(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(l), b.begin())) return l;
    if (l == 0) return 0;
  }
}

/// Deletes trailing tokens of prev until it is a prefix of curr.
inline std::size_t oracle_erasure(TokenSeq prev, const TokenSeq& curr) {
  std::size_t deletions = 0;
  auto is_prefix = [&] {
    return prev.size() <= curr.size() && std::equal(prev.begin(), prev.end(), curr.begin());
  };
  while (!is_prefix()) {
    prev.pop_back();
    ++deletions;
  }
  return deletions;
}

/// Lowest index of the maximum, by explicit scan.
inline TokenId oracle_argmax(std::span<const double> p) {
  TokenId best = 0;
  for (TokenId i = 1; i < p.size(); ++i) {
    if (p[i] > p[best]) best = i;
  }
  return best;
}

/// Greedy walk over a context table by direct lookup: returns the EOS-free
/// output and the number of model evaluations a cache-less greedy decoder
/// needs (one per emitted token plus one for EOS).
struct Walk {
  TokenSeq output;
  std::size_t evaluations = 0;
};

inline Walk oracle_greedy_walk(const TableModel::Entries& table, const ProbDist& fallback,
                               TokenSeq context, std::size_t limit) {
  Walk w;
  while (w.output.size() < limit) {
    auto it = table.find(context);
    const ProbDist& p = it == table.end() ? fallback : it->second;
    ++w.evaluations;
    const TokenId next = oracle_argmax(p.values());
    if (next == kEos) break;
    w.output.push_back(next);
    context.push_back(next);
  }
  return w;
}

// ---- scripted table models -------------------------------------------------

/// A distribution over `size` ids whose unique argmax is `target`. With
/// `peaked` false the result is one-hot.
inline ProbDist peaked_dist(std::size_t size, TokenId target, std::mt19937& rng, bool peaked = true,
                            double margin = 0.05) {
  if (!peaked) return ProbDist::one_hot(size, target);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> w(size);
  for (auto& x : w) x = u(rng);
  w[target] = *std::max_element(w.begin(), w.end()) + margin + u(rng);
  return ProbDist::renormalized(std::move(w));
}

/// Stream whose greedy output at update t is exactly outputs[t].
struct ScriptedStream {
  std::shared_ptr<TableModel> model;
  PromptTemplate prompt;
  std::vector<TokenSeq> inputs;
  std::vector<TokenSeq> outputs;

  ModelBundle bundle() const { return {model, prompt}; }

  StreamSession session(const std::string& id = "s1") const {
    StreamSession s;
    for (std::size_t t = 0; t < inputs.size(); ++t) {
      s.push_back({id, t + 1, model->vocab().decode(inputs[t])});
    }
    return s;
  }
};

/// Table entries for every greedy context of every update. Extra entries
/// (e.g. for contexts reached only through an accepted draft) may be passed
/// in and are overridden by the scripted ones.
inline ScriptedStream make_scripted(std::size_t vocab_size, std::vector<TokenSeq> inputs,
                                    std::vector<TokenSeq> outputs, std::mt19937& rng,
                                    bool peaked = true, TableModel::Entries extra = {}) {
  ScriptedStream s;
  s.prompt = toy_prompt();
  TableModel::Entries entries = std::move(extra);
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    TokenSeq context = s.prompt.apply(inputs[t]);
    const auto& out = outputs[t];
    for (std::size_t i = 0; i <= out.size(); ++i) {
      const TokenId target = i < out.size() ? out[i] : kEos;
      entries.insert_or_assign(context, peaked_dist(vocab_size, target, rng, peaked));
      if (i < out.size()) context.push_back(out[i]);
    }
  }
  s.model = std::make_shared<TableModel>(toy_vocab(vocab_size), std::move(entries));
  s.inputs = std::move(inputs);
  s.outputs = std::move(outputs);
  return s;
}

/// Random growing inputs and outputs that keep a random prefix of the
/// previous output and append a random tail.
inline ScriptedStream random_scripted(std::mt19937& rng, std::size_t vocab_size, std::size_t updates,
                                      bool peaked = true) {
  std::uniform_int_distribution<TokenId> word(kFirstWord, static_cast<TokenId>(vocab_size - 1));
  std::uniform_int_distribution<std::size_t> grow(1, 3);
  std::uniform_int_distribution<std::size_t> tail(0, 4);
  std::vector<TokenSeq> inputs;
  std::vector<TokenSeq> outputs;
  TokenSeq in;
  TokenSeq out;
  for (std::size_t t = 0; t < updates; ++t) {
    for (std::size_t i = grow(rng); i > 0; --i) in.push_back(word(rng));
    if (!out.empty()) {
      std::uniform_int_distribution<std::size_t> keep(0, out.size());
      // Bias toward long stable prefixes.
      out.resize(std::max(keep(rng), keep(rng)));
    }
    for (std::size_t i = tail(rng) + (t == 0 ? 1 : 0); i > 0; --i) out.push_back(word(rng));
    inputs.push_back(in);
    outputs.push_back(out);
  }
  return make_scripted(vocab_size, std::move(inputs), std::move(outputs), rng, peaked);
}

inline TokenSeq random_seq(std::mt19937& rng, std::size_t max_len, TokenId alphabet) {
  std::uniform_int_distribution<std::size_t> len(0, max_len);
  std::uniform_int_distribution<TokenId> tok(0, alphabet - 1);
  TokenSeq s(len(rng));
  for (auto& x : s) x = tok(rng);
  return s;
}

inline ProbDist random_dist(std::mt19937& rng, std::size_t size) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> w(size);
  for (auto& x : w) x = u(rng);
  return ProbDist::renormalized(std::move(w));
}

}  // namespace ssbd::testing
