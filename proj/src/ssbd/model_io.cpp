// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ssbd Authors

#include "ssbd/model_io.hpp"

#include <fstream>

#include "ssbd/error.hpp"

namespace ssbd {

using nlohmann::json;

namespace {

json prompt_to_json(const PromptTemplate& prompt) {
  return json{{"prefix", prompt.prefix}, {"separator", prompt.separator}};
}

PromptTemplate prompt_from_json(const json& doc, const Vocab& vocab) {
  PromptTemplate prompt;
  if (doc.contains("prompt")) {
    const auto& p = doc.at("prompt");
    if (p.contains("prefix")) prompt.prefix = p.at("prefix").get<TokenSeq>();
    if (p.contains("separator")) prompt.separator = p.at("separator").get<TokenSeq>();
  }
  vocab.check(prompt.prefix);
  vocab.check(prompt.separator);
  return prompt;
}

ModelBundle table_from_json(const json& doc) {
  Vocab vocab = vocab_from_json(doc.at("vocab"));
  TableModel::Entries entries;
  for (const auto& e : doc.at("entries")) {
    auto context = e.at("context").get<TokenSeq>();
    auto [it, inserted] =
        entries.emplace(std::move(context), ProbDist(e.at("probs").get<std::vector<double>>()));
    if (!inserted) throw Error(ErrorCode::kParse, "duplicate table context");
  }
  std::optional<ProbDist> fallback;
  if (doc.contains("fallback")) fallback = ProbDist(doc.at("fallback").get<std::vector<double>>());
  PromptTemplate prompt = prompt_from_json(doc, vocab);
  return {std::make_shared<TableModel>(std::move(vocab), std::move(entries), std::move(fallback)),
          std::move(prompt)};
}

ModelBundle ngram_from_json(const json& doc) {
  Vocab vocab = vocab_from_json(doc.at("vocab"));
  NgramModel::Counts counts;
  for (const auto& c : doc.at("counts")) {
    auto& next = counts[c.at("context").get<TokenSeq>()];
    for (const auto& pair : c.at("next")) {
      next[pair.at(0).get<TokenId>()] += pair.at(1).get<std::uint64_t>();
    }
  }
  PromptTemplate prompt = prompt_from_json(doc, vocab);
  return {std::make_shared<NgramModel>(std::move(vocab), doc.at("order").get<std::size_t>(),
                                       doc.at("alpha").get<double>(), std::move(counts)),
          std::move(prompt)};
}

}  // namespace

json vocab_to_json(const Vocab& vocab) {
  json out{{"size", vocab.size()}, {"eos_id", vocab.eos_id()}};
  if (vocab.has_strings()) out["tokens"] = vocab.strings();
  return out;
}

Vocab vocab_from_json(const json& doc) {
  const auto size = doc.at("size").get<std::size_t>();
  const auto eos = doc.at("eos_id").get<TokenId>();
  if (doc.contains("tokens")) {
    auto tokens = doc.at("tokens").get<std::vector<std::string>>();
    if (tokens.size() != size) {
      throw Error(ErrorCode::kConfig, "vocab string table has " + std::to_string(tokens.size()) +
                                          " entries, size is " + std::to_string(size));
    }
    return Vocab(std::move(tokens), eos);
  }
  return Vocab(size, eos);
}

json model_to_json(const TableModel& model, const PromptTemplate& prompt) {
  json entries = json::array();
  for (const auto& [context, dist] : model.entries()) {
    entries.push_back({{"context", context},
                       {"probs", std::vector<double>(dist.values().begin(), dist.values().end())}});
  }
  const auto fb = model.fallback().values();
  return json{{"kind", "table"},
              {"vocab", vocab_to_json(model.vocab())},
              {"prompt", prompt_to_json(prompt)},
              {"entries", std::move(entries)},
              {"fallback", std::vector<double>(fb.begin(), fb.end())}};
}

json model_to_json(const NgramModel& model, const PromptTemplate& prompt) {
  json counts = json::array();
  for (const auto& [context, next] : model.counts()) {
    json pairs = json::array();
    for (const auto& [id, n] : next) pairs.push_back({id, n});
    counts.push_back({{"context", context}, {"next", std::move(pairs)}});
  }
  return json{{"kind", "ngram"},
              {"vocab", vocab_to_json(model.vocab())},
              {"prompt", prompt_to_json(prompt)},
              {"order", model.order()},
              {"alpha", model.alpha()},
              {"counts", std::move(counts)}};
}

ModelBundle model_from_json(const json& doc) {
  try {
    const auto kind = doc.at("kind").get<std::string>();
    if (kind == "table") return table_from_json(doc);
    if (kind == "ngram") return ngram_from_json(doc);
    throw Error(ErrorCode::kParse, "unknown model kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("model document: ") + e.what());
  }
}

ModelBundle load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFile, "cannot open model file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, "model file '" + path + "': " + e.what());
  }
  return model_from_json(doc);
}

void save_json_file(const json& doc, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kFile, "cannot write '" + path + "'");
  out << doc.dump(1) << '\n';
  if (!out) throw Error(ErrorCode::kFile, "write failed for '" + path + "'");
}

}  // namespace ssbd
