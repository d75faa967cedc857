// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ssbd Authors

#pragma once

#include <string>

#include "json.hpp"

#include "ssbd/model.hpp"

namespace ssbd {

// Model documents:
//
//   {"kind": "table",
//    "vocab": {"size": V, "eos_id": e, "tokens": ["...", ...]},   tokens optional
//    "prompt": {"prefix": [ids], "separator": [ids]},             optional
//    "entries": [{"context": [ids], "probs": [V floats]}, ...],
//    "fallback": [V floats]}                                      optional, uniform
//
//   {"kind": "ngram", "vocab": {...}, "prompt": {...},
//    "order": n, "alpha": a,
//    "counts": [{"context": [ids], "next": [[id, count], ...]}, ...]}

nlohmann::json vocab_to_json(const Vocab& vocab);
Vocab vocab_from_json(const nlohmann::json& doc);

nlohmann::json model_to_json(const TableModel& model, const PromptTemplate& prompt);
nlohmann::json model_to_json(const NgramModel& model, const PromptTemplate& prompt);

/// Dispatches on "kind". Schema violations raise kParse.
ModelBundle model_from_json(const nlohmann::json& doc);

ModelBundle load_model_file(const std::string& path);
void save_json_file(const nlohmann::json& doc, const std::string& path);

}  // namespace ssbd
