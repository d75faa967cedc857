// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ssbd Authors

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ssbd/core.hpp"
#include "ssbd/decoder.hpp"

namespace ssbd {

enum class Paradigm { kAr, kSsbd };

std::string_view to_string(Paradigm paradigm) noexcept;
Paradigm paradigm_from_string(std::string_view name);

struct UpdateRecord {
  std::size_t t = 0;
  std::string input;
  TokenSeq output;
  TokenSeq display_output;
  std::size_t accepted = 0;
  std::size_t draft_len = 0;
  /// Erasure between consecutive display outputs.
  std::size_t erasure = 0;
  std::uint64_t forwards = 0;
  std::uint64_t prefill_positions = 0;
  std::uint64_t decode_steps = 0;
  std::uint64_t wall_nanos = 0;
  bool truncated = false;

  friend bool operator==(const UpdateRecord&, const UpdateRecord&) = default;
};

struct SessionTrace {
  std::string session_id;
  Paradigm paradigm = Paradigm::kSsbd;
  DecodeConfig config;
  std::vector<UpdateRecord> records;
  TokenSeq final_output;
};

}  // namespace ssbd
