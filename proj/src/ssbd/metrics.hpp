// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ssbd Authors

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ssbd/core.hpp"
#include "ssbd/trace.hpp"

namespace ssbd {

/// Tokens deleted from the end of `prev` to make it a prefix of `curr`.
std::size_t erasure(TokenSpan prev, TokenSpan curr) noexcept;

/// Sum of erasures over consecutive outputs (the first against an empty
/// output) divided by the final output length. kUndefinedMetric when the
/// final output is empty.
double normalized_erasure(const std::vector<TokenSeq>& outputs);

struct FlickerStats {
  std::vector<std::size_t> per_update_erasure;
  /// Absent when the final output is empty.
  std::optional<double> normalized_erasure;
};

/// Flicker as seen by the reader, i.e. over display outputs.
FlickerStats flicker_stats(const SessionTrace& trace);

struct AcceptanceStats {
  std::size_t accepted_total = 0;
  std::size_t draft_total = 0;
  std::size_t output_total = 0;
  std::optional<double> a_over_d;
  std::optional<double> a_over_o;
};

AcceptanceStats acceptance_stats(const SessionTrace& trace);
AcceptanceStats acceptance_stats(const std::vector<SessionTrace>& traces);

struct EfficiencyStats {
  std::uint64_t ar_decode_steps = 0;
  std::uint64_t ssbd_decode_steps = 0;
  std::uint64_t ar_forwards = 0;
  std::uint64_t ssbd_forwards = 0;
  std::optional<double> step_speedup;
  /// Wall-clock output tokens per second; informational only.
  std::optional<double> ar_tps;
  std::optional<double> ssbd_tps;
};

/// Both traces must cover the same session inputs (kValidation otherwise).
EfficiencyStats efficiency_stats(const SessionTrace& ar_trace, const SessionTrace& ssbd_trace);

std::uint64_t total_decode_steps(const SessionTrace& trace) noexcept;
std::optional<double> tokens_per_second(const std::vector<SessionTrace>& traces) noexcept;

/// One CSV line. Missing values print as empty fields.
struct ReportRow {
  std::string session;
  std::string beta;
  std::size_t mask_k = 0;
  std::string mask_mode;
  std::optional<double> ne;
  std::optional<double> a_over_d;
  std::optional<double> a_over_o;
  std::optional<std::uint64_t> ar_steps;
  std::optional<std::uint64_t> ssbd_steps;
  std::optional<double> step_speedup;
  std::optional<double> tps;
};

/// Rows for single-paradigm traces, one per session plus "ALL".
std::vector<ReportRow> report_rows(const std::vector<SessionTrace>& traces);

/// Rows for paired runs, one per session plus "ALL". ar[i] and ssbd[i] must
/// be the same session.
std::vector<ReportRow> report_rows(const std::vector<SessionTrace>& ar,
                                   const std::vector<SessionTrace>& ssbd);

/// Header plus rows; ratios use 4 decimals.
std::string format_report(const std::vector<ReportRow>& rows);
/// Writes the CSV to `path`; "-" means stdout.
void emit_report(const std::vector<ReportRow>& rows, const std::string& path);

}  // namespace ssbd
