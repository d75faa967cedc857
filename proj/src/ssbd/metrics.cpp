// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ssbd Authors

#include "ssbd/metrics.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>

#include "ssbd/error.hpp"

namespace ssbd {

std::size_t erasure(TokenSpan prev, TokenSpan curr) noexcept {
  return prev.size() - lcp(prev, curr);
}

double normalized_erasure(const std::vector<TokenSeq>& outputs) {
  if (outputs.empty()) throw Error(ErrorCode::kPrecondition, "no outputs");
  if (outputs.back().empty()) throw Error(ErrorCode::kUndefinedMetric, "final output is empty");
  std::size_t total = 0;
  TokenSpan prev;
  for (const auto& out : outputs) {
    total += erasure(prev, out);
    prev = out;
  }
  return static_cast<double>(total) / static_cast<double>(outputs.back().size());
}

FlickerStats flicker_stats(const SessionTrace& trace) {
  FlickerStats stats;
  std::vector<TokenSeq> shown;
  TokenSpan prev;
  for (const auto& r : trace.records) {
    stats.per_update_erasure.push_back(erasure(prev, r.display_output));
    prev = r.display_output;
    shown.push_back(r.display_output);
  }
  if (!shown.empty() && !shown.back().empty()) stats.normalized_erasure = normalized_erasure(shown);
  return stats;
}

namespace {

void finish(AcceptanceStats& s) {
  if (s.draft_total > 0) {
    s.a_over_d = static_cast<double>(s.accepted_total) / static_cast<double>(s.draft_total);
  }
  if (s.output_total > 0) {
    s.a_over_o = static_cast<double>(s.accepted_total) / static_cast<double>(s.output_total);
  }
}

void accumulate(AcceptanceStats& s, const SessionTrace& trace) {
  for (const auto& r : trace.records) {
    s.accepted_total += r.accepted;
    s.draft_total += r.draft_len;
    s.output_total += r.output.size();
  }
}

std::uint64_t total_nanos(const SessionTrace& trace) {
  std::uint64_t n = 0;
  for (const auto& r : trace.records) n += r.wall_nanos;
  return n;
}

std::size_t total_output(const SessionTrace& trace) {
  std::size_t n = 0;
  for (const auto& r : trace.records) n += r.output.size();
  return n;
}

std::uint64_t total_forwards(const SessionTrace& trace) {
  std::uint64_t n = 0;
  for (const auto& r : trace.records) n += r.forwards;
  return n;
}

std::optional<double> ratio(std::uint64_t num, std::uint64_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

std::string beta_label(const SessionTrace& t) {
  if (t.paradigm == Paradigm::kAr) return "ar";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", t.config.beta);
  return buf;
}

ReportRow base_row(const std::string& session, const SessionTrace& t) {
  ReportRow row;
  row.session = session;
  row.beta = beta_label(t);
  row.mask_k = t.config.mask_k;
  row.mask_mode = std::string(to_string(t.config.mask_mode));
  return row;
}

std::optional<double> mean_ne(const std::vector<SessionTrace>& traces) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& t : traces) {
    if (auto ne = flicker_stats(t).normalized_erasure) {
      sum += *ne;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

}  // namespace

AcceptanceStats acceptance_stats(const SessionTrace& trace) {
  AcceptanceStats s;
  accumulate(s, trace);
  finish(s);
  return s;
}

AcceptanceStats acceptance_stats(const std::vector<SessionTrace>& traces) {
  AcceptanceStats s;
  for (const auto& t : traces) accumulate(s, t);
  finish(s);
  return s;
}

std::uint64_t total_decode_steps(const SessionTrace& trace) noexcept {
  std::uint64_t n = 0;
  for (const auto& r : trace.records) n += r.decode_steps;
  return n;
}

std::optional<double> tokens_per_second(const std::vector<SessionTrace>& traces) noexcept {
  std::uint64_t nanos = 0;
  std::size_t tokens = 0;
  for (const auto& t : traces) {
    nanos += total_nanos(t);
    tokens += total_output(t);
  }
  if (nanos == 0) return std::nullopt;
  return static_cast<double>(tokens) * 1e9 / static_cast<double>(nanos);
}

EfficiencyStats efficiency_stats(const SessionTrace& ar_trace, const SessionTrace& ssbd_trace) {
  if (ar_trace.session_id != ssbd_trace.session_id ||
      ar_trace.records.size() != ssbd_trace.records.size()) {
    throw Error(ErrorCode::kValidation, "traces cover different sessions");
  }
  for (std::size_t i = 0; i < ar_trace.records.size(); ++i) {
    if (ar_trace.records[i].t != ssbd_trace.records[i].t ||
        ar_trace.records[i].input != ssbd_trace.records[i].input) {
      throw Error(ErrorCode::kValidation, "traces differ in inputs at update " + std::to_string(i + 1));
    }
  }
  EfficiencyStats s;
  s.ar_decode_steps = total_decode_steps(ar_trace);
  s.ssbd_decode_steps = total_decode_steps(ssbd_trace);
  s.ar_forwards = total_forwards(ar_trace);
  s.ssbd_forwards = total_forwards(ssbd_trace);
  s.step_speedup = ratio(s.ar_decode_steps, s.ssbd_decode_steps);
  s.ar_tps = tokens_per_second({ar_trace});
  s.ssbd_tps = tokens_per_second({ssbd_trace});
  return s;
}

std::vector<ReportRow> report_rows(const std::vector<SessionTrace>& traces) {
  std::vector<ReportRow> rows;
  if (traces.empty()) return rows;
  auto fill = [](ReportRow& row, const std::vector<SessionTrace>& ts) {
    const auto acc = acceptance_stats(ts);
    row.ne = mean_ne(ts);
    row.a_over_d = acc.a_over_d;
    row.a_over_o = acc.a_over_o;
    std::uint64_t steps = 0;
    for (const auto& t : ts) steps += total_decode_steps(t);
    (ts.front().paradigm == Paradigm::kAr ? row.ar_steps : row.ssbd_steps) = steps;
    row.tps = tokens_per_second(ts);
  };
  for (const auto& t : traces) {
    ReportRow row = base_row(t.session_id, t);
    fill(row, {t});
    rows.push_back(std::move(row));
  }
  ReportRow all = base_row("ALL", traces.front());
  fill(all, traces);
  rows.push_back(std::move(all));
  return rows;
}

std::vector<ReportRow> report_rows(const std::vector<SessionTrace>& ar,
                                   const std::vector<SessionTrace>& ssbd) {
  if (ar.size() != ssbd.size()) throw Error(ErrorCode::kValidation, "paired runs differ in session count");
  std::vector<ReportRow> rows;
  if (ssbd.empty()) return rows;
  auto fill = [](ReportRow& row, const std::vector<SessionTrace>& a,
                 const std::vector<SessionTrace>& s) {
    const auto acc = acceptance_stats(s);
    row.ne = mean_ne(s);
    row.a_over_d = acc.a_over_d;
    row.a_over_o = acc.a_over_o;
    std::uint64_t ar_steps = 0;
    std::uint64_t ssbd_steps = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const auto eff = efficiency_stats(a[i], s[i]);
      ar_steps += eff.ar_decode_steps;
      ssbd_steps += eff.ssbd_decode_steps;
    }
    row.ar_steps = ar_steps;
    row.ssbd_steps = ssbd_steps;
    row.step_speedup = ratio(ar_steps, ssbd_steps);
    row.tps = tokens_per_second(s);
  };
  for (std::size_t i = 0; i < ssbd.size(); ++i) {
    ReportRow row = base_row(ssbd[i].session_id, ssbd[i]);
    fill(row, {ar[i]}, {ssbd[i]});
    rows.push_back(std::move(row));
  }
  ReportRow all = base_row("ALL", ssbd.front());
  fill(all, ar, ssbd);
  rows.push_back(std::move(all));
  return rows;
}

namespace {

std::string fmt_ratio(const std::optional<double>& v) {
  if (!v) return {};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", *v);
  return buf;
}

std::string fmt_count(const std::optional<std::uint64_t>& v) {
  return v ? std::to_string(*v) : std::string();
}

}  // namespace

std::string format_report(const std::vector<ReportRow>& rows) {
  std::string out =
      "session,beta,mask_k,mask_mode,NE,a_over_d,a_over_o,ar_steps,ssbd_steps,step_speedup,tps\n";
  for (const auto& r : rows) {
    out += r.session + ',' + r.beta + ',' + std::to_string(r.mask_k) + ',' + r.mask_mode + ',' +
           fmt_ratio(r.ne) + ',' + fmt_ratio(r.a_over_d) + ',' + fmt_ratio(r.a_over_o) + ',' +
           fmt_count(r.ar_steps) + ',' + fmt_count(r.ssbd_steps) + ',' +
           fmt_ratio(r.step_speedup) + ',' + fmt_ratio(r.tps) + '\n';
  }
  return out;
}

void emit_report(const std::vector<ReportRow>& rows, const std::string& path) {
  if (path == "-") {
    std::cout << format_report(rows) << std::flush;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kFile, "cannot write report '" + path + "'");
  out << format_report(rows);
  if (!out) throw Error(ErrorCode::kFile, "write failed for report '" + path + "'");
}

}  // namespace ssbd
