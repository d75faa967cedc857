// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ssbd Authors

#include "ssbd/experiment.hpp"

#include <algorithm>
#include <fstream>
#include <tuple>

#include "json.hpp"
#include "ssbd/error.hpp"

namespace ssbd {

using nlohmann::json;

namespace {

void strip_timing(std::vector<SessionTrace>& traces) {
  for (auto& t : traces) {
    for (auto& r : t.records) r.wall_nanos = 0;
  }
}

std::vector<SessionTrace> run_all(const ModelBundle& bundle,
                                  const std::vector<StreamSession>& sessions,
                                  const DecodeConfig& config, Paradigm paradigm,
                                  const ExperimentSpec& spec) {
  config.validate();
  auto traces = run_sessions(bundle, sessions, config, paradigm, spec.jobs);
  if (!spec.timing) strip_timing(traces);
  return traces;
}

void append(std::vector<ReportRow>& rows, std::vector<ReportRow> more) {
  rows.insert(rows.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
}

using ConfigKey = std::tuple<Paradigm, double, std::size_t, MaskMode>;

ConfigKey key_of(const SessionTrace& t) {
  return {t.paradigm, t.config.beta, t.config.mask_k, t.config.mask_mode};
}

}  // namespace

ExperimentResult run_experiment(const ModelBundle& bundle,
                                const std::vector<StreamSession>& sessions,
                                const ExperimentSpec& spec) {
  if (sessions.empty()) throw Error(ErrorCode::kPrecondition, "no sessions to run");
  ExperimentResult result;
  result.traces = run_all(bundle, sessions, spec.config, spec.paradigm, spec);
  result.rows = report_rows(result.traces);
  return result;
}

ExperimentResult compare_experiment(const ModelBundle& bundle,
                                    const std::vector<StreamSession>& sessions,
                                    const ExperimentSpec& spec) {
  if (sessions.empty()) throw Error(ErrorCode::kPrecondition, "no sessions to run");
  ExperimentResult result;
  auto ar = run_all(bundle, sessions, spec.config, Paradigm::kAr, spec);
  append(result.rows, report_rows(ar));
  result.traces = ar;

  const std::vector<double> grid = spec.beta_grid.empty() ? std::vector<double>{spec.config.beta}
                                                          : spec.beta_grid;
  for (double beta : grid) {
    DecodeConfig config = spec.config;
    config.beta = beta;
    auto ssbd = run_all(bundle, sessions, config, Paradigm::kSsbd, spec);
    append(result.rows, report_rows(ar, ssbd));
    result.traces.insert(result.traces.end(), std::make_move_iterator(ssbd.begin()),
                         std::make_move_iterator(ssbd.end()));
  }
  return result;
}

void write_trace(std::ostream& out, const std::vector<SessionTrace>& traces, const Vocab& vocab) {
  for (const auto& t : traces) {
    for (const auto& r : t.records) {
      json line{{"session", t.session_id},
                {"paradigm", to_string(t.paradigm)},
                {"beta", t.config.beta},
                {"mask_k", t.config.mask_k},
                {"mask_mode", to_string(t.config.mask_mode)},
                {"t", r.t},
                {"input", r.input},
                {"output", r.output},
                {"output_text", vocab.decode(r.output)},
                {"display_output", r.display_output},
                {"accepted", r.accepted},
                {"draft_len", r.draft_len},
                {"erasure", r.erasure},
                {"forwards", r.forwards},
                {"prefill_positions", r.prefill_positions},
                {"decode_steps", r.decode_steps},
                {"wall_nanos", r.wall_nanos},
                {"truncated", r.truncated}};
      out << line.dump() << '\n';
    }
  }
}

void write_trace_file(const std::string& path, const std::vector<SessionTrace>& traces,
                      const Vocab& vocab) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kFile, "cannot write trace '" + path + "'");
  write_trace(out, traces, vocab);
  if (!out) throw Error(ErrorCode::kFile, "write failed for trace '" + path + "'");
}

std::vector<SessionTrace> read_trace(std::istream& in) {
  std::vector<SessionTrace> traces;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto doc = json::parse(line);
      SessionTrace head;
      head.session_id = doc.at("session").get<std::string>();
      head.paradigm = paradigm_from_string(doc.at("paradigm").get<std::string>());
      head.config.beta = doc.at("beta").get<double>();
      head.config.mask_k = doc.at("mask_k").get<std::size_t>();
      head.config.mask_mode = mask_mode_from_string(doc.at("mask_mode").get<std::string>());

      UpdateRecord r;
      r.t = doc.at("t").get<std::size_t>();
      r.input = doc.at("input").get<std::string>();
      r.output = doc.at("output").get<TokenSeq>();
      r.display_output = doc.at("display_output").get<TokenSeq>();
      r.accepted = doc.at("accepted").get<std::size_t>();
      r.draft_len = doc.at("draft_len").get<std::size_t>();
      r.erasure = doc.at("erasure").get<std::size_t>();
      r.forwards = doc.at("forwards").get<std::uint64_t>();
      r.prefill_positions = doc.at("prefill_positions").get<std::uint64_t>();
      r.decode_steps = doc.at("decode_steps").get<std::uint64_t>();
      r.wall_nanos = doc.at("wall_nanos").get<std::uint64_t>();
      r.truncated = doc.value("truncated", false);

      const bool continues = !traces.empty() && traces.back().session_id == head.session_id &&
                             key_of(traces.back()) == key_of(head) &&
                             traces.back().records.back().t < r.t;
      if (!continues) traces.push_back(std::move(head));
      traces.back().records.push_back(std::move(r));
      traces.back().final_output = traces.back().records.back().output;
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kParse, "trace line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return traces;
}

std::vector<SessionTrace> read_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFile, "cannot open trace '" + path + "'");
  return read_trace(in);
}

std::vector<ReportRow> report_from_traces(const std::vector<SessionTrace>& traces) {
  std::vector<SessionTrace> ar;
  // SSBD groups in order of first appearance.
  std::vector<std::pair<ConfigKey, std::vector<SessionTrace>>> groups;
  for (const auto& t : traces) {
    if (t.paradigm == Paradigm::kAr) {
      ar.push_back(t);
      continue;
    }
    const auto key = key_of(t);
    auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.first == key; });
    if (it == groups.end()) {
      groups.emplace_back(key, std::vector<SessionTrace>{});
      it = std::prev(groups.end());
    }
    it->second.push_back(t);
  }
  std::vector<ReportRow> rows;
  if (!ar.empty()) append(rows, report_rows(ar));
  for (const auto& [key, ssbd] : groups) {
    append(rows, ar.empty() ? report_rows(ssbd) : report_rows(ar, ssbd));
  }
  return rows;
}

}  // namespace ssbd
