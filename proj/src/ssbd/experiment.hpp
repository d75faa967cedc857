// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ssbd Authors

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ssbd/metrics.hpp"
#include "ssbd/model.hpp"
#include "ssbd/stream.hpp"
#include "ssbd/trace.hpp"

namespace ssbd {

struct ExperimentSpec {
  Paradigm paradigm = Paradigm::kSsbd;
  DecodeConfig config;
  /// compare only: one SSBD run per value. Empty means {config.beta}.
  std::vector<double> beta_grid;
  std::size_t jobs = 1;
  /// When false, wall_nanos is zeroed so output files are reproducible.
  bool timing = true;
};

struct ExperimentResult {
  /// run: one trace per session. compare: the AR traces, then the SSBD
  /// traces for each grid value in order.
  std::vector<SessionTrace> traces;
  std::vector<ReportRow> rows;
};

ExperimentResult run_experiment(const ModelBundle& bundle,
                                const std::vector<StreamSession>& sessions,
                                const ExperimentSpec& spec);

ExperimentResult compare_experiment(const ModelBundle& bundle,
                                    const std::vector<StreamSession>& sessions,
                                    const ExperimentSpec& spec);

// Trace JSONL, one record per update:
//   {"session","paradigm","beta","mask_k","mask_mode","t","input",
//    "output":[ids],"output_text","display_output":[ids],"accepted",
//    "draft_len","erasure","forwards","prefill_positions","decode_steps",
//    "wall_nanos","truncated"}
void write_trace(std::ostream& out, const std::vector<SessionTrace>& traces, const Vocab& vocab);
void write_trace_file(const std::string& path, const std::vector<SessionTrace>& traces,
                      const Vocab& vocab);
std::vector<SessionTrace> read_trace(std::istream& in);
std::vector<SessionTrace> read_trace_file(const std::string& path);

/// Rebuilds the report from traces alone: paired rows when AR and SSBD
/// traces are both present, single-paradigm rows otherwise.
std::vector<ReportRow> report_from_traces(const std::vector<SessionTrace>& traces);

}  // namespace ssbd
