// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ssbd Authors

// Command-line driver over the C API: run, compare, lagk, serve-mock,
// train-ngram, report.

#include <csignal>
#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ssbd/ssbd.h"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct ModelDeleter {
  void operator()(ssbd_model* m) const { ssbd_model_free(m); }
};
using ModelPtr = std::unique_ptr<ssbd_model, ModelDeleter>;

struct ServerDeleter {
  void operator()(ssbd_server* s) const { ssbd_server_free(s); }
};
using ServerPtr = std::unique_ptr<ssbd_server, ServerDeleter>;

int report_failure(ssbd_status st) {
  std::cerr << "ssbd: " << ssbd_status_name(st) << ": " << ssbd_last_error() << '\n';
  return kExitFailure;
}

struct ExperimentArgs {
  std::string model_path;
  std::string remote_url;
  std::string transcript;
  std::string corpus;
  std::size_t lag_k = 3;
  std::string paradigm = "ssbd";
  double beta = 0.0;
  std::string beta_grid;
  std::size_t mask_k = 0;
  bool display_only = false;
  std::size_t max_new_tokens = 0;
  std::size_t jobs = 1;
  bool no_timing = false;
  std::string trace;
  std::string report;
};

void add_experiment_options(CLI::App* cmd, ExperimentArgs& a) {
  auto* model = cmd->add_option("--model", a.model_path, "Model document (table or ngram JSON)");
  auto* remote = cmd->add_option("--remote", a.remote_url, "Inference server URL, e.g. http://127.0.0.1:8080");
  model->excludes(remote);
  auto* source = cmd->add_option_group("model source");
  source->add_option(model);
  source->add_option(remote);
  source->require_option(1);

  auto* transcript = cmd->add_option("--transcript", a.transcript, "Transcript JSONL input");
  auto* corpus = cmd->add_option("--corpus", a.corpus, "Sentence-per-line corpus, streamed with lag-k");
  transcript->excludes(corpus);
  auto* input = cmd->add_option_group("input source");
  input->add_option(transcript);
  input->add_option(corpus);
  input->require_option(1);
  cmd->add_option("--lag-k", a.lag_k, "Words revealed per update with --corpus")->check(CLI::PositiveNumber);

  cmd->add_option("--beta", a.beta, "Verification bias in [0, 1]")->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--mask-k", a.mask_k, "Mask the last k output tokens");
  cmd->add_flag("--display-only", a.display_only, "Mask only the displayed output, keep the full draft");
  cmd->add_option("--max-new-tokens", a.max_new_tokens, "Output cap per update (default 4*|input|+16)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--jobs", a.jobs, "Concurrent sessions")->check(CLI::PositiveNumber);
  cmd->add_flag("--no-timing", a.no_timing, "Write wall_nanos as 0 for reproducible output");
  cmd->add_option("--trace", a.trace, "Trace JSONL output");
  cmd->add_option("--report", a.report, "CSV report output (default stdout)");
}

std::optional<std::vector<double>> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      if (used != item.size() || !(v >= 0.0 && v <= 1.0)) return std::nullopt;
      grid.push_back(v);
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }
  if (grid.empty()) return std::nullopt;
  return grid;
}

int open_model(const ExperimentArgs& a, ModelPtr& out) {
  ssbd_model* raw = nullptr;
  const ssbd_status st = a.model_path.empty() ? ssbd_model_connect(a.remote_url.c_str(), &raw)
                                              : ssbd_model_load(a.model_path.c_str(), &raw);
  if (st != SSBD_OK) return report_failure(st);
  out.reset(raw);
  return 0;
}

int run_experiment(const ExperimentArgs& a, bool compare) {
  std::vector<double> grid;
  if (compare && !a.beta_grid.empty()) {
    auto parsed = parse_grid(a.beta_grid);
    if (!parsed) {
      std::cerr << "ssbd: --beta-grid must be comma-separated values in [0, 1]\n";
      return kExitUsage;
    }
    grid = std::move(*parsed);
  }

  ModelPtr model;
  if (int rc = open_model(a, model)) return rc;

  ssbd_experiment_options o;
  ssbd_experiment_options_init(&o);
  o.paradigm = a.paradigm == "ar" ? SSBD_PARADIGM_AR : SSBD_PARADIGM_SSBD;
  o.config.beta = a.beta;
  o.config.max_new_tokens = a.max_new_tokens;
  o.config.mask_k = a.mask_k;
  o.config.mask_mode = a.mask_k == 0 ? SSBD_MASK_NONE
                       : a.display_only ? SSBD_MASK_DISPLAY_ONLY
                                        : SSBD_MASK_TRIM_DRAFT;
  o.beta_grid = grid.empty() ? nullptr : grid.data();
  o.beta_grid_len = grid.size();
  o.jobs = a.jobs;
  o.timing = a.no_timing ? 0 : 1;
  o.transcript_path = a.transcript.empty() ? nullptr : a.transcript.c_str();
  o.corpus_path = a.corpus.empty() ? nullptr : a.corpus.c_str();
  o.lag_k = a.lag_k;
  o.trace_path = a.trace.empty() ? nullptr : a.trace.c_str();
  o.report_path = a.report.empty() ? "-" : a.report.c_str();

  const ssbd_status st = compare ? ssbd_compare(model.get(), &o) : ssbd_run(model.get(), &o);
  return st == SSBD_OK ? 0 : report_failure(st);
}

int serve_mock(const std::string& model_path, const std::string& host, int port) {
  ModelPtr model;
  {
    ssbd_model* raw = nullptr;
    if (auto st = ssbd_model_load(model_path.c_str(), &raw); st != SSBD_OK) return report_failure(st);
    model.reset(raw);
  }

  // Signals are taken synchronously by this thread; the server threads
  // inherit the blocked mask.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  ssbd_server* raw = nullptr;
  if (auto st = ssbd_server_start(model.get(), host.c_str(), port, &raw); st != SSBD_OK) {
    return report_failure(st);
  }
  ServerPtr server(raw);
  std::printf("listening on %s:%d\n", host.c_str(), ssbd_server_port(server.get()));
  std::fflush(stdout);

  int sig = 0;
  sigwait(&signals, &sig);
  ssbd_server_stop(server.get());
  ssbd_server_wait(server.get());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Streaming re-translation decoder with self-speculative biased verification"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ssbd_version());

  ExperimentArgs run_args;
  auto* run = app.add_subcommand("run", "Decode every session with one paradigm");
  add_experiment_options(run, run_args);
  run->add_option("--paradigm", run_args.paradigm, "ar or ssbd")
      ->check(CLI::IsMember({"ar", "ssbd"}));

  ExperimentArgs cmp_args;
  auto* compare = app.add_subcommand("compare", "Run AR and SSBD on identical inputs");
  add_experiment_options(compare, cmp_args);
  compare->add_option("--beta-grid", cmp_args.beta_grid, "Comma-separated beta values, e.g. 0,0.1,0.2");

  std::string lag_corpus, lag_out;
  std::size_t lag_k = 3;
  auto* lagk = app.add_subcommand("lagk", "Convert a corpus into a lag-k transcript");
  lagk->add_option("--corpus", lag_corpus, "Sentence-per-line corpus")->required();
  lagk->add_option("--k", lag_k, "Words revealed per update")->check(CLI::PositiveNumber);
  lagk->add_option("--out", lag_out, "Transcript JSONL output")->required();

  std::string serve_model, serve_host = "127.0.0.1";
  int serve_port = 8080;
  auto* serve = app.add_subcommand("serve-mock", "Serve a model over the /v1/forward protocol");
  serve->add_option("--model", serve_model, "Model document")->required();
  serve->add_option("--host", serve_host, "Bind address");
  serve->add_option("--port", serve_port, "Port (0 picks a free one)")->check(CLI::Range(0, 65535));

  std::string train_corpus, train_out, train_prefix, train_sep;
  std::size_t train_order = 3;
  double train_alpha = 0.01;
  auto* train = app.add_subcommand("train-ngram", "Train an n-gram model document");
  train->add_option("--corpus", train_corpus, "Whitespace-tokenized lines")->required();
  train->add_option("--order", train_order, "n-gram order")->check(CLI::PositiveNumber);
  train->add_option("--alpha", train_alpha, "Add-alpha smoothing")->check(CLI::PositiveNumber);
  train->add_option("--prefix", train_prefix, "Prompt prefix words");
  train->add_option("--separator", train_sep, "Prompt separator words");
  train->add_option("--out", train_out, "Model document output")->required();

  std::string report_trace, report_out = "-";
  auto* report = app.add_subcommand("report", "Recompute the CSV report from a trace");
  report->add_option("--trace", report_trace, "Trace JSONL")->required();
  report->add_option("--out", report_out, "CSV output (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  if (*run) return run_experiment(run_args, false);
  if (*compare) return run_experiment(cmp_args, true);
  if (*lagk) {
    auto st = ssbd_lagk(lag_corpus.c_str(), lag_k, lag_out.c_str());
    return st == SSBD_OK ? 0 : report_failure(st);
  }
  if (*serve) return serve_mock(serve_model, serve_host, serve_port);
  if (*train) {
    auto st = ssbd_ngram_train(train_corpus.c_str(), train_order, train_alpha, train_prefix.c_str(),
                               train_sep.c_str(), train_out.c_str());
    return st == SSBD_OK ? 0 : report_failure(st);
  }
  if (*report) {
    auto st = ssbd_report_from_trace(report_trace.c_str(), report_out.c_str());
    return st == SSBD_OK ? 0 : report_failure(st);
  }
  return kExitUsage;
}
