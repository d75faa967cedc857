// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ssbd Authors

// Acceptance suite. Each criterion runs against its own fixtures and oracles
// and prints one PASS/FAIL line; the exit status is non-zero if any fails.

#include <chrono>
#include <cmath>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "httplib.h"
#include "json.hpp"
#include "process.hpp"
#include "ssbd/decoder.hpp"
#include "ssbd/experiment.hpp"
#include "ssbd/metrics.hpp"
#include "ssbd/model_io.hpp"
#include "ssbd/stream.hpp"
#include "ssbd/wire.hpp"
#include "tempdir.hpp"

using namespace ssbd;
using namespace ssbd::testing;

namespace {

const std::string kCli = SSBD_CLI_PATH;
const std::string kData = SSBD_DATA_DIR;

struct Outcome {
  bool ok = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget_seconds;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

/// Fixed streaming fixtures on the demo n-gram model: every source sentence
/// at lag 1, 2 and 3.
struct NgramFixture {
  ModelBundle bundle;
  std::vector<std::vector<StreamSession>> lags;
};

const NgramFixture& ngram_fixture() {
  static const NgramFixture f = [] {
    NgramFixture out{load_model_file(kData + "/ngram.json"), {}};
    for (std::size_t k = 1; k <= 3; ++k) {
      std::ifstream corpus(kData + "/source.txt");
      out.lags.push_back(lag_k_corpus(corpus, k));
    }
    return out;
  }();
  return f;
}

std::vector<ScriptedStream> random_streams(std::uint32_t seed, std::size_t count) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<std::size_t> vocab(12, 40);
  std::uniform_int_distribution<std::size_t> updates(5, 10);
  std::vector<ScriptedStream> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(random_scripted(rng, vocab(rng), updates(rng)));
  return out;
}

// ---- 1 ---------------------------------------------------------------------

Outcome lossless_at_beta_zero() {
  const auto streams = random_streams(101, 60);
  std::size_t updates = 0;
  for (std::size_t i = 0; i < streams.size(); ++i) {
    const auto& s = streams[i];
    const auto session = s.session("r" + std::to_string(i));
    const auto ar = run_session(s.bundle(), session, {}, Paradigm::kAr);
    const auto ss = run_session(s.bundle(), session, {}, Paradigm::kSsbd);
    for (std::size_t t = 0; t < session.size(); ++t) {
      ++updates;
      if (ar.records[t].output != ss.records[t].output || ar.records[t].output != s.outputs[t]) {
        return {false, fmt("session %zu update %zu differs from AR greedy", i, t + 1)};
      }
    }
  }
  return {true, fmt("%zu sessions, %zu updates token-identical to AR", streams.size(), updates)};
}

// ---- 2 ---------------------------------------------------------------------

Outcome full_acceptance_at_high_beta() {
  std::vector<std::pair<ModelBundle, std::vector<StreamSession>>> fixtures;
  for (const auto& s : random_streams(202, 30)) fixtures.push_back({s.bundle(), {s.session()}});
  for (const auto& lag : ngram_fixture().lags) fixtures.push_back({ngram_fixture().bundle, lag});

  std::size_t drafts = 0;
  std::size_t sessions = 0;
  for (double beta : {0.5, 1.0}) {
    for (const auto& [bundle, lag] : fixtures) {
      const auto traces = run_sessions(bundle, lag, DecodeConfig{beta}, Paradigm::kSsbd);
      const auto acc = acceptance_stats(traces);
      if (acc.accepted_total != acc.draft_total) {
        return {false, fmt("beta %.1f: accepted %zu of %zu draft tokens", beta, acc.accepted_total,
                           acc.draft_total)};
      }
      drafts += acc.draft_total;
      for (const auto& t : traces) {
        ++sessions;
        const auto ne = flicker_stats(t).normalized_erasure;
        if (!ne || *ne != 0.0) return {false, fmt("beta %.1f: session %s has NE != 0", beta, t.session_id.c_str())};
      }
    }
  }
  if (drafts == 0) return {false, "fixtures produced no draft tokens"};
  return {true, fmt("A/D = 100.0%% and NE = 0 on %zu session runs (%zu draft tokens)", sessions, drafts)};
}

// ---- 3 ---------------------------------------------------------------------

Outcome beta_monotonicity() {
  std::vector<double> grid;
  for (int i = 0; i <= 10; ++i) grid.push_back(i / 10.0);
  const auto& fx = ngram_fixture();

  // Per update: fixed draft (the beta = 0 previous output) and fixed context.
  std::size_t checked = 0;
  for (const auto& lag : fx.lags) {
    for (const auto& session : lag) {
      const auto trace = run_session(fx.bundle, session, {}, Paradigm::kSsbd);
      TokenSeq prev;
      for (std::size_t t = 0; t < session.size(); ++t) {
        const auto input = fx.bundle.model->vocab().encode(session[t].input);
        TokenSeq prompt = fx.bundle.prompt.apply(input);
        const std::size_t base = prompt.size();
        prompt.insert(prompt.end(), prev.begin(), prev.end());
        const auto dists = fx.bundle.model->forward(prompt, base - 1);
        std::size_t last = 0;
        for (double beta : grid) {
          const std::size_t a = verify_draft(dists, prev, beta).accepted;
          if (a < last) return {false, fmt("accepted prefix shrinks at beta %.1f", beta)};
          last = a;
        }
        ++checked;
        prev = trace.records[t].output;
      }
    }
  }

  // Aggregate over whole sessions.
  std::string ne_row;
  std::string ad_row;
  for (std::size_t k = 0; k < fx.lags.size(); ++k) {
    double prev_ne = INFINITY;
    double prev_ad = -INFINITY;
    for (double beta : grid) {
      const auto traces = run_sessions(fx.bundle, fx.lags[k], DecodeConfig{beta}, Paradigm::kSsbd);
      double ne_sum = 0;
      for (const auto& t : traces) ne_sum += flicker_stats(t).normalized_erasure.value_or(0.0);
      const double ne = ne_sum / static_cast<double>(traces.size());
      const double ad = acceptance_stats(traces).a_over_d.value_or(1.0);
      if (ne > prev_ne) return {false, fmt("lag %zu: NE rises at beta %.1f", k + 1, beta)};
      if (ad < prev_ad) return {false, fmt("lag %zu: A/D falls at beta %.1f", k + 1, beta)};
      prev_ne = ne;
      prev_ad = ad;
      if (k == 1 && (beta == 0.0 || beta == 1.0)) {
        ne_row += fmt("%s%.2f", ne_row.empty() ? "" : "->", ne);
        ad_row += fmt("%s%.1f%%", ad_row.empty() ? "" : "->", 100 * ad);
      }
    }
  }
  return {true, fmt("%zu updates monotone per update; lag-2 NE %s, A/D %s", checked, ne_row.c_str(),
                    ad_row.c_str())};
}

// ---- 4 ---------------------------------------------------------------------

bool same_decoding(const UpdateRecord& a, const UpdateRecord& b) {
  return a.output == b.output && a.accepted == b.accepted && a.draft_len == b.draft_len &&
         a.forwards == b.forwards && a.prefill_positions == b.prefill_positions &&
         a.decode_steps == b.decode_steps && a.truncated == b.truncated;
}

Outcome display_only_invariance() {
  std::vector<std::pair<ModelBundle, StreamSession>> fixtures;
  for (const auto& s : random_streams(404, 20)) fixtures.push_back({s.bundle(), s.session()});
  for (const auto& session : ngram_fixture().lags[1]) fixtures.push_back({ngram_fixture().bundle, session});

  std::size_t compared = 0;
  std::size_t display_diffs = 0;
  for (std::size_t k : {3u, 5u}) {
    for (double beta : {0.0, 0.2}) {
      for (const auto& [bundle, session] : fixtures) {
        const auto plain = run_session(bundle, session, DecodeConfig{beta}, Paradigm::kSsbd);
        const auto masked = run_session(bundle, session, DecodeConfig{beta, std::nullopt, k, MaskMode::kDisplayOnly},
                                        Paradigm::kSsbd);
        for (std::size_t t = 0; t < session.size(); ++t) {
          const auto& a = plain.records[t];
          const auto& b = masked.records[t];
          if (!same_decoding(a, b)) return {false, fmt("k=%zu beta=%.1f: decoding differs at t=%zu", k, beta, t + 1)};
          const bool last = t + 1 == session.size();
          if (b.display_output != display_view(a.output, k, last)) {
            return {false, fmt("k=%zu: display_output is not the masked output", k)};
          }
          display_diffs += b.display_output != a.display_output ? 1 : 0;
          ++compared;
        }
      }
    }
  }
  return {true, fmt("%zu updates bit-identical apart from display (%zu masked displays)", compared, display_diffs)};
}

// ---- 5 ---------------------------------------------------------------------

/// Outputs where each update either appends to the previous output or
/// replaces only its final token before appending.
std::vector<TokenSeq> final_flip_outputs(std::mt19937& rng, std::size_t vocab, std::size_t updates) {
  std::uniform_int_distribution<TokenId> word(kFirstWord, static_cast<TokenId>(vocab - 1));
  std::uniform_int_distribution<std::size_t> grow(1, 2);
  std::vector<TokenSeq> out;
  TokenSeq cur{word(rng), word(rng)};
  out.push_back(cur);
  for (std::size_t t = 1; t < updates; ++t) {
    if (t % 2 == 1) {
      TokenId flipped = word(rng);
      while (flipped == cur.back()) flipped = word(rng);
      cur.back() = flipped;
    }
    for (std::size_t i = grow(rng); i > 0; --i) cur.push_back(word(rng));
    out.push_back(cur);
  }
  return out;
}

Outcome trim_draft_direction() {
  std::mt19937 rng(505);
  std::vector<ScriptedStream> fixtures;
  // Hand fixture: [a b] -> [a c d] -> [a c d e] -> [a c d f g].
  fixtures.push_back(make_scripted(10, {{3}, {3, 4}, {3, 4, 5}, {3, 4, 5, 6}},
                                   {{7, 8}, {7, 9, 5}, {7, 9, 5, 6}, {7, 9, 5, 4, 3}}, rng));
  for (int i = 0; i < 20; ++i) {
    const std::size_t updates = 4 + static_cast<std::size_t>(i % 5);
    std::vector<TokenSeq> inputs;
    TokenSeq in;
    for (std::size_t t = 0; t < updates; ++t) {
      in.push_back(static_cast<TokenId>(kFirstWord + t % 10));
      inputs.push_back(in);
    }
    fixtures.push_back(make_scripted(24, inputs, final_flip_outputs(rng, 24, updates), rng));
  }

  std::string hand;
  for (std::size_t i = 0; i < fixtures.size(); ++i) {
    const auto& s = fixtures[i];
    const auto plain = run_session(s.bundle(), s.session(), {}, Paradigm::kSsbd);
    const auto trimmed = run_session(s.bundle(), s.session(), DecodeConfig{0.0, std::nullopt, 1, MaskMode::kTrimDraft},
                                     Paradigm::kSsbd);
    for (const auto& r : trimmed.records) {
      if (r.draft_len > 0 && r.accepted != r.draft_len) {
        return {false, fmt("fixture %zu t=%zu: trimmed draft only %zu/%zu accepted", i, r.t, r.accepted, r.draft_len)};
      }
    }
    const auto a = acceptance_stats(plain);
    const auto b = acceptance_stats(trimmed);
    if (!(*b.a_over_d > *a.a_over_d)) return {false, fmt("fixture %zu: A/D did not rise", i)};
    if (!(*b.a_over_o < *a.a_over_o)) return {false, fmt("fixture %zu: A/O did not fall", i)};
    if (i == 0) {
      hand = fmt("A/D %.1f%%->%.1f%%, A/O %.1f%%->%.1f%%", 100 * *a.a_over_d, 100 * *b.a_over_d, 100 * *a.a_over_o,
                 100 * *b.a_over_o);
    }
  }
  return {true, fmt("%zu fixtures; hand fixture %s", fixtures.size(), hand.c_str())};
}

// ---- 6 ---------------------------------------------------------------------

/// Replays one SSBD update against the table by direct lookup: one forward
/// for the verification pass, then one per greedy step until EOS.
std::size_t oracle_ssbd_forwards(const TableModel& m, const TokenSeq& base, const TokenSeq& draft) {
  auto argmax_at = [&](const TokenSeq& ctx) {
    auto it = m.entries().find(ctx);
    return oracle_argmax((it == m.entries().end() ? m.fallback() : it->second).values());
  };
  TokenSeq ctx = base;
  std::size_t accepted = 0;
  while (accepted < draft.size() && argmax_at(ctx) == draft[accepted]) ctx.push_back(draft[accepted++]);
  const TokenId next = argmax_at(ctx);
  if (next == kEos) return 1;
  ctx.push_back(next);
  return 1 + oracle_greedy_walk(m.entries(), m.fallback(), ctx, SIZE_MAX).evaluations;
}

Outcome step_economy() {
  std::mt19937 rng(606);
  std::size_t checked = 0;
  for (std::size_t g : {1u, 2u, 3u, 5u}) {
    const std::size_t n = 6;
    std::vector<TokenSeq> inputs;
    std::vector<TokenSeq> outputs;
    TokenSeq in;
    TokenSeq out;
    for (std::size_t t = 0; t < n; ++t) {
      in.push_back(static_cast<TokenId>(kFirstWord + t));
      for (std::size_t i = 0; i < g; ++i) out.push_back(static_cast<TokenId>(kFirstWord + (t * g + i) % 37));
      inputs.push_back(in);
      outputs.push_back(out);
    }
    const auto s = make_scripted(40, inputs, outputs, rng);
    const auto ar = run_session(s.bundle(), s.session(), {}, Paradigm::kAr);
    const auto ss = run_session(s.bundle(), s.session(), {}, Paradigm::kSsbd);
    TokenSeq prev;
    for (std::size_t t = 0; t < n; ++t) {
      const TokenSeq base = s.prompt.apply(inputs[t]);
      const std::size_t ar_oracle = oracle_greedy_walk(s.model->entries(), s.model->fallback(), base, SIZE_MAX).evaluations;
      const std::size_t ss_oracle = oracle_ssbd_forwards(*s.model, base, prev);
      const std::size_t ar_closed = outputs[t].size() + 1;
      const std::size_t ss_closed = 1 + (g - 1) + 1;
      const auto& a = ar.records[t];
      const auto& b = ss.records[t];
      if (ar_oracle != ar_closed || ss_oracle != ss_closed) {
        return {false, fmt("g=%zu t=%zu: oracle disagrees with closed form", g, t + 1)};
      }
      if (a.forwards != ar_closed || a.decode_steps != ar_closed) {
        return {false, fmt("g=%zu t=%zu: AR measured %llu forwards, expected %zu", g, t + 1,
                           static_cast<unsigned long long>(a.forwards), ar_closed)};
      }
      if (b.forwards != ss_closed || b.decode_steps != ss_closed) {
        return {false, fmt("g=%zu t=%zu: SSBD measured %llu forwards, expected %zu", g, t + 1,
                           static_cast<unsigned long long>(b.forwards), ss_closed)};
      }
      prev = outputs[t];
      ++checked;
    }
  }
  return {true, fmt("%zu updates: SSBD = g+1, AR = |output|+1 forwards, matching the replay oracle", checked)};
}

// ---- 7 ---------------------------------------------------------------------

Outcome metric_oracles() {
  std::mt19937 rng(707);
  for (int i = 0; i < 1000; ++i) {
    const auto a = random_seq(rng, 10, 3);
    const auto b = random_seq(rng, 10, 3);
    if (erasure(a, b) != oracle_erasure(a, b)) return {false, fmt("pair %d disagrees with the oracle", i)};
  }
  const double ne = normalized_erasure({{1, 2}, {1, 3}, {1, 3, 4}});
  if (std::abs(ne - 1.0 / 3.0) > 1e-12) return {false, fmt("worked example NE = %.15f", ne)};
  return {true, fmt("1000 pairs match; NE([[1,2],[1,3],[1,3,4]]) = %.12f", ne)};
}

// ---- 8 ---------------------------------------------------------------------

Outcome bias_conformance() {
  std::mt19937 rng(808);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> size(2, 50);
  double worst = 0;
  double worst_sum = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t v = size(rng);
    std::vector<double> w(v);
    for (auto& x : w) x = u(rng) < 0.2 ? 0.0 : u(rng);
    w[0] += 1e-3;
    const auto p = ProbDist::renormalized(w);
    const auto draft = static_cast<TokenId>(std::uniform_int_distribution<std::size_t>(0, v - 1)(rng));
    const double beta = i % 10 == 0 ? (i % 20 == 0 ? 0.0 : 1.0) : u(rng);
    const auto b = bias_distribution(p, draft, beta);
    double sum = 0;
    for (TokenId j = 0; j < v; ++j) {
      const double expected = (1.0 - beta) * p[j] + (j == draft ? beta : 0.0);
      worst = std::max(worst, std::abs(b[j] - expected));
      sum += b[j];
    }
    worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
  }
  const bool ok = worst <= 1e-12 && worst_sum <= 1e-9;
  return {ok, fmt("max componentwise error %.2e, max |sum-1| %.2e over 1000 triples", worst, worst_sum)};
}

// ---- 9 ---------------------------------------------------------------------

Outcome wire_equivalence() {
  TempDir dir;
  std::mt19937 rng(909);
  const auto s = random_scripted(rng, 30, 8);
  const auto model_path = dir.file("table.json");
  save_json_file(model_to_json(*s.model, s.prompt), model_path);

  Child server({kCli, "serve-mock", "--model", model_path, "--port", "0"});
  const std::string line = server.read_line();
  if (line.rfind("listening on ", 0) != 0) return {false, "serve-mock did not start"};
  const int port = std::stoi(line.substr(line.rfind(':') + 1));
  const RemoteModel remote("http://127.0.0.1:" + std::to_string(port), s.model->vocab());

  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    // Half the prompts follow the scripted contexts, half are random.
    TokenSeq prompt;
    if (i % 2 == 0) {
      const auto& entries = s.model->entries();
      auto it = entries.begin();
      std::advance(it, std::uniform_int_distribution<std::size_t>(0, entries.size() - 1)(rng));
      prompt = it->first;
    } else {
      prompt = random_seq(rng, 12, 30);
      prompt.insert(prompt.begin(), kBos);
    }
    const std::size_t from = std::uniform_int_distribution<std::size_t>(0, prompt.size() - 1)(rng);
    const auto local = s.model->forward(prompt, from);
    const auto got = remote.forward(prompt, from);
    if (got.size() != local.size()) return {false, "row count differs"};
    for (std::size_t r = 0; r < got.size(); ++r) {
      for (TokenId j = 0; j < 30; ++j) worst = std::max(worst, std::abs(got[r][j] - local[r][j]));
    }
  }

  httplib::Client cli("127.0.0.1", port);
  std::size_t rejected = 0;
  const std::vector<std::string> bad{"{not json", "[]", R"({"tokens":[1,2]})", R"({"tokens":"x","from_position":0})",
                                     R"({"tokens":[1,999],"from_position":0})", R"({"tokens":[1],"from_position":5})",
                                     R"({"tokens":[],"from_position":0})"};
  for (const auto& body : bad) {
    auto res = cli.Post("/v1/forward", body, "application/json");
    if (res && res->status == 400 && nlohmann::json::parse(res->body, nullptr, false).contains("error")) ++rejected;
  }
  server.signal(SIGTERM);
  const int rc = server.wait().exit_code;
  const bool ok = worst <= 1e-9 && rejected == bad.size() && rc == 0;
  return {ok, fmt("100 prompts, max row difference %.2e; %zu/%zu malformed requests got HTTP 400; shutdown exit %d",
                  worst, rejected, bad.size(), rc)};
}

// ---- 10 --------------------------------------------------------------------

Outcome end_to_end_determinism() {
  TempDir dir;
  auto run = [&](const std::string& tag, const std::string& jobs) {
    return run_process({kCli, "run", "--model", kData + "/ngram.json", "--corpus", kData + "/source.txt", "--lag-k",
                        "2", "--beta", "0.2", "--mask-k", "1", "--no-timing", "--jobs", jobs, "--trace",
                        dir.file(tag + ".jsonl"), "--report", dir.file(tag + ".csv")})
        .exit_code;
  };
  if (run("a", "1") != 0 || run("b", "1") != 0 || run("c", "4") != 0) return {false, "cmd_run failed"};
  const auto trace = slurp(dir.file("a.jsonl"));
  const auto report = slurp(dir.file("a.csv"));
  if (trace.empty() || report.empty()) return {false, "empty outputs"};
  const bool ok = trace == slurp(dir.file("b.jsonl")) && report == slurp(dir.file("b.csv")) &&
                  trace == slurp(dir.file("c.jsonl")) && report == slurp(dir.file("c.csv"));
  return {ok, fmt("trace %zu bytes and report %zu bytes identical across 2 runs (and with --jobs 4)", trace.size(),
                  report.size())};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "lossless speculation at beta=0", 5, lossless_at_beta_zero},
      {2, "beta in {0.5, 1.0}: A/D = 100%, NE = 0", 5, full_acceptance_at_high_beta},
      {3, "beta monotonicity sweep", 30, beta_monotonicity},
      {4, "display-only mask-k invariance", 10, display_only_invariance},
      {5, "trim-draft mask-k direction", 10, trim_draft_direction},
      {6, "step-economy accounting", 5, step_economy},
      {7, "metric oracles", 5, metric_oracles},
      {8, "bias distribution conformance", 2, bias_conformance},
      {9, "wire-protocol equivalence", 10, wire_equivalence},
      {10, "end-to-end determinism", 10, end_to_end_determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_budget = secs < c.budget_seconds;
    const bool pass = o.ok && in_budget;
    failures += pass ? 0 : 1;
    std::printf("%s  criterion %2d  %-42s %s (%.2f s of %.0f s)\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                o.detail.c_str(), secs, c.budget_seconds);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
