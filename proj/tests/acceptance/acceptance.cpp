// Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero
// if any criterion fails. Tolerances and budgets are the constants below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>

#include "bootseq/harness.hpp"
#include "bootseq/kernels.hpp"
#include "bootseq/service.hpp"
#include "fixtures.hpp"
#include "oracles/brute_alignment.hpp"
#include "oracles/brute_wilcoxon.hpp"

#ifndef BOOTSEQ_CLI_PATH
#error "BOOTSEQ_CLI_PATH must point at the bootseq executable"
#endif

using namespace bootseq;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

constexpr double kAc1Budget = 1.0;     // s
constexpr double kAc2Budget = 1.0;     // s
constexpr double kAc3Budget = 120.0;   // s
constexpr double kAc4Budget = 60.0;    // s
constexpr double kAc5Budget = 600.0;   // s
constexpr double kAc8BudgetMs = 100.0;
constexpr double kExactTolerance = 1e-12;
constexpr double kNormalTolerance = 0.02;
constexpr double kMinTpr = 0.95;
constexpr double kMaxFpr = 0.10;
constexpr std::size_t kBruteForcePairs = 500;
constexpr std::size_t kScoreOnlyPairs = 10000;
constexpr std::size_t kWilcoxonVectors = 200;
constexpr std::size_t kPreprocessTrials = 10000;
constexpr std::size_t kParityRequests = 50;

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<Symbol> random_symbols(std::mt19937_64& g, std::size_t len, int alphabet) {
  std::vector<Symbol> s(len);
  for (auto& v : s) v = static_cast<Symbol>(1 + g() % alphabet);
  return s;
}

// ---- AC1 -------------------------------------------------------------------

Outcome ac1() {
  const auto t0 = Clock::now();
  const auto alpha = fixtures::letters("ABCDEF");
  const auto scheme = worked_example_scheme(alpha);
  const auto test = fixtures::encode(alpha, "ABCDEBE");
  const auto ref = fixtures::encode(alpha, "DEBFBCFDEE");
  const auto f = fill_matrix(test, ref, scheme);
  int same = 0;
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 11; ++j) same += f.at(i, j) == fixtures::kWorkedMatrix[i][j];
  const Score corner = score_only(test, ref, scheme);
  const double t = seconds_since(t0);
  Outcome o;
  o.pass = same == 88 && f.at(2, 1) == -10 && f.at(7, 10) == 1 && corner == 1 && t < kAc1Budget;
  o.detail = fmt("cells %d/88, F(row B, col D)=%d, F(m,n)=%d, score_only=%d, %.3f s", same, f.at(2, 1), f.at(7, 10),
                 corner, t);
  return o;
}

// ---- AC2 -------------------------------------------------------------------

Outcome ac2() {
  const auto t0 = Clock::now();
  const auto alpha = fixtures::letters("ACGT");
  const auto unit = ScoringScheme::unit_match();
  // Displayed alignment, right-padded with gaps so both rows have 18 columns.
  const auto at = fixtures::encode(alpha, "ATAGCCTA-CGTTTCAGC");
  const auto ar = fixtures::encode(alpha, "A-ATAGCATTGTGGC---");
  const Score aligned = rescore_alignment(at, ar, unit);
  // Unaligned: position by position, the shorter sequence padded at the end.
  const auto x = fixtures::encode(alpha, "ATAGCCTACGTTTCAGC");
  const auto y = fixtures::encode(alpha, "AATAGCATTGTGGC---");
  const Score unaligned = rescore_alignment(x, y, unit);
  const Score optimum = align(fixtures::encode(alpha, "ATAGCCTACGTTTCAGC"),
                              fixtures::encode(alpha, "AATAGCATTGTGGC"), unit)
                            .score;
  const double t = seconds_since(t0);
  Outcome o;
  o.pass = aligned == 6 && unaligned == 4 && optimum >= 6 && t < kAc2Budget;
  o.detail = fmt("aligned=%d (want 6), unaligned=%d (want 4), optimum=%d (want >= 6), %.3f s", aligned, unaligned,
                 optimum, t);
  return o;
}

// ---- AC3 -------------------------------------------------------------------

Outcome ac3() {
  const auto t0 = Clock::now();
  std::mt19937_64 g(303);
  std::size_t brute_ok = 0;
  for (std::size_t k = 0; k < kBruteForcePairs; ++k) {
    auto a = random_symbols(g, g() % 9, 4), b = random_symbols(g, g() % 9, 4);
    const int match = 1 + static_cast<int>(g() % 5);
    oracle::Scheme os{match, match - 1 - static_cast<int>(g() % 5), -static_cast<int>(g() % 6),
                      -static_cast<int>(g() % 6)};
    ScoringScheme s{os.match, os.mismatch, os.gap_in_test, os.gap_in_reference, nullptr};
    std::vector<int> ai(a.begin(), a.end()), bi(b.begin(), b.end());
    const auto r = align(a, b, s);
    brute_ok += r.score == oracle::best_alignment(ai, bi, os) && score_only(a, b, s) == r.score &&
                rescore_alignment(r.aligned_test, r.aligned_reference, s) == r.score;
  }
  std::size_t rolling_ok = 0;
  AlignWorkspace ws;
  for (std::size_t k = 0; k < kScoreOnlyPairs; ++k) {
    auto a = random_symbols(g, g() % 201, 1 + static_cast<int>(g() % 20));
    auto b = random_symbols(g, g() % 201, 1 + static_cast<int>(g() % 20));
    const int match = 1 + static_cast<int>(g() % 5);
    ScoringScheme s{match, match - 1 - static_cast<int>(g() % 5), -static_cast<int>(g() % 6),
                    -static_cast<int>(g() % 6), nullptr};
    const auto f = fill_matrix(a, b, s);
    rolling_ok += score_only(a, b, s, ws) == f.at(f.rows - 1, f.cols - 1);
  }
  const double t = seconds_since(t0);
  Outcome o;
  o.pass = brute_ok == kBruteForcePairs && rolling_ok == kScoreOnlyPairs && t < kAc3Budget;
  o.detail = fmt("brute force %zu/%zu, score_only vs full matrix %zu/%zu, %.1f s", brute_ok, kBruteForcePairs,
                 rolling_ok, kScoreOnlyPairs, t);
  return o;
}

// ---- AC4 -------------------------------------------------------------------

Outcome ac4() {
  const auto t0 = Clock::now();
  std::mt19937_64 g(404);
  std::size_t ok = 0;
  double worst = 0.0;
  for (std::size_t k = 0; k < kWilcoxonVectors; ++k) {
    const std::size_t n = 1 + g() % 15;
    std::vector<double> d(n), zero(n, 0.0);
    const bool ties = g() % 2 == 0;
    for (auto& v : d) {
      do v = ties ? static_cast<double>(static_cast<int>(g() % 11) - 5)
                  : std::ldexp(static_cast<double>(g() >> 11), -53) * 20.0 - 10.0;
      while (v == 0.0);
    }
    const auto want = oracle::enumerate(d);
    const auto got = wilcoxon(d, zero);
    const double err = std::abs(got.p_value - want.p_two_sided);
    worst = std::max(worst, err);
    ok += got.method == TestMethod::exact_enumeration && err <= kExactTolerance;
  }

  std::vector<double> boundary = {-1, -2, 3, 4, -5, 6, 7, 8, 9, 10}, zero10(10, 0.0);
  const auto b = wilcoxon(boundary, zero10);

  double normal_gap = 0.0;
  for (std::size_t n = 12; n <= 19; ++n) {
    std::vector<double> ranks(n);
    for (std::size_t i = 0; i < n; ++i) ranks[i] = static_cast<double>(i + 1);
    const double total = static_cast<double>(n * (n + 1) / 2);
    for (double wp = 0; wp <= total; wp += 1.0) {
      const double exact = exact_p_value(ranks, wp, total - wp, Alternative::two_sided);
      const double approx = normal_p_value(n, wp, total - wp, Alternative::two_sided, true);
      normal_gap = std::max(normal_gap, std::abs(exact - approx));
    }
  }
  const double t = seconds_since(t0);
  Outcome o;
  o.pass = ok == kWilcoxonVectors && b.w == 8.0 && b.p_value <= 0.05 && normal_gap <= kNormalTolerance &&
           t < kAc4Budget;
  o.detail = fmt("oracle %zu/%zu (max err %.1e), n=10 W=%.0f p=%.4f, max |exact-normal| n=12..19 = %.4f, %.2f s", ok,
                 kWilcoxonVectors, worst, b.w, b.p_value, normal_gap, t);
  return o;
}

// ---- AC5, AC6 ----------------------------------------------------------------

struct Effectiveness {
  CorpusEvaluation at2000;
  Outcome outcome;
};

Effectiveness ac5(const LabeledCorpus& corpus, const Config& config) {
  const auto t0 = Clock::now();
  Effectiveness e;
  e.at2000 = evaluate(corpus, config, 2000);
  const auto row = summarize(2000, e.at2000, config.confidence);
  const auto at50 = summarize(50, evaluate(corpus, config, 50), config.confidence);
  const double t = seconds_since(t0);
  e.outcome.pass = row.total.tpr() >= kMinTpr && row.total.fpr() <= kMaxFpr &&
                   at50.total.tpr() < row.total.tpr() && t < kAc5Budget;
  e.outcome.detail = fmt("len 2000: TPR %.4f FPR %.4f (I=%g); len 50: TPR %.4f; %.0f s", row.total.tpr(),
                         row.total.fpr(), config.confidence, at50.total.tpr(), t);
  return e;
}

Outcome ac6(const CorpusEvaluation& evaluation, const std::string& fingerprint, const Config& config) {
  auto grid = default_confidence_grid();
  // Add every observed p-value so each row boundary is exercised.
  for (const auto& app : evaluation.apps) {
    for (const auto& s : app.legitimate)
      if (s.p_value > 0.0 && s.p_value < 1.0) grid.push_back(s.p_value);
    for (const auto& s : app.malicious)
      if (s.p_value > 0.0 && s.p_value < 1.0) grid.push_back(s.p_value);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  const auto report = confidence_report(evaluation, grid, fingerprint, config);
  std::size_t violations = 0;
  for (std::size_t i = 1; i < report.rows.size(); ++i) {
    const auto &a = report.rows[i - 1], &b = report.rows[i];
    violations += !(a.value < b.value) || b.total.tpr() < a.total.tpr() || b.total.fpr() < a.total.fpr();
    for (std::size_t k = 0; k < a.per_app.size(); ++k)
      violations += b.per_app[k].second.tpr() < a.per_app[k].second.tpr() ||
                    b.per_app[k].second.fpr() < a.per_app[k].second.fpr();
  }
  Outcome o;
  o.pass = violations == 0 && report.rows.size() > 1;
  o.detail = fmt("%zu rows (I from %.1e to %.3f), %zu violations", report.rows.size(), report.rows.front().value,
                 report.rows.back().value, violations);
  return o;
}

// ---- AC7 -------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void end_to_end(const fs::path& dir, const Config& config) {
  fs::remove_all(dir);
  synth::write_corpus(synth::generate_corpus(synth::CorpusSpec::preset("small")), dir / "corpus");
  const auto corpus = load_corpus(dir / "corpus");
  write_report(sweep_length(corpus, {100, 250}, config), dir / "length");
  write_report(sweep_confidence(corpus, default_confidence_grid(), 250, config), dir / "confidence");
}

Outcome ac7(const fs::path& scratch, const Config& config) {
  const auto t0 = Clock::now();
  const auto a = scratch / "run_a", b = scratch / "run_b";
  end_to_end(a, config);
  end_to_end(b, config);
  std::size_t files = 0, differ = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    ++files;
    const auto rel = fs::relative(e.path(), a);
    differ += !fs::exists(b / rel) || slurp(e.path()) != slurp(b / rel);
  }
  std::size_t files_b = 0;
  for (const auto& e : fs::recursive_directory_iterator(b)) files_b += e.is_regular_file();
  Outcome o;
  o.pass = files > 0 && differ == 0 && files == files_b;
  o.detail = fmt("%zu files compared, %zu differ, %.0f s", files, differ + (files != files_b), seconds_since(t0));
  return o;
}

// ---- AC8 -------------------------------------------------------------------

Outcome ac8() {
  std::mt19937_64 g(808);
  const auto a = random_symbols(g, 2500, 96), b = random_symbols(g, 2500, 96);
  const ScoringScheme s;
  AlignWorkspace ws;
  Score score = 0;
  std::vector<double> ms;
  for (int rep = 0; rep < 7; ++rep) {
    const auto t0 = Clock::now();
    score = score_only(a, b, s, ws);
    ms.push_back(seconds_since(t0) * 1e3);
  }
  std::sort(ms.begin(), ms.end());
  const double median = ms[ms.size() / 2];
  const auto c = random_symbols(g, 700, 96);
  AlignWorkspace narrow;
  score_only(a, c, s, narrow);
  const bool wave = kernels::score_only_wavefront(a, b, s) == score;
  Outcome o;
  o.pass = median < kAc8BudgetMs && ws.peak_cells() == 2501 && narrow.peak_cells() == 701 && wave;
  o.detail = fmt("2500x2500 median %.2f ms (min %.2f), row cells %zu for 2500x2500 and %zu for 2500x700, "
                 "wavefront %s",
                 median, ms.front(), ws.peak_cells(), narrow.peak_cells(), wave ? "equal" : "DIFFERS");
  return o;
}

// ---- AC9 -------------------------------------------------------------------

Outcome ac9() {
  std::mt19937_64 g(909);
  std::size_t ok = 0;
  for (std::size_t k = 0; k < kPreprocessTrials; ++k) {
    const int alphabet = 1 + static_cast<int>(g() % 6);
    std::vector<Symbol> s = random_symbols(g, g() % 300, alphabet);
    // Force some long runs.
    if (!s.empty() && g() % 2)
      s.insert(s.begin() + static_cast<std::ptrdiff_t>(g() % s.size()), g() % 20, s[g() % s.size()]);
    const std::size_t max_len = 1 + g() % 200;
    const auto c = collapse_repeats(s);
    const auto p = preprocess(s, max_len);
    bool good = collapse_repeats(c) == c;
    good = good && std::adjacent_find(c.begin(), c.end()) == c.end();
    good = good && p == truncate(c, max_len);
    good = good && preprocess(p, max_len) == p && is_preprocessed(p, max_len);
    good = good && p.size() == std::min(c.size(), max_len);
    ok += good;
  }
  Outcome o;
  o.pass = ok == kPreprocessTrials;
  o.detail = fmt("%zu/%zu sequences", ok, kPreprocessTrials);
  return o;
}

// ---- AC10 ------------------------------------------------------------------

std::string shell_quote(const std::string& s) {
  std::string q = "'";
  for (char ch : s) q += ch == '\'' ? std::string("'\\''") : std::string(1, ch);
  return q + "'";
}

nlohmann::json run_cli(const std::vector<std::string>& args, int& code) {
  std::string cmd = shell_quote(BOOTSEQ_CLI_PATH);
  for (const auto& a : args) cmd += " " + shell_quote(a);
  cmd += " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) throw Error("cannot run " + cmd);
  std::string out;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
  const int status = pclose(pipe);
  code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return out.empty() ? nlohmann::json() : nlohmann::json::parse(out);
}

Outcome ac10(const fs::path& scratch) {
  const auto t0 = Clock::now();
  const std::size_t max_len = 300;
  const auto dir = scratch / "parity";
  fs::remove_all(dir);
  auto spec = synth::CorpusSpec::preset("small");
  spec.apps = 3;
  spec.legitimate_per_app = 15;
  spec.malicious_per_app = 15;
  spec.max_len = max_len;
  const auto corpus = synth::generate_corpus(spec);

  Config config;
  config.max_len = max_len;
  config.store_path = dir / "store";
  {
    auto store = ReferenceStore::open_or_create(config.store_path, corpus.alphabet);
    for (const auto& app : corpus.apps)
      for (std::size_t i = 0; i < 10; ++i) store->add(app.legitimate[i], true);
  }
  auto store = ReferenceStore::load(config.store_path);
  AnalysisService service(*store, config);
  const int port = service.bind_any("127.0.0.1");
  if (port <= 0) return {false, "cannot bind a local port"};
  std::thread server([&] { service.run(); });
  httplib::Client client("127.0.0.1", port);
  client.set_read_timeout(60, 0);

  std::mt19937_64 g(1010);
  std::size_t agree = 0, sent_bad = 0, flagged_bad = 0, flagged_good = 0;
  std::string first_mismatch;
  for (std::size_t k = 0; k < kParityRequests; ++k) {
    const auto& app = corpus.apps[g() % corpus.apps.size()];
    const bool bad = g() % 2 == 0;
    // Held-out legitimate samples or malicious ones, with a few random edits.
    BootSequence s = bad ? app.malicious[g() % app.malicious.size()] : app.legitimate[10 + g() % 5];
    for (int e = static_cast<int>(g() % 4); e > 0 && !s.symbols.empty(); --e)
      s.symbols[g() % s.symbols.size()] = static_cast<Symbol>(1 + g() % (corpus.alphabet.size() - 1));
    s.device_id = "req" + std::to_string(k);
    const auto file = dir / ("req" + std::to_string(k) + ".seq");
    save_sequence(file, s, corpus.alphabet);

    int code = 0;
    const auto cli = run_cli({"--store", config.store_path.string(), "--max-len", std::to_string(max_len), "analyze",
                              file.string()},
                             code);
    nlohmann::json req;
    req["app_id"] = s.app_id;
    req["device_id"] = s.device_id;
    req["syscalls"] = decode(s.symbols, corpus.alphabet);
    auto res = client.Post("/v1/analyze", req.dump(), "application/json");
    const bool same = res && res->status == 200 && !cli.is_null() &&
                      [&] {
                        const auto body = nlohmann::json::parse(res->body);
                        const bool labels = body["label"] == cli["label"];
                        const bool p = body["p_value"].get<double>() == cli["p_value"].get<double>();
                        const bool exit = code == (cli["label"] == "malicious" ? 3 : 0);
                        return labels && p && exit;
                      }();
    agree += same;
    const bool flagged = !cli.is_null() && cli["label"] == "malicious";
    sent_bad += bad;
    (bad ? flagged_bad : flagged_good) += flagged;
    if (!same && first_mismatch.empty())
      first_mismatch = " first mismatch at request " + std::to_string(k) +
                       (res ? " http " + std::to_string(res->status) + " " + res->body : " no http response") +
                       " cli " + cli.dump();
  }
  service.stop();
  server.join();
  Outcome o;
  o.pass = agree == kParityRequests;
  o.detail = fmt("%zu/%zu identical (label, p-value, exit code); flagged %zu/%zu payload and %zu/%zu clean requests; "
                 "%.0f s%s",
                 agree, kParityRequests, flagged_bad, sent_bad, flagged_good, kParityRequests - sent_bad,
                 seconds_since(t0), first_mismatch.c_str());
  return o;
}

}  // namespace

// Usage: bootseq_acceptance [scratch_dir [AC ids...]]. With ids, only those run
// (AC6 needs AC5).
int main(int argc, char** argv) {
  const fs::path scratch = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "bootseq_acceptance";
  fs::create_directories(scratch);
  const std::vector<std::string> only(argv + std::min(argc, 2), argv + argc);
  int failures = 0;
  auto report = [&](const char* id, const char* name, const std::function<Outcome()>& fn) {
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) return;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << id << ' ' << (o.pass ? "PASS" : "FAIL") << ' ' << name << ": " << o.detail << std::endl;
  };

  report("AC1", "worked matrix", ac1);
  report("AC2", "two-gap alignment", ac2);
  report("AC3", "alignment oracle", ac3);
  report("AC4", "wilcoxon oracle", ac4);

  const Config config;
  const auto corpus = from_synthetic(synth::generate_corpus(synth::CorpusSpec::preset("small")));
  Effectiveness eff;
  report("AC5", "synthetic effectiveness", [&] {
    eff = ac5(corpus, config);
    return eff.outcome;
  });
  report("AC6", "threshold monotonicity", [&] { return ac6(eff.at2000, corpus.fingerprint, config); });
  report("AC7", "determinism", [&] { return ac7(scratch, config); });
  report("AC8", "score_only performance", ac8);
  report("AC9", "preprocessing properties", ac9);
  report("AC10", "service/cli parity", [&] { return ac10(scratch); });

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
