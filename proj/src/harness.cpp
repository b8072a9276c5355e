#include "bootseq/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "bootseq/kernels.hpp"
#include "bootseq/rng.hpp"

namespace bootseq {

namespace fs = std::filesystem;

namespace {

template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const NotFound&) {
    throw;
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

BootSequence prepared(BootSequence s, std::size_t max_len) {
  s.preprocessed = false;
  return preprocess(std::move(s), max_len);
}

}  // namespace

std::shared_ptr<const ReferenceModel> build_model(std::vector<BootSequence> pool, const Config& config) {
  return stage("bag", [&] {
    for (auto& s : pool) s = prepared(std::move(s), config.max_len);
    return std::make_shared<const ReferenceModel>(std::move(pool), config.scheme, config.bagging, config.baseline);
  });
}

Analysis analyze(const ReferenceModel& model, BootSequence test, const Config& config) {
  test = stage("preprocess", [&] {
    if (test.empty()) throw InvalidInput("empty input sequence");
    return prepared(std::move(test), config.max_len);
  });
  Analysis a;
  a.test_vector = stage("score", [&] { return model.test_vector(test); });
  a.baseline = model.baseline();
  a.verdict = stage("decide", [&] {
    return classify(wilcoxon(a.test_vector, a.baseline, config.wilcoxon), config.confidence);
  });
  return a;
}

Analysis analyze(const ReferenceStore& store, BootSequence test, const Config& config) {
  if (test.empty()) throw StageError("preprocess", "empty input sequence");
  auto model = build_model(store.snapshot(test.app_id), config);
  return analyze(*model, std::move(test), config);
}

std::shared_ptr<const ReferenceModel> ModelCache::get(const std::string& app_id) {
  std::lock_guard lock(mutex_);
  auto it = models_.find(app_id);
  if (it != models_.end()) return it->second;
  auto model = build_model(store_.snapshot(app_id), config_);
  models_.emplace(app_id, model);
  return model;
}

void ModelCache::invalidate(const std::string& app_id) {
  std::lock_guard lock(mutex_);
  models_.erase(app_id);
}

// ---- corpora -------------------------------------------------------------

std::string corpus_fingerprint(const Alphabet& alphabet, const std::vector<synth::AppSamples>& apps) {
  std::ostringstream text;
  alphabet.write(text);
  for (const auto& app : apps) {
    text << "\n@" << app.app_id << '\n';
    for (const auto& s : app.legitimate) write_sequence(text, s, alphabet);
    for (const auto& s : app.malicious) write_sequence(text, s, alphabet);
  }
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(rng::fnv1a(text.str())));
  return buf;
}

LabeledCorpus from_synthetic(const synth::Corpus& corpus) {
  LabeledCorpus c{corpus.alphabet, corpus.apps, {}};
  c.fingerprint = corpus_fingerprint(c.alphabet, c.apps);
  return c;
}

LabeledCorpus load_corpus(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw NotFound("no corpus manifest in " + dir.string());
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput((dir / "manifest.json").string() + ": " + e.what());
  }
  LabeledCorpus c{Alphabet::load(dir / "alphabet.txt"), {}, {}};
  for (const auto& entry : manifest.at("apps")) {
    synth::AppSamples app;
    app.app_id = entry.at("app_id").get<std::string>();
    auto read = [&](const char* label, std::size_t count, std::vector<BootSequence>& out) {
      for (std::size_t i = 0; i < count; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "%03zu.seq", i);
        auto s = load_sequence(dir / app.app_id / label / name, c.alphabet).sequence;
        s.preprocessed = is_preprocessed(s.symbols, std::numeric_limits<std::size_t>::max());
        out.push_back(std::move(s));
      }
    };
    read("legitimate", entry.at("legitimate").get<std::size_t>(), app.legitimate);
    read("malicious", entry.at("malicious").get<std::size_t>(), app.malicious);
    c.apps.push_back(std::move(app));
  }
  c.fingerprint = corpus_fingerprint(c.alphabet, c.apps);
  return c;
}

// ---- evaluation ------------------------------------------------------------

std::array<std::vector<std::size_t>, 3> round_robin_groups(std::size_t n) {
  if (n < 3) throw InvalidInput("cross-validation needs at least 3 legitimate samples, got " + std::to_string(n));
  std::array<std::vector<std::size_t>, 3> g;
  for (std::size_t i = 0; i < n; ++i) g[i % 3].push_back(i);
  return g;
}

namespace {

std::vector<SampleOutcome> test_against(const ReferenceModel& model, const std::vector<BootSequence>& tests,
                                        const std::vector<std::size_t>& indices, Label truth, std::size_t group,
                                        const Config& config) {
  std::vector<BootSequence> prepared_tests;
  prepared_tests.reserve(indices.size());
  for (auto i : indices) prepared_tests.push_back(prepared(tests[i], config.max_len));
  const auto vectors = model.test_vectors(prepared_tests);
  std::vector<SampleOutcome> out;
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const auto r = wilcoxon(vectors[k], model.baseline(), config.wilcoxon);
    out.push_back({indices[k], group, truth, r.p_value});
  }
  return out;
}

std::vector<SampleOutcome> cross_validate_app(const synth::AppSamples& app, const Config& config,
                                              const std::array<std::vector<std::size_t>, 3>& groups) {
  std::vector<SampleOutcome> out;
  for (std::size_t g = 0; g < 3; ++g) {
    // Group g is held out; the model is built from the other two.
    std::vector<BootSequence> pool;
    for (std::size_t h = 0; h < 3; ++h)
      if (h != g)
        for (auto i : groups[h]) pool.push_back(app.legitimate[i]);
    const auto model = build_model(std::move(pool), config);
    auto part = test_against(*model, app.legitimate, groups[g], Label::legitimate, g, config);
    out.insert(out.end(), part.begin(), part.end());
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.index < b.index; });
  return out;
}

}  // namespace

CorpusEvaluation evaluate(const LabeledCorpus& corpus, const Config& config, std::size_t length) {
  if (length == 0) throw InvalidInput("length must be at least 1");
  Config c = config;
  c.max_len = length;
  c.validate();
  CorpusEvaluation e;
  e.length = length;
  for (const auto& app : corpus.apps) {
    AppEvaluation a;
    a.app_id = app.app_id;
    a.legitimate = cross_validate_app(app, c, round_robin_groups(app.legitimate.size()));
    if (!app.malicious.empty()) {
      const auto model = build_model(app.legitimate, c);
      std::vector<std::size_t> all(app.malicious.size());
      for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
      a.malicious = test_against(*model, app.malicious, all, Label::malicious, 0, c);
    }
    e.apps.push_back(std::move(a));
  }
  return e;
}

CrossValidationReport cross_validate(const LabeledCorpus& corpus, const Config& config) {
  config.validate();
  CrossValidationReport r;
  std::size_t flagged = 0, total = 0;
  for (const auto& app : corpus.apps) {
    CrossValidationSplit s;
    s.app_id = app.app_id;
    s.groups = round_robin_groups(app.legitimate.size());
    s.outcomes = cross_validate_app(app, config, s.groups);
    std::size_t fp = 0;
    for (const auto& o : s.outcomes) fp += o.p_value < config.confidence;
    s.fpr = static_cast<double>(fp) / static_cast<double>(s.outcomes.size());
    flagged += fp;
    total += s.outcomes.size();
    r.apps.push_back(std::move(s));
  }
  r.fpr = total == 0 ? 0.0 : static_cast<double>(flagged) / static_cast<double>(total);
  return r;
}

Rates rates_at(const AppEvaluation& app, double confidence) {
  Rates r;
  for (const auto& o : app.malicious) (o.p_value < confidence ? r.tp : r.fn)++;
  for (const auto& o : app.legitimate) (o.p_value < confidence ? r.fp : r.tn)++;
  return r;
}

ReportRow summarize(double value, const CorpusEvaluation& evaluation, double confidence) {
  ReportRow row;
  row.value = value;
  std::vector<double> tprs, fprs;
  for (const auto& app : evaluation.apps) {
    const Rates r = rates_at(app, confidence);
    row.per_app.emplace_back(app.app_id, r);
    row.total.tp += r.tp;
    row.total.fn += r.fn;
    row.total.fp += r.fp;
    row.total.tn += r.tn;
    if (r.tp + r.fn > 0) tprs.push_back(r.tpr());
    if (r.fp + r.tn > 0) fprs.push_back(r.fpr());
  }
  auto stats = [](const std::vector<double>& v, double& mx, double& avg, double& mn) {
    if (v.empty()) return;
    mx = *std::max_element(v.begin(), v.end());
    mn = *std::min_element(v.begin(), v.end());
    double s = 0.0;
    for (double x : v) s += x;
    avg = s / static_cast<double>(v.size());
  };
  stats(tprs, row.tpr_max, row.tpr_avg, row.tpr_min);
  stats(fprs, row.fpr_max, row.fpr_avg, row.fpr_min);
  return row;
}

std::vector<double> default_confidence_grid() {
  return {0.03, 0.01, 0.005, 0.002, 0.001, 5e-4, 2e-4, 1e-4, 5e-5, 2e-5, 1e-5, 4e-6, 1e-6, 4e-7};
}

std::vector<std::size_t> default_length_grid() { return {50, 100, 250, 500, 1000, 1500, 2000, 2500}; }

EvaluationReport confidence_report(const CorpusEvaluation& evaluation, std::vector<double> values,
                                   const std::string& fingerprint, const Config& config) {
  if (values.empty()) throw InvalidInput("confidence sweep needs at least one value");
  for (double v : values)
    if (!(v > 0.0 && v < 1.0)) throw InvalidInput("confidence values must lie in (0, 1)");
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  EvaluationReport r;
  r.parameter = "I";
  r.corpus_fingerprint = fingerprint;
  r.config = {{"parameter", "I"},
              {"values", values},
              {"length", evaluation.length},
              {"corpus_fingerprint", fingerprint},
              {"config", config.to_json()}};
  for (double v : values) r.rows.push_back(summarize(v, evaluation, v));
  return r;
}

EvaluationReport sweep_confidence(const LabeledCorpus& corpus, std::vector<double> values, std::size_t length,
                                  const Config& config) {
  if (values.empty()) throw InvalidInput("confidence sweep needs at least one value");
  return confidence_report(evaluate(corpus, config, length), std::move(values), corpus.fingerprint, config);
}

EvaluationReport sweep_length(const LabeledCorpus& corpus, std::vector<std::size_t> lengths, const Config& config) {
  if (lengths.empty()) throw InvalidInput("length sweep needs at least one length");
  for (auto l : lengths)
    if (l < 1) throw InvalidInput("lengths must be at least 1");
  std::sort(lengths.begin(), lengths.end());
  lengths.erase(std::unique(lengths.begin(), lengths.end()), lengths.end());
  EvaluationReport r;
  r.parameter = "length";
  r.corpus_fingerprint = corpus.fingerprint;
  r.config = {{"parameter", "length"},
              {"values", lengths},
              {"confidence", config.confidence},
              {"corpus_fingerprint", corpus.fingerprint},
              {"config", config.to_json()}};
  for (auto l : lengths)
    r.rows.push_back(summarize(static_cast<double>(l), evaluate(corpus, config, l), config.confidence));
  return r;
}

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string param(const EvaluationReport& r, double v) { return fmt(r.parameter == "I" ? "%.6g" : "%.0f", v); }

}  // namespace

std::string report_csv(const EvaluationReport& report) {
  std::ostringstream out;
  out << report.parameter
      << ",tpr,fpr,tp,fn,fp,tn,tpr_max,tpr_avg,tpr_min,fpr_max,fpr_avg,fpr_min\n";
  for (const auto& row : report.rows) {
    out << param(report, row.value) << ',' << fmt("%.6f", row.total.tpr()) << ',' << fmt("%.6f", row.total.fpr())
        << ',' << row.total.tp << ',' << row.total.fn << ',' << row.total.fp << ',' << row.total.tn;
    for (double v : {row.tpr_max, row.tpr_avg, row.tpr_min, row.fpr_max, row.fpr_avg, row.fpr_min})
      out << ',' << fmt("%.6f", v);
    out << '\n';
  }
  return out.str();
}

std::string per_app_csv(const EvaluationReport& report) {
  std::ostringstream out;
  out << report.parameter << ",app_id,tpr,fpr,tp,fn,fp,tn\n";
  for (const auto& row : report.rows)
    for (const auto& [app, r] : row.per_app)
      out << param(report, row.value) << ',' << app << ',' << fmt("%.6f", r.tpr()) << ',' << fmt("%.6f", r.fpr())
          << ',' << r.tp << ',' << r.fn << ',' << r.fp << ',' << r.tn << '\n';
  return out.str();
}

void write_report(const EvaluationReport& report, const fs::path& prefix) {
  if (prefix.has_parent_path()) fs::create_directories(prefix.parent_path());
  auto put = [](const fs::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write " + p.string());
    f << text;
  };
  put(fs::path(prefix.string() + ".csv"), report_csv(report));
  put(fs::path(prefix.string() + "_per_app.csv"), per_app_csv(report));
  put(fs::path(prefix.string() + "_config.json"), report.config.dump(2) + "\n");
}

std::string export_score_matrix(const std::vector<NamedSequence>& samples, const ScoringScheme& scheme) {
  if (samples.size() < 2) throw InvalidInput("score matrix needs at least 2 samples");
  std::vector<BootSequence> seqs;
  for (const auto& s : samples) {
    require_same_alphabet(samples.front().sequence, s.sequence);
    seqs.push_back(s.sequence);
  }
  const auto spans = kernels::spans_of(seqs);
  const auto scores = kernels::score_all(spans, spans, scheme);
  auto cell = [](const std::string& name) {
    if (name.find_first_of(",\"\n") == std::string::npos) return name;
    std::string q = "\"";
    for (char ch : name) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
  };
  std::ostringstream out;
  for (const auto& s : samples) out << ',' << cell(s.name);
  out << '\n';
  const std::size_t k = samples.size();
  for (std::size_t i = 0; i < k; ++i) {
    out << cell(samples[i].name);
    for (std::size_t j = 0; j < k; ++j) out << ',' << scores[i * k + j];
    out << '\n';
  }
  return out.str();
}

}  // namespace bootseq
