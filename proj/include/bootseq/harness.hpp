#pragma once

// End-to-end analysis and the evaluation harness: cross-validation, the
// confidence and length sweeps, score-matrix export and report writing.

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bootseq/config.hpp"
#include "bootseq/decision.hpp"
#include "bootseq/ensemble.hpp"
#include "bootseq/error.hpp"
#include "bootseq/synth.hpp"

namespace bootseq {

/// An error raised inside one pipeline stage; what() starts with the stage name.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what) : Error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

struct Analysis {
  Verdict verdict;
  ScoreVector test_vector;
  ScoreVector baseline;
};

/// Pool preprocessed to config.max_len, then bagged.
std::shared_ptr<const ReferenceModel> build_model(std::vector<BootSequence> pool, const Config& config);

/// Preprocess, score against the model's bags, aggregate, test and classify.
Analysis analyze(const ReferenceModel& model, BootSequence test, const Config& config);

/// Uses the store's sequences for test.app_id. Throws NotFound for an unknown app.
Analysis analyze(const ReferenceStore& store, BootSequence test, const Config& config);

/// Models per app, built on first use from a store snapshot. Invalidate after
/// writing to the store.
class ModelCache {
 public:
  ModelCache(const ReferenceStore& store, Config config) : store_(store), config_(std::move(config)) {}
  std::shared_ptr<const ReferenceModel> get(const std::string& app_id);
  void invalidate(const std::string& app_id);
  const Config& config() const noexcept { return config_; }

 private:
  const ReferenceStore& store_;
  Config config_;
  std::mutex mutex_;
  std::map<std::string, std::shared_ptr<const ReferenceModel>> models_;
};

// ---- corpora -------------------------------------------------------------

struct LabeledCorpus {
  Alphabet alphabet;
  std::vector<synth::AppSamples> apps;
  std::string fingerprint;  // hex hash over alphabet and every sequence file
};

std::string corpus_fingerprint(const Alphabet& alphabet, const std::vector<synth::AppSamples>& apps);
LabeledCorpus from_synthetic(const synth::Corpus& corpus);
/// Reads a directory written by synth::write_corpus.
LabeledCorpus load_corpus(const std::filesystem::path& dir);

// ---- evaluation ------------------------------------------------------------

struct SampleOutcome {
  std::size_t index = 0;  // position within its label list
  std::size_t group = 0;  // cross-validation group for legitimate samples
  Label truth = Label::legitimate;
  double p_value = 1.0;
};

struct AppEvaluation {
  std::string app_id;
  std::vector<SampleOutcome> legitimate;
  std::vector<SampleOutcome> malicious;
};

/// p-values for every sample at one truncation length. Legitimate samples are
/// cross-validated in three round-robin groups (sample i in group i % 3, tested
/// against a model over the other two groups). Each malicious sample is tested
/// against a model over all legitimate samples of the app.
struct CorpusEvaluation {
  std::size_t length = 0;
  std::vector<AppEvaluation> apps;
};

CorpusEvaluation evaluate(const LabeledCorpus& corpus, const Config& config, std::size_t length);

struct CrossValidationSplit {
  std::string app_id;
  std::array<std::vector<std::size_t>, 3> groups;  // sample indices of A, B, C
  std::vector<SampleOutcome> outcomes;
  double fpr = 0.0;
};

struct CrossValidationReport {
  std::vector<CrossValidationSplit> apps;
  double fpr = 0.0;
};

/// Round-robin split of the indices 0..n-1 into three groups. Needs n >= 3.
std::array<std::vector<std::size_t>, 3> round_robin_groups(std::size_t n);

CrossValidationReport cross_validate(const LabeledCorpus& corpus, const Config& config);

struct Rates {
  std::size_t tp = 0, fn = 0, fp = 0, tn = 0;
  double tpr() const noexcept { return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn); }
  double fpr() const noexcept { return fp + tn == 0 ? 0.0 : static_cast<double>(fp) / static_cast<double>(fp + tn); }
};

Rates rates_at(const AppEvaluation& app, double confidence);

struct ReportRow {
  double value = 0.0;  // the swept parameter
  Rates total;
  double tpr_max = 0.0, tpr_avg = 0.0, tpr_min = 0.0;
  double fpr_max = 0.0, fpr_avg = 0.0, fpr_min = 0.0;
  std::vector<std::pair<std::string, Rates>> per_app;
};

struct EvaluationReport {
  std::string parameter;  // "I" or "length"
  std::vector<ReportRow> rows;
  std::string corpus_fingerprint;
  nlohmann::ordered_json config;
};

ReportRow summarize(double value, const CorpusEvaluation& evaluation, double confidence);

/// 0.03 down to 4e-7, including the 0.002 and 4e-7 endpoints.
std::vector<double> default_confidence_grid();
std::vector<std::size_t> default_length_grid();

/// Rows sorted by increasing I; p-values are computed once and thresholded.
EvaluationReport confidence_report(const CorpusEvaluation& evaluation, std::vector<double> values,
                                   const std::string& fingerprint, const Config& config);
EvaluationReport sweep_confidence(const LabeledCorpus& corpus, std::vector<double> values, std::size_t length,
                                  const Config& config);
EvaluationReport sweep_length(const LabeledCorpus& corpus, std::vector<std::size_t> lengths, const Config& config);

/// Summary rows: parameter value, overall and max/avg/min rates.
std::string report_csv(const EvaluationReport& report);
/// One line per (parameter value, app).
std::string per_app_csv(const EvaluationReport& report);
/// Writes <prefix>.csv, <prefix>_per_app.csv and <prefix>_config.json.
void write_report(const EvaluationReport& report, const std::filesystem::path& prefix);

struct NamedSequence {
  std::string name;
  BootSequence sequence;
};

/// k x k CSV of score_only(row, column); header row and column carry the names.
std::string export_score_matrix(const std::vector<NamedSequence>& samples, const ScoringScheme& scheme);

}  // namespace bootseq
