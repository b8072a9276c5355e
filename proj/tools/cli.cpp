#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "bootseq/config.hpp"
#include "bootseq/error.hpp"
#include "bootseq/harness.hpp"
#include "bootseq/service.hpp"
#include "bootseq/synth.hpp"

namespace bootseq::cli {

namespace fs = std::filesystem;

namespace {

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> max_len;
  std::optional<double> confidence;
  std::string scheme;
  std::string store;

  Config resolve() const {
    Config c = config_path.empty() ? Config{} : Config::load(config_path);
    if (seed) c.bagging.seed = *seed;
    if (max_len) c.max_len = *max_len;
    if (confidence) c.confidence = *confidence;
    if (!scheme.empty()) c.set_scheme(scheme);
    if (!store.empty()) c.store_path = store;
    c.validate();
    return c;
  }
};

Alphabet resolve_alphabet(const std::string& alphabet_path, const fs::path& store) {
  if (!alphabet_path.empty()) return Alphabet::load(alphabet_path);
  if (fs::exists(store / "alphabet.txt")) return Alphabet::load(store / "alphabet.txt");
  return synth::default_alphabet();
}

void put_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot write " + path.string());
  f << text;
}

std::vector<double> parse_doubles(const std::string& csv) {
  std::vector<double> out;
  std::istringstream in(csv);
  std::string part;
  while (std::getline(in, part, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw InvalidInput("bad number '" + part + "'");
    }
  }
  return out;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Boot-sequence malware detection by global alignment and signed-rank testing", "bootseq"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "JSON config file");
  app.add_option("--seed", g.seed, "Bagging seed (synth: corpus seed)");
  app.add_option("--max-len", g.max_len, "Truncation length after run-collapse")->check(CLI::PositiveNumber);
  app.add_option("--confidence", g.confidence, "Threshold I: malicious iff p < I");
  app.add_option("--scheme", g.scheme, "default, unit, worked-uniform or match,mismatch,gap_test,gap_ref");
  app.add_option("--store", g.store, "Reference store directory");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Convert an strace log into a sequence file");
  std::string trace, ingest_out, app_id, device_id = "unknown", label = "unknown", alphabet_path;
  bool strict = false;
  ingest->add_option("trace", trace, "strace log ('-' for stdin)")->required();
  ingest->add_option("-o,--out", ingest_out, "Output sequence file")->required();
  ingest->add_option("--app", app_id, "Application id")->required();
  ingest->add_option("--device", device_id, "Device id");
  ingest->add_option("--label", label, "legitimate, malicious or unknown");
  ingest->add_option("--alphabet", alphabet_path, "Alphabet file (default: the store's, else built-in)");
  ingest->add_flag("--strict", strict, "Fail on the first malformed line");

  // store
  auto* store_cmd = app.add_subcommand("store", "Manage the reference store");
  store_cmd->require_subcommand(1);
  auto* store_add = store_cmd->add_subcommand("add", "Add verified legitimate sequences");
  std::vector<std::string> add_files;
  bool verified = false;
  store_add->add_option("files", add_files, "Sequence files")->required();
  store_add->add_flag("--verified", verified, "Confirm the sequences come from verified clean runs");
  store_add->add_option("--alphabet", alphabet_path, "Alphabet for a new store");
  auto* store_list = store_cmd->add_subcommand("list", "Print apps and sample counts");

  // analyze
  auto* analyze_cmd = app.add_subcommand("analyze", "Classify one sequence file against the store");
  std::string test_file, dump_path;
  analyze_cmd->add_option("sequence", test_file, "Sequence file")->required();
  analyze_cmd->add_option("--app", app_id, "Override the app id from the file header");
  analyze_cmd->add_option("--dump-vectors", dump_path, "Write the test and baseline score vectors as JSON");

  // evaluation
  std::string corpus_dir, out_prefix, values_csv;
  std::size_t length = 1000;
  auto* cv = app.add_subcommand("cross-validate", "Three-group cross-validation of legitimate samples");
  cv->add_option("--corpus", corpus_dir, "Corpus directory")->required();
  cv->add_option("-o,--out", out_prefix, "Write <out>.csv with per-sample outcomes");

  auto* sc = app.add_subcommand("sweep-confidence", "TPR/FPR over a grid of thresholds I");
  sc->add_option("--corpus", corpus_dir, "Corpus directory")->required();
  sc->add_option("--values", values_csv, "Comma-separated I values (default grid 0.03 .. 4e-7)");
  sc->add_option("--length", length, "Truncation length")->check(CLI::PositiveNumber);
  sc->add_option("-o,--out", out_prefix, "Report prefix")->required();

  auto* sl = app.add_subcommand("sweep-length", "TPR/FPR over truncation lengths");
  std::string lengths_csv;
  sl->add_option("--corpus", corpus_dir, "Corpus directory")->required();
  sl->add_option("--lengths", lengths_csv, "Comma-separated lengths (default 50 .. 2500)");
  sl->add_option("-o,--out", out_prefix, "Report prefix")->required();

  auto* em = app.add_subcommand("export-matrix", "Pairwise score matrix as CSV");
  std::vector<std::string> matrix_files;
  std::string matrix_out, matrix_label = "legitimate";
  std::size_t limit = 0;
  em->add_option("files", matrix_files, "Sequence files");
  em->add_option("--corpus", corpus_dir, "Take samples from a corpus instead");
  em->add_option("--app", app_id, "App within the corpus");
  em->add_option("--label", matrix_label, "legitimate, malicious or both");
  em->add_option("--limit", limit, "Use at most this many corpus samples per label");
  em->add_option("--alphabet", alphabet_path, "Alphabet for sequence files");
  em->add_option("-o,--out", matrix_out, "Output CSV (default stdout)");

  auto* sy = app.add_subcommand("synth", "Generate a synthetic corpus");
  std::string preset = "small", synth_out;
  sy->add_option("--preset", preset, "small or full");
  sy->add_option("-o,--out", synth_out, "Output directory")->required();

  auto* serve = app.add_subcommand("serve", "Run the analysis service");
  std::string host = "127.0.0.1";
  int port = 8080;
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port");

  std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    const Config config = g.resolve();

    if (ingest->parsed()) {
      const Alphabet alphabet = resolve_alphabet(alphabet_path, config.store_path);
      ParseResult parsed;
      if (trace == "-") {
        parsed = parse_strace(std::cin, {strict});
      } else {
        std::ifstream in(trace);
        if (!in) throw NotFound("cannot open " + trace);
        parsed = parse_strace(in, {strict});
      }
      auto enc = encode(parsed.events, alphabet);
      enc.sequence.app_id = app_id;
      enc.sequence.device_id = device_id;
      enc.sequence.label = parse_label(label);
      const auto seq = preprocess(std::move(enc.sequence), config.max_len);
      save_sequence(ingest_out, seq, alphabet);
      const auto& d = parsed.diagnostics;
      err << "lines=" << d.lines << " events=" << d.events << " skipped=" << d.skipped() << " blank=" << d.blank
          << " malformed=" << d.malformed << " unknown_names=" << enc.unknown_names << " length=" << seq.size()
          << '\n';
      return kLegitimate;
    }

    if (store_add->parsed()) {
      const Alphabet alphabet = resolve_alphabet(alphabet_path, config.store_path);
      auto store = ReferenceStore::open_or_create(config.store_path, alphabet, config.store_capacity);
      std::size_t evicted = 0;
      for (const auto& f : add_files) {
        auto seq = load_sequence(f, store->alphabet()).sequence;
        evicted += store->add(preprocess(std::move(seq), config.max_len), verified);
      }
      err << "added " << add_files.size() << ", evicted " << evicted << '\n';
      return kLegitimate;
    }

    if (store_list->parsed()) {
      auto store = ReferenceStore::load(config.store_path);
      for (const auto& a : store->apps()) out << a << ',' << store->size(a) << '\n';
      return kLegitimate;
    }

    if (analyze_cmd->parsed()) {
      auto store = ReferenceStore::load(config.store_path);
      auto seq = load_sequence(test_file, store->alphabet()).sequence;
      if (!app_id.empty()) seq.app_id = app_id;
      if (!store->contains(seq.app_id)) {
        err << "bootseq: no reference sequences for app '" << seq.app_id << "'\n";
        return kUnknownApp;
      }
      const std::string app = seq.app_id, device = seq.device_id;
      const auto a = analyze(*store, std::move(seq), config);
      if (!dump_path.empty())
        put_file(dump_path, nlohmann::ordered_json{{"test", a.test_vector.values}, {"baseline", a.baseline.values}}
                                    .dump(2) + "\n");
      out << verdict_record(a.verdict, app, device).dump() << '\n';
      return a.verdict.label == Label::malicious ? kMalicious : kLegitimate;
    }

    if (cv->parsed()) {
      const auto corpus = load_corpus(corpus_dir);
      const auto report = cross_validate(corpus, config);
      std::ostringstream csv;
      csv << "app_id,index,group,p_value,label\n";
      for (const auto& s : report.apps)
        for (const auto& o : s.outcomes) {
          char p[32];
          std::snprintf(p, sizeof p, "%.17g", o.p_value);
          csv << s.app_id << ',' << o.index << ',' << "ABC"[o.group] << ',' << p << ','
              << (o.p_value < config.confidence ? "malicious" : "legitimate") << '\n';
        }
      if (!out_prefix.empty()) put_file(out_prefix + ".csv", csv.str());
      for (const auto& s : report.apps) out << s.app_id << " fpr=" << s.fpr << '\n';
      out << "overall fpr=" << report.fpr << '\n';
      return kLegitimate;
    }

    if (sc->parsed()) {
      const auto corpus = load_corpus(corpus_dir);
      auto values = values_csv.empty() ? default_confidence_grid() : parse_doubles(values_csv);
      const auto report = sweep_confidence(corpus, std::move(values), length, config);
      write_report(report, out_prefix);
      out << report_csv(report);
      return kLegitimate;
    }

    if (sl->parsed()) {
      const auto corpus = load_corpus(corpus_dir);
      std::vector<std::size_t> lengths;
      if (lengths_csv.empty()) {
        lengths = default_length_grid();
      } else {
        for (double v : parse_doubles(lengths_csv)) {
          if (v < 1 || v != static_cast<double>(static_cast<std::size_t>(v)))
            throw InvalidInput("lengths must be positive integers");
          lengths.push_back(static_cast<std::size_t>(v));
        }
      }
      const auto report = sweep_length(corpus, std::move(lengths), config);
      write_report(report, out_prefix);
      out << report_csv(report);
      return kLegitimate;
    }

    if (em->parsed()) {
      std::vector<NamedSequence> samples;
      if (!corpus_dir.empty()) {
        const auto corpus = load_corpus(corpus_dir);
        auto it = std::find_if(corpus.apps.begin(), corpus.apps.end(), [&](auto& a) { return a.app_id == app_id; });
        if (it == corpus.apps.end()) throw NotFound("no app '" + app_id + "' in corpus");
        auto take = [&](const std::vector<BootSequence>& seqs, const char* name) {
          const std::size_t k = limit == 0 ? seqs.size() : std::min(limit, seqs.size());
          for (std::size_t i = 0; i < k; ++i) {
            char id[64];
            std::snprintf(id, sizeof id, "%s/%s/%03zu", app_id.c_str(), name, i);
            samples.push_back({id, preprocess(seqs[i], config.max_len)});
          }
        };
        if (matrix_label == "legitimate" || matrix_label == "both") take(it->legitimate, "legitimate");
        if (matrix_label == "malicious" || matrix_label == "both") take(it->malicious, "malicious");
      } else {
        const Alphabet alphabet = resolve_alphabet(alphabet_path, config.store_path);
        for (const auto& f : matrix_files)
          samples.push_back({fs::path(f).stem().string(),
                             preprocess(load_sequence(f, alphabet).sequence, config.max_len)});
      }
      const auto csv = export_score_matrix(samples, config.scheme);
      if (matrix_out.empty())
        out << csv;
      else
        put_file(matrix_out, csv);
      return kLegitimate;
    }

    if (sy->parsed()) {
      auto spec = synth::CorpusSpec::preset(preset);
      if (g.seed) spec.seed = *g.seed;
      if (g.max_len) spec.max_len = *g.max_len;
      const auto corpus = synth::generate_corpus(spec);
      synth::write_corpus(corpus, synth_out);
      out << "wrote " << corpus.apps.size() << " apps to " << synth_out << " fingerprint "
          << from_synthetic(corpus).fingerprint << '\n';
      return kLegitimate;
    }

    if (serve->parsed()) {
      auto store = ReferenceStore::load(config.store_path);
      AnalysisService service(*store, config);
      err << "listening on " << host << ':' << port << '\n';
      if (!service.listen(host, port)) throw Error("cannot bind " + host + ":" + std::to_string(port));
      return kLegitimate;
    }
  } catch (const std::exception& e) {
    err << "bootseq: " << e.what() << '\n';
    return kError;
  }
  return kUsage;
}

}  // namespace bootseq::cli
