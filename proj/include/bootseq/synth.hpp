#pragma once

// Reproducible synthetic corpora: per-app canonical boots, noisy per-device
// samples and payload-carrying variants.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bootseq/syscall_trace.hpp"

namespace bootseq::synth {

/// Fixed list of Linux syscall names used as the synthetic alphabet.
std::span<const std::string> default_syscalls();
Alphabet default_alphabet();

/// A block of the base that differs between devices. Each device sees one
/// of the variants, picked by hashing the device id.
struct JitterSite {
  std::size_t start = 0;
  std::vector<std::vector<Symbol>> variants;  // variants[0] is the base block
};

struct AppProfile {
  std::string app_id;
  std::vector<Symbol> base;  // raw, with runs; collapsed when samples are drawn
  std::vector<JitterSite> sites;
  std::uint64_t alphabet_id = 0;
  std::uint64_t seed = 0;
};

struct NoiseModel {
  double substitution_rate = 0.02;
  double insertion_rate = 0.02;
  double deletion_rate = 0.02;
  double device_jitter = 0.4;  // fraction of the base covered by jitter sites
  std::size_t jitter_block = 24;
  std::size_t jitter_variants = 2;

  void validate() const;
  static NoiseModel none() { return {0.0, 0.0, 0.0, 0.0, 24, 2}; }
};

struct PayloadSpec {
  std::vector<Symbol> payload;
  double insert_after = 0.3;  // fraction of the boot preceding the payload
};

/// Deterministic in (app_id, length, alphabet, seed, noise). Symbol 0 (UNKNOWN)
/// is never emitted. Jitter sites are laid out from `noise`.
AppProfile gen_profile(const std::string& app_id, std::size_t length, const Alphabet& alphabet,
                       std::uint64_t seed, const NoiseModel& noise = {});

/// Device variant of the base, then per-symbol deletion, substitution and
/// insertion, then preprocessing. Always labelled legitimate.
BootSequence gen_boot(const AppProfile& profile, const NoiseModel& noise, const std::string& device_id,
                      std::uint64_t sample_seed, std::size_t alphabet_size, std::size_t max_len = kDefaultMaxLen);

/// Splices the payload at floor(insert_after * |boot|) and re-preprocesses.
BootSequence inject_payload(const BootSequence& boot, const PayloadSpec& spec, std::size_t max_len = kDefaultMaxLen);

/// Random payload without adjacent repeats.
std::vector<Symbol> gen_payload(std::size_t length, std::size_t alphabet_size, std::uint64_t seed);

struct CorpusSpec {
  std::uint64_t seed = 20240611;
  std::size_t apps = 5;
  std::size_t legitimate_per_app = 30;
  std::size_t malicious_per_app = 30;
  std::size_t samples_per_device = 3;
  std::size_t profile_length = 3200;  // raw symbols before run-collapse
  std::size_t max_len = kDefaultMaxLen;
  NoiseModel noise;
  double payload_fraction = 0.2;  // of the preprocessed boot length
  double insert_after = 0.3;

  void validate() const;
  /// "small": 5 apps x 30 + 30. "full": 19 apps x 150 + 150.
  static CorpusSpec preset(const std::string& name);
  nlohmann::ordered_json to_json() const;
  static CorpusSpec from_json(const nlohmann::json& j);
};

struct AppSamples {
  std::string app_id;
  std::vector<BootSequence> legitimate;
  std::vector<BootSequence> malicious;
};

struct Corpus {
  CorpusSpec spec;
  Alphabet alphabet;
  std::vector<AppSamples> apps;
};

std::string app_name(std::size_t index);
std::string device_name(std::size_t index);

Corpus generate_corpus(const CorpusSpec& spec);

/// out/manifest.json, out/alphabet.txt, out/<app>/{legitimate,malicious}/NNN.seq
void write_corpus(const Corpus& corpus, const std::filesystem::path& out);

}  // namespace bootseq::synth
