#pragma once

// Run configuration shared by the CLI, the harness and the service.

#include <cstddef>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "bootseq/aligner.hpp"
#include "bootseq/decision.hpp"
#include "bootseq/ensemble.hpp"

namespace bootseq {

struct Config {
  std::string scheme_name = "default";
  ScoringScheme scheme;
  BaggingPlan bagging;
  BaselineMode baseline = BaselineMode::per_bag;
  WilcoxonOptions wilcoxon;
  double confidence = kDefaultConfidence;
  std::size_t max_len = kDefaultMaxLen;
  std::filesystem::path store_path = "store";
  std::size_t store_capacity = kDefaultStoreCapacity;

  void validate() const;
  void set_scheme(const std::string& spec);

  nlohmann::ordered_json to_json() const;
  /// Missing keys keep their defaults; unknown keys are rejected.
  static Config from_json(const nlohmann::json& j);
  static Config load(const std::filesystem::path& path);
};

}  // namespace bootseq
