#include "bootseq/config.hpp"

#include <fstream>
#include <set>

#include "bootseq/error.hpp"

namespace bootseq {

void Config::validate() const {
  scheme.validate();
  bagging.validate();
  if (bagging.bag_size < 2) throw InvalidInput("bag_size must be at least 2 for the leave-one-out baseline");
  if (!(confidence > 0.0 && confidence < 1.0)) throw InvalidInput("confidence must lie in (0, 1)");
  if (max_len == 0) throw InvalidInput("max_len must be at least 1");
  if (store_capacity == 0) throw InvalidInput("store capacity must be at least 1");
}

void Config::set_scheme(const std::string& spec) {
  scheme = ScoringScheme::parse(spec);
  scheme_name = spec;
}

nlohmann::ordered_json Config::to_json() const {
  nlohmann::ordered_json j;
  j["scheme"] = {{"name", scheme_name},
                 {"match", scheme.match},
                 {"mismatch", scheme.mismatch},
                 {"gap_in_test", scheme.gap_in_test},
                 {"gap_in_reference", scheme.gap_in_reference}};
  j["bagging"] = {{"bags", bagging.bags},
                  {"bag_size", bagging.bag_size},
                  {"seed", bagging.seed},
                  {"mode", to_string(bagging.mode)},
                  {"exhaustive_cap", bagging.exhaustive_cap}};
  j["baseline"] = to_string(baseline);
  j["confidence"] = confidence;
  j["alternative"] = to_string(wilcoxon.alternative);
  j["exact_below"] = wilcoxon.exact_below;
  j["continuity_correction"] = wilcoxon.continuity_correction;
  j["max_len"] = max_len;
  j["store"] = {{"path", store_path.string()}, {"capacity", store_capacity}};
  return j;
}

namespace {

void only_keys(const nlohmann::json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw InvalidInput(where + " must be an object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) throw InvalidInput("unknown key '" + key + "' in " + where);
}

}  // namespace

Config Config::from_json(const nlohmann::json& j) {
  Config c;
  try {
    only_keys(j,
              {"scheme", "bagging", "baseline", "confidence", "alternative", "exact_below", "continuity_correction",
               "max_len", "store"},
              "config");
    if (j.contains("scheme")) {
      const auto& s = j.at("scheme");
      if (s.is_string()) {
        c.set_scheme(s.get<std::string>());
      } else {
        only_keys(s, {"name", "match", "mismatch", "gap_in_test", "gap_in_reference"}, "scheme");
        if (s.contains("name")) c.set_scheme(s.at("name").get<std::string>());
        c.scheme.match = s.value("match", c.scheme.match);
        c.scheme.mismatch = s.value("mismatch", c.scheme.mismatch);
        c.scheme.gap_in_test = s.value("gap_in_test", c.scheme.gap_in_test);
        c.scheme.gap_in_reference = s.value("gap_in_reference", c.scheme.gap_in_reference);
        if (!s.contains("name") || s.size() > 1) c.scheme_name = c.scheme.describe();
      }
    }
    if (j.contains("bagging")) {
      const auto& b = j.at("bagging");
      only_keys(b, {"bags", "bag_size", "seed", "mode", "exhaustive_cap"}, "bagging");
      c.bagging.bags = b.value("bags", c.bagging.bags);
      c.bagging.bag_size = b.value("bag_size", c.bagging.bag_size);
      c.bagging.seed = b.value("seed", c.bagging.seed);
      if (b.contains("mode")) c.bagging.mode = parse_bagging_mode(b.at("mode").get<std::string>());
      c.bagging.exhaustive_cap = b.value("exhaustive_cap", c.bagging.exhaustive_cap);
    }
    if (j.contains("baseline")) c.baseline = parse_baseline_mode(j.at("baseline").get<std::string>());
    c.confidence = j.value("confidence", c.confidence);
    if (j.contains("alternative")) c.wilcoxon.alternative = parse_alternative(j.at("alternative").get<std::string>());
    c.wilcoxon.exact_below = j.value("exact_below", c.wilcoxon.exact_below);
    c.wilcoxon.continuity_correction = j.value("continuity_correction", c.wilcoxon.continuity_correction);
    c.max_len = j.value("max_len", c.max_len);
    if (j.contains("store")) {
      const auto& s = j.at("store");
      only_keys(s, {"path", "capacity"}, "store");
      if (s.contains("path")) c.store_path = s.at("path").get<std::string>();
      c.store_capacity = s.value("capacity", c.store_capacity);
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFound("cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(path.string() + ": " + e.what());
  }
  return from_json(j);
}

}  // namespace bootseq
