#include "bootseq/decision.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bootseq/ensemble.hpp"
#include "bootseq/error.hpp"

namespace bootseq {

std::string_view to_string(TestMethod method) noexcept {
  return method == TestMethod::exact_enumeration ? "exact_enumeration" : "normal_approximation";
}

std::string_view to_string(Alternative alternative) noexcept {
  return alternative == Alternative::two_sided ? "two_sided" : "less";
}

Alternative parse_alternative(std::string_view text) {
  if (text == "two_sided" || text == "two-sided") return Alternative::two_sided;
  if (text == "less") return Alternative::less;
  throw InvalidInput("unknown alternative '" + std::string(text) + "'");
}

namespace {

bool nearly_equal(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)}); }

}  // namespace

std::vector<double> signed_rank_magnitudes(std::span<const double> abs_differences) {
  const std::size_t n = abs_differences.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return abs_differences[a] < abs_differences[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && nearly_equal(abs_differences[order[j]], abs_differences[order[i]])) ++j;
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = avg;
    i = j;
  }
  return ranks;
}

double exact_p_value(std::span<const double> ranks, double w_plus, double w_minus, Alternative alternative) {
  // Counting distribution of the doubled positive-rank sum; every subset of
  // ranks is one sign assignment.
  std::vector<int> doubled;
  doubled.reserve(ranks.size());
  int total = 0;
  for (double r : ranks) {
    const double d = 2.0 * r;
    const int v = static_cast<int>(std::lround(d));
    if (std::abs(d - v) > 1e-6) throw InvalidInput("ranks must be multiples of 0.5");
    doubled.push_back(v);
    total += v;
  }
  std::vector<double> count(static_cast<std::size_t>(total) + 1, 0.0);
  count[0] = 1.0;
  int reach = 0;
  for (int v : doubled) {
    for (int s = reach; s >= 0; --s) count[static_cast<std::size_t>(s + v)] += count[static_cast<std::size_t>(s)];
    reach += v;
  }
  const double assignments = std::ldexp(1.0, static_cast<int>(ranks.size()));
  auto lower_tail = [&](double w) {
    const long limit = std::lround(2.0 * w);
    double c = 0.0;
    for (long s = 0; s <= std::min<long>(limit, total); ++s) c += count[static_cast<std::size_t>(s)];
    return c / assignments;
  };
  if (alternative == Alternative::less) return std::min(1.0, lower_tail(w_plus));
  return std::min(1.0, 2.0 * lower_tail(std::min(w_plus, w_minus)));
}

double normal_p_value(std::size_t n, double w_plus, double w_minus, Alternative alternative,
                      bool continuity_correction) {
  const double nn = static_cast<double>(n);
  const double mean = nn * (nn + 1.0) / 4.0;
  const double sd = std::sqrt(nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0);
  const double cc = continuity_correction ? 0.5 : 0.0;
  if (alternative == Alternative::less) {
    const double z = (w_plus - mean + cc) / sd;
    return std::min(1.0, 0.5 * std::erfc(-z / std::sqrt(2.0)));
  }
  const double z = (std::min(w_plus, w_minus) - mean + cc) / sd;
  return std::min(1.0, std::erfc(-z / std::sqrt(2.0)));
}

WilcoxonResult wilcoxon(std::span<const double> x, std::span<const double> y, const WilcoxonOptions& options) {
  if (x.size() != y.size()) throw InvalidInput("paired vectors differ in length");
  if (x.empty()) throw InvalidInput("paired vectors are empty");
  std::vector<double> magnitude;
  std::vector<bool> positive;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (nearly_equal(x[i], y[i])) continue;
    const double d = x[i] - y[i];
    magnitude.push_back(std::abs(d));
    positive.push_back(d > 0);
  }
  WilcoxonResult r;
  r.n_effective = magnitude.size();
  if (r.n_effective == 0) {
    r.no_evidence = true;
    r.p_value = 1.0;
    return r;
  }
  const auto ranks = signed_rank_magnitudes(magnitude);
  for (std::size_t i = 0; i < ranks.size(); ++i) (positive[i] ? r.w_plus : r.w_minus) += ranks[i];
  r.w = std::min(r.w_plus, r.w_minus);
  r.method = options.force_method.value_or(r.n_effective < options.exact_below ? TestMethod::exact_enumeration
                                                                                 : TestMethod::normal_approximation);
  r.p_value = r.method == TestMethod::exact_enumeration
                  ? exact_p_value(ranks, r.w_plus, r.w_minus, options.alternative)
                  : normal_p_value(r.n_effective, r.w_plus, r.w_minus, options.alternative,
                                   options.continuity_correction);
  return r;
}

WilcoxonResult wilcoxon(const ScoreVector& x, const ScoreVector& y, const WilcoxonOptions& options) {
  if (!x.sorted || !y.sorted) throw InvalidInput("score vectors must be sorted before pairing");
  return wilcoxon(std::span<const double>(x.values), std::span<const double>(y.values), options);
}

Verdict classify(const WilcoxonResult& result, double confidence) {
  if (!(confidence > 0.0 && confidence < 1.0)) throw InvalidInput("confidence threshold I must lie in (0, 1)");
  Verdict v;
  v.p_value = result.p_value;
  v.confidence = confidence;
  v.detail = result;
  v.label = result.p_value < confidence ? Label::malicious : Label::legitimate;
  return v;
}

nlohmann::ordered_json verdict_record(const Verdict& verdict, std::string_view app_id, std::string_view device_id) {
  nlohmann::ordered_json j;
  j["app_id"] = app_id;
  j["device_id"] = device_id;
  j["label"] = to_string(verdict.label);
  j["p_value"] = verdict.p_value;
  j["I"] = verdict.confidence;
  j["w"] = verdict.detail.w;
  j["n_effective"] = verdict.detail.n_effective;
  j["method"] = to_string(verdict.detail.method);
  return j;
}

}  // namespace bootseq
