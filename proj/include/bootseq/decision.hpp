#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "bootseq/syscall_trace.hpp"

namespace bootseq {

struct ScoreVector;

enum class TestMethod { exact_enumeration, normal_approximation };

// two_sided: any difference. less: x systematically below y (test scores
// lower than the legitimate baseline).
enum class Alternative { two_sided, less };

std::string_view to_string(TestMethod method) noexcept;
std::string_view to_string(Alternative alternative) noexcept;
Alternative parse_alternative(std::string_view text);

struct WilcoxonOptions {
  Alternative alternative = Alternative::two_sided;
  std::size_t exact_below = 20;  // exact distribution when n_effective < this
  bool continuity_correction = true;
  std::optional<TestMethod> force_method;
};

struct WilcoxonResult {
  double w_plus = 0.0;
  double w_minus = 0.0;
  double w = 0.0;  // min(w_plus, w_minus)
  std::size_t n_effective = 0;
  double p_value = 1.0;
  TestMethod method = TestMethod::exact_enumeration;
  bool no_evidence = false;  // every difference was zero
};

/// Average ranks (1-based) of |d|, ties within a relative 1e-9 share a rank.
std::vector<double> signed_rank_magnitudes(std::span<const double> abs_differences);

/// P-value from the exact null distribution of W+ over all 2^n sign flips of
/// the given ranks. Ranks must be multiples of 0.5.
double exact_p_value(std::span<const double> ranks, double w_plus, double w_minus, Alternative alternative);

double normal_p_value(std::size_t n, double w_plus, double w_minus, Alternative alternative,
                      bool continuity_correction);

/// Paired signed-rank test on d_i = x_i - y_i.
WilcoxonResult wilcoxon(std::span<const double> x, std::span<const double> y, const WilcoxonOptions& options = {});
/// Both vectors must be sorted; pairing is positional.
WilcoxonResult wilcoxon(const ScoreVector& x, const ScoreVector& y, const WilcoxonOptions& options = {});

struct Verdict {
  Label label = Label::legitimate;
  double p_value = 1.0;
  double confidence = 0.001;  // threshold I
  WilcoxonResult detail;
};

inline constexpr double kDefaultConfidence = 0.001;

/// malicious iff p < I, with 0 < I < 1.
Verdict classify(const WilcoxonResult& result, double confidence);

/// {app_id, device_id, label, p_value, I, w, n_effective, method}
nlohmann::ordered_json verdict_record(const Verdict& verdict, std::string_view app_id, std::string_view device_id);

}  // namespace bootseq
