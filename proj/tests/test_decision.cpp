#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "bootseq/decision.hpp"
#include "bootseq/ensemble.hpp"
#include "bootseq/error.hpp"
#include "oracles/brute_wilcoxon.hpp"

using namespace bootseq;

namespace {

WilcoxonResult on_differences(const std::vector<double>& d, WilcoxonOptions o = {}) {
  std::vector<double> zero(d.size(), 0.0);
  return wilcoxon(d, zero, o);
}

}  // namespace

TEST(Wilcoxon, EqualVectorsGiveNoEvidence) {
  std::vector<double> x = {1, 2, 3, 4};
  auto r = wilcoxon(x, x);
  EXPECT_EQ(r.n_effective, 0u);
  EXPECT_DOUBLE_EQ(r.p_value, 1.0);
  EXPECT_TRUE(r.no_evidence);
}

TEST(Wilcoxon, AllPositiveFive) {
  auto r = on_differences({1, 2, 3, 4, 5});
  EXPECT_DOUBLE_EQ(r.w_minus, 0.0);
  EXPECT_DOUBLE_EQ(r.w, 0.0);
  EXPECT_EQ(r.method, TestMethod::exact_enumeration);
  EXPECT_DOUBLE_EQ(r.p_value, 2.0 / 32.0);
}

TEST(Wilcoxon, TenWithWEight) {
  // Ranks 1,2,5 negative: W- = 8.
  auto r = on_differences({-1, -2, 3, 4, -5, 6, 7, 8, 9, 10});
  EXPECT_DOUBLE_EQ(r.w, 8.0);
  EXPECT_LE(r.p_value, 0.05);
  EXPECT_NEAR(r.p_value, oracle::enumerate({-1, -2, 3, 4, -5, 6, 7, 8, 9, 10}).p_two_sided, 1e-12);
}

TEST(Wilcoxon, LengthMismatch) {
  std::vector<double> a = {1, 2}, b = {1};
  EXPECT_THROW(wilcoxon(a, b), InvalidInput);
}

TEST(Wilcoxon, MatchesEnumerationOracle) {
  std::mt19937 g(9);
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 1 + g() % 14;
    std::vector<double> d(n);
    for (auto& v : d) {
      do v = static_cast<int>(g() % 13) - 6;  // small integers force ties
      while (v == 0);
    }
    const auto want = oracle::enumerate(d);
    const auto got = on_differences(d);
    EXPECT_DOUBLE_EQ(got.w_plus, want.w_plus);
    EXPECT_DOUBLE_EQ(got.w_minus, want.w_minus);
    EXPECT_NEAR(got.p_value, want.p_two_sided, 1e-12);
    WilcoxonOptions less;
    less.alternative = Alternative::less;
    EXPECT_NEAR(on_differences(d, less).p_value, want.p_less, 1e-12);
  }
}

TEST(Wilcoxon, ZerosAreDropped) {
  auto with = on_differences({0, 0, 1, 2, -3});
  auto without = on_differences({1, 2, -3});
  EXPECT_EQ(with.n_effective, 3u);
  EXPECT_DOUBLE_EQ(with.p_value, without.p_value);
}

TEST(Wilcoxon, SwapAndShiftInvariance) {
  std::mt19937 g(10);
  std::normal_distribution<double> nd(0.0, 3.0);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + g() % 30;
    std::vector<double> x(n), y(n), xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = std::round(nd(g));
      y[i] = std::round(nd(g));
      xs[i] = x[i] + 100.0;
      ys[i] = y[i] + 100.0;
    }
    auto a = wilcoxon(x, y), b = wilcoxon(y, x), c = wilcoxon(xs, ys);
    EXPECT_DOUBLE_EQ(a.w_plus, b.w_minus);
    EXPECT_NEAR(a.p_value, b.p_value, 1e-12);
    EXPECT_NEAR(a.p_value, c.p_value, 1e-12);
    EXPECT_GE(a.p_value, 0.0);
    EXPECT_LE(a.p_value, 1.0);
  }
}

TEST(Wilcoxon, NormalApproximationAboveThreshold) {
  std::vector<double> d(25);
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = static_cast<double>(i + 1) * (i % 4 == 0 ? -1 : 1);
  auto r = on_differences(d);
  EXPECT_EQ(r.method, TestMethod::normal_approximation);
  const double n = 25, mu = n * (n + 1) / 4, sigma = std::sqrt(n * (n + 1) * (2 * n + 1) / 24);
  const double z = (std::abs(r.w - mu) - 0.5) / sigma;
  EXPECT_NEAR(r.p_value, std::erfc(z / std::sqrt(2.0)), 1e-12);
}

TEST(Wilcoxon, NormalCloseToExactMidRange) {
  std::mt19937 g(12);
  for (std::size_t n = 12; n < 20; ++n) {
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = static_cast<double>(i + 1) * (g() % 3 == 0 ? -1 : 1);
    WilcoxonOptions normal;
    normal.force_method = TestMethod::normal_approximation;
    EXPECT_NEAR(on_differences(d).p_value, on_differences(d, normal).p_value, 0.02) << n;
  }
}

TEST(Wilcoxon, ScoreVectorOverloadNeedsSorted) {
  ScoreVector a{{1, 2, 3}, true}, b{{3, 2, 1}, false};
  EXPECT_THROW(wilcoxon(a, b), InvalidInput);
  ScoreVector c{{0, 1, 1}, true};
  EXPECT_NO_THROW(wilcoxon(a, c));
}

TEST(Ranks, AverageTies) {
  std::vector<double> m = {3, 1, 3, 2};
  EXPECT_EQ(signed_rank_magnitudes(m), (std::vector<double>{3.5, 1, 3.5, 2}));
}

TEST(Classify, Rule) {
  WilcoxonResult r;
  r.p_value = 0.0005;
  EXPECT_EQ(classify(r, 0.001).label, Label::malicious);
  r.p_value = 0.5;
  EXPECT_EQ(classify(r, 0.001).label, Label::legitimate);
  r.p_value = 0.001;
  EXPECT_EQ(classify(r, 0.001).label, Label::legitimate);
  EXPECT_THROW(classify(r, 0.0), InvalidInput);
  EXPECT_THROW(classify(r, 1.0), InvalidInput);
  EXPECT_THROW(classify(r, std::nan("")), InvalidInput);
}

TEST(Classify, MonotoneInConfidence) {
  WilcoxonResult r;
  r.p_value = 0.004;
  bool seen_malicious = false;
  for (double i : {1e-6, 1e-4, 1e-3, 5e-3, 1e-2, 0.5}) {
    const bool mal = classify(r, i).label == Label::malicious;
    EXPECT_TRUE(!seen_malicious || mal);
    seen_malicious = seen_malicious || mal;
  }
  EXPECT_TRUE(seen_malicious);
}

TEST(Verdict, Record) {
  WilcoxonResult r;
  r.p_value = 0.25;
  r.n_effective = 7;
  auto j = verdict_record(classify(r, 0.01), "app", "dev");
  EXPECT_EQ(j["app_id"], "app");
  EXPECT_EQ(j["label"], "legitimate");
  EXPECT_EQ(j["n_effective"], 7);
  EXPECT_DOUBLE_EQ(j["I"].get<double>(), 0.01);
}
