#include <gtest/gtest.h>

#include <random>

#include "bootseq/kernels.hpp"

using namespace bootseq;

namespace {

std::vector<std::vector<Symbol>> random_set(std::mt19937& g, std::size_t count, std::size_t max_len) {
  std::vector<std::vector<Symbol>> out(count);
  for (auto& s : out) {
    s.resize(g() % (max_len + 1));
    for (auto& v : s) v = static_cast<Symbol>(1 + g() % 9);
  }
  return out;
}

std::vector<kernels::SymbolSpan> spans(const std::vector<std::vector<Symbol>>& v) {
  return {v.begin(), v.end()};
}

}  // namespace

TEST(Kernels, PairsMatchSerial) {
  std::mt19937 g(5);
  auto tests = random_set(g, 12, 120), refs = random_set(g, 9, 120);
  std::vector<kernels::PairIndex> pairs;
  for (int k = 0; k < 200; ++k) pairs.push_back({static_cast<std::uint32_t>(g() % 12), static_cast<std::uint32_t>(g() % 9)});
  auto ts = spans(tests), rs = spans(refs);
  ScoringScheme s;
  auto par = kernels::score_pairs(ts, rs, pairs, s);
  EXPECT_EQ(par, kernels::score_pairs_serial(ts, rs, pairs, s));
  for (std::size_t k = 0; k < pairs.size(); ++k)
    EXPECT_EQ(par[k], score_only(tests[pairs[k].test], refs[pairs[k].reference], s));
}

TEST(Kernels, AllMatchSerial) {
  std::mt19937 g(6);
  auto tests = random_set(g, 7, 80), refs = random_set(g, 5, 80);
  auto ts = spans(tests), rs = spans(refs);
  ScoringScheme s{2, -1, -3, -2, nullptr};
  auto all = kernels::score_all(ts, rs, s);
  ASSERT_EQ(all.size(), 35u);
  EXPECT_EQ(all, kernels::score_all_serial(ts, rs, s));
  EXPECT_EQ(all[3 * 5 + 4], score_only(tests[3], refs[4], s));
}

TEST(Kernels, WavefrontEqualsScoreOnly) {
  std::mt19937 g(7);
  for (int t = 0; t < 60; ++t) {
    auto pair = random_set(g, 2, 700);
    const std::size_t tile = 1 + g() % 200;
    ScoringScheme s{static_cast<int>(1 + g() % 3), -static_cast<int>(g() % 2), -static_cast<int>(g() % 4),
                    -static_cast<int>(g() % 4), nullptr};
    EXPECT_EQ(kernels::score_only_wavefront(pair[0], pair[1], s, tile), score_only(pair[0], pair[1], s))
        << "tile " << tile;
  }
}

TEST(Kernels, EmptyBatch) {
  std::vector<kernels::SymbolSpan> none;
  std::vector<kernels::PairIndex> pairs;
  EXPECT_TRUE(kernels::score_pairs(none, none, pairs, ScoringScheme{}).empty());
  EXPECT_GE(kernels::max_threads(), 1);
}
