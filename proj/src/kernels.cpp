#include "bootseq/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <limits>

#include "bootseq/detail/substitution.hpp"
#include "bootseq/error.hpp"

namespace bootseq::kernels {

namespace {

void check_pairs(std::span<const SymbolSpan> tests, std::span<const SymbolSpan> references,
                 std::span<const PairIndex> pairs) {
  for (const auto& p : pairs)
    if (p.test >= tests.size() || p.reference >= references.size())
      throw InvalidInput("pair index outside sequence list");
}

}  // namespace

int max_threads() noexcept { return omp_get_max_threads(); }

std::vector<SymbolSpan> spans_of(std::span<const BootSequence> sequences) {
  std::vector<SymbolSpan> out;
  out.reserve(sequences.size());
  for (const auto& s : sequences) out.emplace_back(s.symbols);
  return out;
}

std::vector<Score> score_pairs_serial(std::span<const SymbolSpan> tests, std::span<const SymbolSpan> references,
                                      std::span<const PairIndex> pairs, const ScoringScheme& scheme) {
  check_pairs(tests, references, pairs);
  AlignWorkspace ws;
  std::vector<Score> out(pairs.size());
  for (std::size_t k = 0; k < pairs.size(); ++k)
    out[k] = score_only(tests[pairs[k].test], references[pairs[k].reference], scheme, ws);
  return out;
}

std::vector<Score> score_pairs(std::span<const SymbolSpan> tests, std::span<const SymbolSpan> references,
                               std::span<const PairIndex> pairs, const ScoringScheme& scheme) {
  check_pairs(tests, references, pairs);
  scheme.validate();
  std::vector<Score> out(pairs.size());
  const auto count = static_cast<std::int64_t>(pairs.size());
  // Exceptions cannot cross the parallel region; inputs were validated above
  // and score_only only throws on invalid input.
#pragma omp parallel
  {
    AlignWorkspace ws;
#pragma omp for schedule(dynamic, 4)
    for (std::int64_t k = 0; k < count; ++k) {
      const auto& p = pairs[static_cast<std::size_t>(k)];
      out[static_cast<std::size_t>(k)] = score_only(tests[p.test], references[p.reference], scheme, ws);
    }
  }
  return out;
}

namespace {

std::vector<PairIndex> all_pairs(std::size_t tests, std::size_t references) {
  std::vector<PairIndex> pairs;
  pairs.reserve(tests * references);
  for (std::uint32_t i = 0; i < tests; ++i)
    for (std::uint32_t j = 0; j < references; ++j) pairs.push_back({i, j});
  return pairs;
}

}  // namespace

std::vector<Score> score_all(std::span<const SymbolSpan> tests, std::span<const SymbolSpan> references,
                             const ScoringScheme& scheme) {
  auto pairs = all_pairs(tests.size(), references.size());
  return score_pairs(tests, references, pairs, scheme);
}

std::vector<Score> score_all_serial(std::span<const SymbolSpan> tests, std::span<const SymbolSpan> references,
                                    const ScoringScheme& scheme) {
  auto pairs = all_pairs(tests.size(), references.size());
  return score_pairs_serial(tests, references, pairs, scheme);
}

namespace {

// Tile (I, J) covers rows (i0, i1] and columns (j0, j1]. On entry top[j0+1..j1]
// holds F(i0, j), left[i0+1..i1] holds F(i, j0) and corner[I] holds F(i0, j0).
// On exit they hold the values the tiles below and to the right need.
template <class Sub>
void sweep_tile(SymbolSpan test, SymbolSpan reference, const ScoringScheme& scheme, Sub sub, std::size_t i0,
                std::size_t i1, std::size_t j0, std::size_t j1, std::span<Score> top, std::span<Score> left,
                Score& corner, std::vector<Score>& buf) {
  const std::size_t w = j1 - j0;
  buf.resize(w + 1);
  buf[0] = corner;
  std::copy(top.begin() + static_cast<std::ptrdiff_t>(j0 + 1), top.begin() + static_cast<std::ptrdiff_t>(j1 + 1),
            buf.begin() + 1);
  const int up_gap = scheme.gap_in_reference;
  const int left_gap = scheme.gap_in_test;
  for (std::size_t i = i0 + 1; i <= i1; ++i) {
    const Symbol a = test[i - 1];
    Score diag = buf[0];
    Score lft = left[i];
    buf[0] = lft;
    for (std::size_t k = 1; k <= w; ++k) {
      const Score up = buf[k];
      Score v = diag + sub(a, reference[j0 + k - 1]);
      v = std::max(v, up + up_gap);
      v = std::max(v, lft + left_gap);
      diag = up;
      buf[k] = v;
      lft = v;
    }
    left[i] = buf[w];
  }
  corner = top[j1];  // F(i0, j1): corner of the next tile in this tile row
  std::copy(buf.begin() + 1, buf.end(), top.begin() + static_cast<std::ptrdiff_t>(j0 + 1));
}

}  // namespace

Score score_only_wavefront(SymbolSpan test, SymbolSpan reference, const ScoringScheme& scheme,
                           std::size_t tile) {
  if (tile == 0) throw InvalidInput("tile size must be positive");
  const std::size_t m = test.size();
  const std::size_t n = reference.size();
  if (m == 0 || n == 0 || (m <= tile && n <= tile)) return score_only(test, reference, scheme);
  scheme.validate();
  if (scheme.similarity) {
    const auto dim = scheme.similarity->dim();
    auto outside = [dim](Symbol s) { return s >= dim; };
    if (std::any_of(test.begin(), test.end(), outside) || std::any_of(reference.begin(), reference.end(), outside))
      throw InvalidInput("symbol outside similarity table");
  }
  if (static_cast<unsigned long long>(m + n) * static_cast<unsigned long long>(scheme.max_abs()) >=
      static_cast<unsigned long long>(std::numeric_limits<Score>::max()))
    throw InvalidInput("alignment score could overflow 32-bit range");

  const std::size_t row_tiles = (m + tile - 1) / tile;
  const std::size_t col_tiles = (n + tile - 1) / tile;
  std::vector<Score> top(n + 1);
  std::vector<Score> left(m + 1);
  std::vector<Score> corner(row_tiles);
  for (std::size_t j = 0; j <= n; ++j) top[j] = static_cast<Score>(j) * scheme.gap_in_test;
  for (std::size_t i = 0; i <= m; ++i) left[i] = static_cast<Score>(i) * scheme.gap_in_reference;
  for (std::size_t t = 0; t < row_tiles; ++t) corner[t] = left[t * tile];

  detail::with_substitution(scheme, false, [&](auto sub) {
#pragma omp parallel
    {
      std::vector<Score> buf;
      for (std::size_t wave = 0; wave < row_tiles + col_tiles - 1; ++wave) {
        const std::size_t first = wave >= col_tiles ? wave - col_tiles + 1 : 0;
        const std::size_t last = std::min(wave, row_tiles - 1);
        const auto lo = static_cast<std::int64_t>(first);
        const auto hi = static_cast<std::int64_t>(last);
#pragma omp for schedule(static)
        for (std::int64_t ti = lo; ti <= hi; ++ti) {
          const auto tr = static_cast<std::size_t>(ti);
          const std::size_t tc = wave - tr;
          const std::size_t i0 = tr * tile;
          const std::size_t j0 = tc * tile;
          sweep_tile(test, reference, scheme, sub, i0, std::min(m, i0 + tile), j0, std::min(n, j0 + tile), top,
                     left, corner[tr], buf);
        }
      }
    }
    return 0;
  });
  return top[n];
}

}  // namespace bootseq::kernels
