#pragma once

// Batched and tiled alignment kernels. Each parallel entry point has a serial
// twin that the tests use as the reference; results must be identical for any
// thread count or schedule.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bootseq/aligner.hpp"

namespace bootseq::kernels {

using SymbolSpan = std::span<const Symbol>;

struct PairIndex {
  std::uint32_t test;
  std::uint32_t reference;
};

/// out[k] = score_only(tests[pairs[k].test], references[pairs[k].reference]).
std::vector<Score> score_pairs(std::span<const SymbolSpan> tests, std::span<const SymbolSpan> references,
                               std::span<const PairIndex> pairs, const ScoringScheme& scheme);
std::vector<Score> score_pairs_serial(std::span<const SymbolSpan> tests, std::span<const SymbolSpan> references,
                                      std::span<const PairIndex> pairs, const ScoringScheme& scheme);

/// Row-major |tests| x |references| score table.
std::vector<Score> score_all(std::span<const SymbolSpan> tests, std::span<const SymbolSpan> references,
                             const ScoringScheme& scheme);
std::vector<Score> score_all_serial(std::span<const SymbolSpan> tests, std::span<const SymbolSpan> references,
                                    const ScoringScheme& scheme);

/// One long pair, tiles swept along anti-diagonals in parallel. Uses O(m + n)
/// boundary storage. Equal to score_only for every input.
Score score_only_wavefront(SymbolSpan test, SymbolSpan reference, const ScoringScheme& scheme,
                           std::size_t tile = 256);

std::vector<SymbolSpan> spans_of(std::span<const BootSequence> sequences);

int max_threads() noexcept;

}  // namespace bootseq::kernels
