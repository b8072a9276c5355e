#pragma once

// Global (Needleman-Wunsch) alignment of a test sequence (matrix rows) against
// a reference sequence (matrix columns) with role-specific linear gap costs.
//
//   F(0, j) = j * gap_in_test          F(i, 0) = i * gap_in_reference
//   F(i, j) = max{ F(i-1, j)   + gap_in_reference,   test symbol vs gap
//                  F(i, j-1)   + gap_in_test,        reference symbol vs gap
//                  F(i-1, j-1) + S(test_i, ref_j) }

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bootseq/syscall_trace.hpp"

namespace bootseq {

using Score = std::int32_t;

/// Dense per-pair substitution scores, indexed [test symbol][reference symbol].
class SimilarityTable {
 public:
  SimilarityTable(std::size_t dim, int match, int mismatch);

  std::size_t dim() const noexcept { return dim_; }
  int at(Symbol test, Symbol reference) const noexcept { return cells_[test * dim_ + reference]; }
  void set(Symbol test, Symbol reference, int value);
  void set_symmetric(Symbol a, Symbol b, int value);
  SimilarityTable transposed() const;
  const int* data() const noexcept { return cells_.data(); }
  int max_abs() const noexcept;

 private:
  std::size_t dim_;
  std::vector<int> cells_;
};

struct ScoringScheme {
  int match = 1;
  int mismatch = 0;
  int gap_in_test = -2;
  int gap_in_reference = -3;
  // Optional per-pair override of match/mismatch. Only the worked-example
  // preset uses one; operational schemes are uniform.
  std::shared_ptr<const SimilarityTable> similarity;

  void validate() const;
  int substitution(Symbol test, Symbol reference) const noexcept {
    if (similarity) return similarity->at(test, reference);
    return test == reference ? match : mismatch;
  }
  /// Scheme for the transposed problem: align(b, a, swapped) == align(a, b, *this).
  ScoringScheme swapped_roles() const;
  int max_abs() const noexcept;
  std::string describe() const;

  static ScoringScheme standard() { return {}; }
  /// +1 per match, nothing else scored.
  static ScoringScheme unit_match() { return {1, 0, 0, 0, nullptr}; }
  /// Uniform part of the worked-example scheme: match +6, mismatch -2, gaps -8.
  static ScoringScheme worked_example_uniform() { return {6, -2, -8, -8, nullptr}; }
  /// Parses "default", "unit", "worked-uniform" or "match,mismatch,gap_test,gap_ref".
  static ScoringScheme parse(const std::string& spec);
};

/// Scheme for the 7 x 10 worked example (ABCDEBE against DEBFBCFDEE): the
/// uniform +6/-2/-8 scheme with per-pair values solved from its table.
/// Requires an alphabet containing A..F.
ScoringScheme worked_example_scheme(const Alphabet& alphabet);

struct AlignmentResult {
  Score score = 0;
  std::vector<Symbol> aligned_test;       // kGap marks a gap
  std::vector<Symbol> aligned_reference;  // kGap marks a gap
};

/// Row-major (m+1) x (n+1) DP table.
struct DpMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Score> cells;

  Score at(std::size_t i, std::size_t j) const noexcept { return cells[i * cols + j]; }
};

struct AlignOptions {
  std::size_t max_cells = std::size_t{1} << 27;
};

/// Reusable score-only scratch. peak_cells() reports the largest row buffer
/// ever requested, which is min(m, n) + 1 per call.
class AlignWorkspace {
 public:
  std::span<Score> row(std::size_t cells);
  std::size_t peak_cells() const noexcept { return peak_; }

 private:
  std::vector<Score> row_;
  std::size_t peak_ = 0;
};

DpMatrix fill_matrix(std::span<const Symbol> test, std::span<const Symbol> reference,
                     const ScoringScheme& scheme, const AlignOptions& options = {});

/// Full matrix plus traceback from F(m, n); ties prefer diagonal, then up, then left.
AlignmentResult traceback(const DpMatrix& matrix, std::span<const Symbol> test,
                          std::span<const Symbol> reference, const ScoringScheme& scheme);

AlignmentResult align(std::span<const Symbol> test, std::span<const Symbol> reference,
                      const ScoringScheme& scheme, const AlignOptions& options = {});
AlignmentResult align(const BootSequence& test, const BootSequence& reference,
                      const ScoringScheme& scheme, const AlignOptions& options = {});

/// F(m, n) with two rolling rows over the shorter sequence.
Score score_only(std::span<const Symbol> test, std::span<const Symbol> reference,
                 const ScoringScheme& scheme, AlignWorkspace& workspace);
Score score_only(std::span<const Symbol> test, std::span<const Symbol> reference,
                 const ScoringScheme& scheme);
Score score_only(const BootSequence& test, const BootSequence& reference, const ScoringScheme& scheme);

/// Column-wise score of an explicit alignment.
Score rescore_alignment(std::span<const Symbol> aligned_test, std::span<const Symbol> aligned_reference,
                        const ScoringScheme& scheme);

/// CSV dump of F: header row of reference symbols, header column of test symbols.
std::string matrix_csv(const DpMatrix& matrix, std::span<const Symbol> test,
                       std::span<const Symbol> reference, const Alphabet& alphabet);

/// Throws InvalidInput when two sequences were encoded with different alphabets.
void require_same_alphabet(const BootSequence& a, const BootSequence& b);

}  // namespace bootseq
