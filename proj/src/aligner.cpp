#include "bootseq/aligner.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "bootseq/detail/substitution.hpp"
#include "bootseq/error.hpp"

namespace bootseq {

SimilarityTable::SimilarityTable(std::size_t dim, int match, int mismatch)
    : dim_(dim), cells_(dim * dim, mismatch) {
  for (std::size_t i = 0; i < dim; ++i) cells_[i * dim + i] = match;
}

void SimilarityTable::set(Symbol test, Symbol reference, int value) {
  if (test >= dim_ || reference >= dim_) throw InvalidInput("similarity entry outside table");
  cells_[test * dim_ + reference] = value;
}

void SimilarityTable::set_symmetric(Symbol a, Symbol b, int value) {
  set(a, b, value);
  set(b, a, value);
}

SimilarityTable SimilarityTable::transposed() const {
  SimilarityTable t(dim_, 0, 0);
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = 0; j < dim_; ++j) t.cells_[j * dim_ + i] = cells_[i * dim_ + j];
  return t;
}

int SimilarityTable::max_abs() const noexcept {
  int m = 0;
  for (int v : cells_) m = std::max(m, v < 0 ? -v : v);
  return m;
}

void ScoringScheme::validate() const {
  if (gap_in_test > 0 || gap_in_reference > 0) throw InvalidInput("gap penalties must be <= 0");
  if (!similarity && match <= mismatch) throw InvalidInput("match score must exceed mismatch score");
}

ScoringScheme ScoringScheme::swapped_roles() const {
  ScoringScheme s = *this;
  std::swap(s.gap_in_test, s.gap_in_reference);
  if (similarity) s.similarity = std::make_shared<const SimilarityTable>(similarity->transposed());
  return s;
}

int ScoringScheme::max_abs() const noexcept {
  auto a = [](int v) { return v < 0 ? -v : v; };
  int m = std::max({a(match), a(mismatch), a(gap_in_test), a(gap_in_reference)});
  if (similarity) m = std::max(m, similarity->max_abs());
  return m;
}

std::string ScoringScheme::describe() const {
  std::ostringstream s;
  s << match << ',' << mismatch << ',' << gap_in_test << ',' << gap_in_reference;
  if (similarity) s << "+table";
  return s.str();
}

ScoringScheme ScoringScheme::parse(const std::string& spec) {
  if (spec == "default") return standard();
  if (spec == "unit") return unit_match();
  if (spec == "worked-uniform") return worked_example_uniform();
  ScoringScheme s;
  std::istringstream in(spec);
  std::string part;
  std::vector<int> values;
  while (std::getline(in, part, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stoi(part, &used));
      if (used != part.size()) throw InvalidInput("");
    } catch (const std::exception&) {
      throw InvalidInput("bad scoring scheme '" + spec + "'");
    }
  }
  if (values.size() != 4) throw InvalidInput("scoring scheme needs match,mismatch,gap_test,gap_ref");
  s.match = values[0];
  s.mismatch = values[1];
  s.gap_in_test = values[2];
  s.gap_in_reference = values[3];
  s.validate();
  return s;
}

ScoringScheme worked_example_scheme(const Alphabet& alphabet) {
  ScoringScheme s = ScoringScheme::worked_example_uniform();
  auto table = std::make_shared<SimilarityTable>(alphabet.size(), s.match, s.mismatch);
  auto sym = [&](const char* name) {
    auto found = alphabet.find(name);
    if (!found) throw InvalidInput(std::string("worked-example scheme needs symbol ") + name);
    return *found;
  };
  // Pairs whose value is pinned by a diagonal-derived cell of the table.
  struct Pair {
    const char* a;
    const char* b;
    int value;
  };
  static constexpr Pair kSolved[] = {
      {"B", "B", 5},  {"C", "C", 15}, {"D", "D", 10}, {"A", "E", -1}, {"B", "E", -1}, {"B", "C", -3},
      {"C", "E", -3}, {"C", "F", -3}, {"E", "F", -3}, {"D", "E", 0},  {"B", "F", 0},
  };
  for (const auto& p : kSolved) table->set_symmetric(sym(p.a), sym(p.b), p.value);
  s.similarity = std::move(table);
  return s;
}

void require_same_alphabet(const BootSequence& a, const BootSequence& b) {
  if (a.alphabet_id != 0 && b.alphabet_id != 0 && a.alphabet_id != b.alphabet_id)
    throw InvalidInput("sequences were encoded with different alphabets");
}

namespace {

void check_overflow(std::size_t m, std::size_t n, const ScoringScheme& scheme) {
  auto bound = static_cast<unsigned long long>(m + n) * static_cast<unsigned long long>(scheme.max_abs());
  if (bound >= static_cast<unsigned long long>(std::numeric_limits<Score>::max()))
    throw InvalidInput("alignment score could overflow 32-bit range");
}

void check_table(std::span<const Symbol> seq, const ScoringScheme& scheme) {
  if (!scheme.similarity) return;
  for (Symbol s : seq)
    if (s >= scheme.similarity->dim()) throw InvalidInput("symbol outside similarity table");
}

// F over rows = `down`, columns = `across`; `up_gap` for a row symbol against a
// gap, `left_gap` for a column symbol against a gap. sub(row, col).
template <class Sub>
Score rolling(std::span<const Symbol> down, std::span<const Symbol> across, int up_gap, int left_gap,
              Sub sub, std::span<Score> row) {
  const std::size_t n = across.size();
  for (std::size_t j = 0; j <= n; ++j) row[j] = static_cast<Score>(j) * left_gap;
  Score* r = row.data();
  const Symbol* b = across.data();
  for (std::size_t i = 1; i <= down.size(); ++i) {
    const Symbol a = down[i - 1];
    Score diag = r[0];
    Score left = static_cast<Score>(i) * up_gap;
    r[0] = left;
    for (std::size_t j = 1; j <= n; ++j) {
      const Score up = r[j];
      Score v = diag + sub(a, b[j - 1]);
      v = std::max(v, up + up_gap);
      v = std::max(v, left + left_gap);
      diag = up;
      r[j] = v;
      left = v;
    }
  }
  return r[n];
}

}  // namespace

std::span<Score> AlignWorkspace::row(std::size_t cells) {
  if (row_.size() < cells) row_.resize(cells);
  peak_ = std::max(peak_, cells);
  return {row_.data(), cells};
}

DpMatrix fill_matrix(std::span<const Symbol> test, std::span<const Symbol> reference,
                     const ScoringScheme& scheme, const AlignOptions& options) {
  scheme.validate();
  check_overflow(test.size(), reference.size(), scheme);
  check_table(test, scheme);
  check_table(reference, scheme);
  const std::size_t m = test.size();
  const std::size_t n = reference.size();
  const std::size_t cells = (m + 1) * (n + 1);
  if (cells > options.max_cells) throw MemoryBudgetExceeded(cells, options.max_cells);

  DpMatrix f{m + 1, n + 1, std::vector<Score>(cells)};
  for (std::size_t j = 0; j <= n; ++j) f.cells[j] = static_cast<Score>(j) * scheme.gap_in_test;
  for (std::size_t i = 1; i <= m; ++i) {
    Score* cur = &f.cells[i * f.cols];
    const Score* prev = &f.cells[(i - 1) * f.cols];
    cur[0] = static_cast<Score>(i) * scheme.gap_in_reference;
    for (std::size_t j = 1; j <= n; ++j) {
      Score v = prev[j - 1] + scheme.substitution(test[i - 1], reference[j - 1]);
      v = std::max(v, prev[j] + scheme.gap_in_reference);
      v = std::max(v, cur[j - 1] + scheme.gap_in_test);
      cur[j] = v;
    }
  }
  return f;
}

AlignmentResult traceback(const DpMatrix& f, std::span<const Symbol> test, std::span<const Symbol> reference,
                          const ScoringScheme& scheme) {
  AlignmentResult r;
  std::size_t i = test.size();
  std::size_t j = reference.size();
  r.score = f.at(i, j);
  while (i > 0 || j > 0) {
    const Score here = f.at(i, j);
    if (i > 0 && j > 0 && here == f.at(i - 1, j - 1) + scheme.substitution(test[i - 1], reference[j - 1])) {
      r.aligned_test.push_back(test[--i]);
      r.aligned_reference.push_back(reference[--j]);
    } else if (i > 0 && here == f.at(i - 1, j) + scheme.gap_in_reference) {
      r.aligned_test.push_back(test[--i]);
      r.aligned_reference.push_back(kGap);
    } else {
      r.aligned_test.push_back(kGap);
      r.aligned_reference.push_back(reference[--j]);
    }
  }
  std::reverse(r.aligned_test.begin(), r.aligned_test.end());
  std::reverse(r.aligned_reference.begin(), r.aligned_reference.end());
  return r;
}

AlignmentResult align(std::span<const Symbol> test, std::span<const Symbol> reference,
                      const ScoringScheme& scheme, const AlignOptions& options) {
  auto f = fill_matrix(test, reference, scheme, options);
  return traceback(f, test, reference, scheme);
}

AlignmentResult align(const BootSequence& test, const BootSequence& reference, const ScoringScheme& scheme,
                      const AlignOptions& options) {
  require_same_alphabet(test, reference);
  return align(test.symbols, reference.symbols, scheme, options);
}

Score score_only(std::span<const Symbol> test, std::span<const Symbol> reference, const ScoringScheme& scheme,
                 AlignWorkspace& workspace) {
  scheme.validate();
  check_overflow(test.size(), reference.size(), scheme);
  check_table(test, scheme);
  check_table(reference, scheme);
  if (reference.size() <= test.size()) {
    auto row = workspace.row(reference.size() + 1);
    return detail::with_substitution(scheme, false, [&](auto sub) {
      return rolling(test, reference, scheme.gap_in_reference, scheme.gap_in_test, sub, row);
    });
  }
  // Transposed: rows walk the reference, so a reference symbol against a gap
  // (gap in test) is now the "up" move.
  auto row = workspace.row(test.size() + 1);
  return detail::with_substitution(scheme, true, [&](auto sub) {
    return rolling(reference, test, scheme.gap_in_test, scheme.gap_in_reference, sub, row);
  });
}

Score score_only(std::span<const Symbol> test, std::span<const Symbol> reference, const ScoringScheme& scheme) {
  thread_local AlignWorkspace workspace;
  return score_only(test, reference, scheme, workspace);
}

Score score_only(const BootSequence& test, const BootSequence& reference, const ScoringScheme& scheme) {
  require_same_alphabet(test, reference);
  return score_only(test.symbols, reference.symbols, scheme);
}

Score rescore_alignment(std::span<const Symbol> aligned_test, std::span<const Symbol> aligned_reference,
                        const ScoringScheme& scheme) {
  if (aligned_test.size() != aligned_reference.size())
    throw InvalidInput("aligned sequences differ in length");
  Score total = 0;
  for (std::size_t k = 0; k < aligned_test.size(); ++k) {
    const Symbol t = aligned_test[k];
    const Symbol r = aligned_reference[k];
    if (t == kGap && r == kGap) throw InvalidInput("column " + std::to_string(k) + " is a gap in both sequences");
    if (t == kGap)
      total += scheme.gap_in_test;
    else if (r == kGap)
      total += scheme.gap_in_reference;
    else
      total += scheme.substitution(t, r);
  }
  return total;
}

std::string matrix_csv(const DpMatrix& matrix, std::span<const Symbol> test, std::span<const Symbol> reference,
                       const Alphabet& alphabet) {
  std::ostringstream out;
  out << ",";
  for (Symbol s : reference) out << ',' << alphabet.name(s);
  out << '\n';
  for (std::size_t i = 0; i < matrix.rows; ++i) {
    if (i > 0) out << alphabet.name(test[i - 1]);
    for (std::size_t j = 0; j < matrix.cols; ++j) out << ',' << matrix.at(i, j);
    out << '\n';
  }
  return out.str();
}

}  // namespace bootseq
