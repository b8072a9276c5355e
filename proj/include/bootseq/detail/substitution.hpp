#pragma once

#include <cstddef>

#include "bootseq/aligner.hpp"

namespace bootseq::detail {

struct UniformSubstitution {
  int match;
  int mismatch;
  int operator()(Symbol a, Symbol b) const noexcept { return a == b ? match : mismatch; }
};

struct TableSubstitution {
  const int* cells;
  std::size_t dim;
  int operator()(Symbol a, Symbol b) const noexcept { return cells[a * dim + b]; }
};

struct TransposedTableSubstitution {
  const int* cells;
  std::size_t dim;
  int operator()(Symbol row, Symbol col) const noexcept { return cells[col * dim + row]; }
};

// Calls f with a concrete substitution functor so the kernels inline it.
// With `transpose`, the functor takes (reference, test) instead of (test, reference).
template <class F>
auto with_substitution(const ScoringScheme& scheme, bool transpose, F&& f) {
  if (scheme.similarity) {
    const auto* cells = scheme.similarity->data();
    const auto dim = scheme.similarity->dim();
    if (transpose) return f(TransposedTableSubstitution{cells, dim});
    return f(TableSubstitution{cells, dim});
  }
  return f(UniformSubstitution{scheme.match, scheme.mismatch});
}

}  // namespace bootseq::detail
