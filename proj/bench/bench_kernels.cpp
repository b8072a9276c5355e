// Serial vs OpenMP kernels. Run with OMP_NUM_THREADS to vary the team size.

#include <benchmark/benchmark.h>

#include <random>

#include "bootseq/kernels.hpp"

using namespace bootseq;

namespace {

std::vector<std::vector<Symbol>> make_set(std::size_t count, std::size_t len, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::vector<std::vector<Symbol>> out(count, std::vector<Symbol>(len));
  for (auto& s : out)
    for (auto& v : s) v = static_cast<Symbol>(1 + g() % 96);
  return out;
}

void BM_ScoreOnly(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto set = make_set(2, n, 1);
  AlignWorkspace ws;
  for (auto _ : state) benchmark::DoNotOptimize(score_only(set[0], set[1], ScoringScheme{}, ws));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n * n));
}
BENCHMARK(BM_ScoreOnly)->Arg(500)->Arg(1000)->Arg(2500)->Unit(benchmark::kMillisecond);

void BM_Wavefront(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto set = make_set(2, n, 1);
  for (auto _ : state)
    benchmark::DoNotOptimize(kernels::score_only_wavefront(set[0], set[1], ScoringScheme{},
                                                           static_cast<std::size_t>(state.range(1))));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n * n));
}
BENCHMARK(BM_Wavefront)->Args({2500, 128})->Args({2500, 256})->Args({2500, 512})->Unit(benchmark::kMillisecond);

template <bool Parallel>
void BM_ScoreAll(benchmark::State& state) {
  const auto tests = make_set(8, static_cast<std::size_t>(state.range(0)), 2);
  const auto refs = make_set(15, static_cast<std::size_t>(state.range(0)), 3);
  const std::vector<kernels::SymbolSpan> ts(tests.begin(), tests.end()), rs(refs.begin(), refs.end());
  for (auto _ : state) {
    if constexpr (Parallel)
      benchmark::DoNotOptimize(kernels::score_all(ts, rs, ScoringScheme{}));
    else
      benchmark::DoNotOptimize(kernels::score_all_serial(ts, rs, ScoringScheme{}));
  }
  state.counters["threads"] = kernels::max_threads();
}
BENCHMARK_TEMPLATE(BM_ScoreAll, false)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_ScoreAll, true)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
