#include <algebroid/cech.hpp>
#include <algebroid/cohomology.hpp>
#include <algebroid/kernels.hpp>

#include <benchmark/benchmark.h>

#include <random>

using namespace algebroid;

namespace {

Exec mode(const benchmark::State& s) { return s.range(0) ? Exec::parallel : Exec::serial; }

// Banded random matrix with small integer entries, fixed seed.
SparseMatrix random_sparse(std::size_t n, std::size_t per_col) {
  std::mt19937 g(17);
  std::uniform_int_distribution<int> val(-3, 3);
  SparseMatrix m;
  m.rows = n;
  m.cols = n;
  for (std::size_t j = 0; j < n; ++j) {
    std::map<std::size_t, Rational> col;
    for (std::size_t k = 0; k < per_col; ++k) {
      int v = val(g);
      if (v) col[(j + g() % 16) % n] = v;
    }
    m.columns.emplace_back(col.begin(), col.end());
  }
  return m;
}

void BM_sparse_rank(benchmark::State& s) {
  const auto m = random_sparse(static_cast<std::size_t>(s.range(1)), 4);
  for (auto _ : s) benchmark::DoNotOptimize(sparse_rank(m, mode(s)));
}
BENCHMARK(BM_sparse_rank)->ArgsProduct({{0, 1}, {200, 600}})->Unit(benchmark::kMillisecond);

void BM_tangent_cohomology(benchmark::State& s) {
  auto l = make_tangent(ChartRing::polynomial({"x", "y"}));
  const TruncationWindow w{static_cast<int>(s.range(1)), 1};
  for (auto _ : s) benchmark::DoNotOptimize(truncated_cohomology(l, {0, 1, 2}, w, mode(s)));
}
BENCHMARK(BM_tangent_cohomology)->ArgsProduct({{0, 1}, {4, 8}})->Unit(benchmark::kMillisecond);

void BM_line_bundle(benchmark::State& s) {
  for (auto _ : s) benchmark::DoNotOptimize(line_bundle_cohomology(-3, static_cast<int>(s.range(1)), mode(s)));
}
BENCHMARK(BM_line_bundle)->ArgsProduct({{0, 1}, {8, 16}})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
