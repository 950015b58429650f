// Serial reference kernels against their OpenMP forms on screening-sized
// designs. Run with --benchmark_filter to pick a kernel.

#include <benchmark/benchmark.h>

#include <random>

#include "sparsereg/kernels.hpp"

namespace k = sparsereg::kernels;
using sparsereg::Matrix;
using sparsereg::Vector;

namespace {

Matrix random_matrix(Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix X(n, p);
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index i = 0; i < n; ++i) X(i, j) = normal(rng);
  return X;
}

template <class F>
void run(benchmark::State& state, F kernel) {
  const Matrix X = random_matrix(state.range(0), state.range(1), 1);
  const Vector y = random_matrix(state.range(0), 1, 2).col(0);
  for (auto _ : state) benchmark::DoNotOptimize(kernel(X, y));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(1));
}

void BM_dots_serial(benchmark::State& s) {
  run(s, [](const Matrix& X, const Vector& y) { return k::serial::column_dots(X, y); });
}
void BM_dots_omp(benchmark::State& s) {
  run(s, [](const Matrix& X, const Vector& y) { return k::omp::column_dots(X, y); });
}
void BM_corr_serial(benchmark::State& s) {
  run(s, [](const Matrix& X, const Vector& y) { return k::serial::column_correlations(X, y); });
}
void BM_corr_omp(benchmark::State& s) {
  run(s, [](const Matrix& X, const Vector& y) { return k::omp::column_correlations(X, y); });
}
void BM_moments_serial(benchmark::State& s) {
  run(s, [](const Matrix& X, const Vector&) {
    Vector m, sd;
    k::serial::column_moments(X, m, sd);
    return sd;
  });
}
void BM_moments_omp(benchmark::State& s) {
  run(s, [](const Matrix& X, const Vector&) {
    Vector m, sd;
    k::omp::column_moments(X, m, sd);
    return sd;
  });
}

// n = 468 rows with genes; p spans a screened set up to the full gene block.
#define SHAPES ->Args({468, 200})->Args({468, 2000})->Args({1631, 2000})

BENCHMARK(BM_dots_serial) SHAPES;
BENCHMARK(BM_dots_omp) SHAPES;
BENCHMARK(BM_corr_serial) SHAPES;
BENCHMARK(BM_corr_omp) SHAPES;
BENCHMARK(BM_moments_serial) SHAPES;
BENCHMARK(BM_moments_omp) SHAPES;

}  // namespace

BENCHMARK_MAIN();
