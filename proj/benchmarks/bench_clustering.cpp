#include <random>

#include <benchmark/benchmark.h>

#include "valfind/clusterlab.hpp"

using namespace valfind;

namespace {

Matrix blobs(std::size_t n, std::size_t d, std::size_t centers, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> noise(0.0, 0.3);
  Matrix x(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) x(i, j) = static_cast<double>((i % centers) * (j + 1) % 7) + noise(gen);
  return x;
}

void BM_KMeans(benchmark::State& state) {
  const auto x = blobs(static_cast<std::size_t>(state.range(0)), 32, 9, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(clusterlab::kmeans(x, {.k = 9, .seed = 1, .n_init = 10}));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_KMeans)->Arg(200)->Arg(657)->Unit(benchmark::kMillisecond);

void BM_MiniBatch(benchmark::State& state) {
  const auto x = blobs(static_cast<std::size_t>(state.range(0)), 32, 9, 2);
  for (auto _ : state) benchmark::DoNotOptimize(clusterlab::minibatch_kmeans(x, {.k = 9, .seed = 1}));
}
BENCHMARK(BM_MiniBatch)->Arg(657)->Unit(benchmark::kMillisecond);

void BM_WardPath(benchmark::State& state) {
  const auto x = blobs(static_cast<std::size_t>(state.range(0)), 32, 9, 3);
  for (auto _ : state) benchmark::DoNotOptimize(clusterlab::ward_merge_path(x));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_WardPath)->Arg(100)->Arg(300)->Arg(657)->Unit(benchmark::kMillisecond)->Complexity();

void BM_Birch(benchmark::State& state) {
  const auto x = blobs(657, 32, 9, 4);
  for (auto _ : state) benchmark::DoNotOptimize(clusterlab::birch(x, {.k = 9}));
}
BENCHMARK(BM_Birch)->Unit(benchmark::kMillisecond);

void BM_Jacobi(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(-1, 1);
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) a(i, j) = a(j, i) = u(gen);
  for (auto _ : state) benchmark::DoNotOptimize(clusterlab::jacobi_eigen(a));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Jacobi)->RangeMultiplier(2)->Range(8, 128)->Unit(benchmark::kMillisecond)->Complexity();

void BM_Silhouette(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = blobs(n, 32, 9, 6);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % 9);
  for (auto _ : state) benchmark::DoNotOptimize(clusterlab::silhouette(x, labels));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Silhouette)->Arg(200)->Arg(657)->Unit(benchmark::kMillisecond)->Complexity();

}  // namespace
