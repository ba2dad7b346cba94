#include <random>

#include <benchmark/benchmark.h>

#include "valfind/attriblab.hpp"
#include "valfind/boostlab.hpp"

using namespace valfind;

namespace {

struct Data {
  Matrix x;
  std::vector<int> y;
  std::vector<std::string> classes;
};

Data make_data(std::size_t n, std::size_t d, std::size_t c) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(-1, 1);
  Data out{Matrix(n, d), std::vector<int>(n), {}};
  for (auto& v : out.x.data()) v = u(gen);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = out.x(i, 0) + 0.5 * out.x(i, 1) + 0.2 * u(gen);
    out.y[i] = static_cast<int>(std::min(c - 1, static_cast<std::size_t>((s + 1.7) / 3.4 * static_cast<double>(c))));
  }
  for (std::size_t k = 0; k < c; ++k) out.classes.push_back("c" + std::to_string(k));
  return out;
}

void BM_TrainBoosted(benchmark::State& state) {
  const auto data = make_data(400, static_cast<std::size_t>(state.range(0)), 9);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        boostlab::train_boosted(data.x, data.y, data.classes, {.rounds = 20, .max_depth = 4}));
  }
}
BENCHMARK(BM_TrainBoosted)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_PredictBoosted(benchmark::State& state) {
  const auto data = make_data(400, 64, 9);
  const auto m = boostlab::train_boosted(data.x, data.y, data.classes, {.rounds = 50, .max_depth = 4});
  for (auto _ : state) benchmark::DoNotOptimize(boostlab::predict_classes(m, data.x));
}
BENCHMARK(BM_PredictBoosted)->Unit(benchmark::kMillisecond);

void BM_PathAttribution(benchmark::State& state) {
  const auto data = make_data(400, 64, 9);
  const auto m = boostlab::train_boosted(data.x, data.y, data.classes, {.rounds = 50, .max_depth = 4});
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(attriblab::path_attribution(m, data.x.row(i % 400), 0));
    ++i;
  }
}
BENCHMARK(BM_PathAttribution)->Unit(benchmark::kMicrosecond);

void BM_TrainLogReg(benchmark::State& state) {
  const auto data = make_data(400, 64, 9);
  for (auto _ : state) {
    benchmark::DoNotOptimize(boostlab::train_logreg(data.x, data.y, data.classes, {.epochs = 100}));
  }
}
BENCHMARK(BM_TrainLogReg)->Unit(benchmark::kMillisecond);

}  // namespace
