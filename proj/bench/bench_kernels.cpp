// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "softsim/kernels.hpp"

using namespace softsim;

namespace {

Vector unit(std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vector v(d);
  double s = 0.0;
  for (double& x : v) {
    x = n(rng);
    s += x * x;
  }
  for (double& x : v) x /= std::sqrt(s);
  return v;
}

std::vector<ImageFeatures> features(std::size_t n, std::size_t d = 16, std::size_t p = 8) {
  std::mt19937_64 rng(1);
  std::vector<ImageFeatures> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].global = unit(d, rng);
    out[i].parts = Matrix(p, d);
    for (std::size_t r = 0; r < p; ++r) {
      const Vector u = unit(d, rng);
      std::copy(u.begin(), u.end(), out[i].parts.row(r).begin());
    }
    out[i].camera = static_cast<int>(i % 6);
  }
  return out;
}

std::vector<Vector> vectors(std::size_t n, std::uint64_t seed, std::size_t d = 16) {
  std::mt19937_64 rng(seed);
  std::vector<Vector> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(unit(d, rng));
  return out;
}

const DissimilarityConfig kCfg{0.5, 0.02, 4, 8};

void BM_PairwiseSerial(benchmark::State& state) {
  const auto f = features(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::pairwise_dissimilarity_serial(f, kCfg));
  state.SetComplexityN(state.range(0));
}

void BM_PairwiseParallel(benchmark::State& state) {
  const auto f = features(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::pairwise_dissimilarity(f, kCfg));
  state.SetComplexityN(state.range(0));
}

void BM_CrossSerial(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = vectors(n / 4, 2), b = vectors(n, 3);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::cross_distance_serial(a, b));
}

void BM_CrossParallel(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = vectors(n / 4, 2), b = vectors(n, 3);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::cross_distance(a, b));
}

}  // namespace

BENCHMARK(BM_PairwiseSerial)->RangeMultiplier(2)->Range(200, 1600)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_PairwiseParallel)->RangeMultiplier(2)->Range(200, 1600)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_CrossSerial)->RangeMultiplier(2)->Range(400, 3200)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_CrossParallel)->RangeMultiplier(2)->Range(400, 3200)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
