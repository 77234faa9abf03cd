#include <benchmark/benchmark.h>

#include <cmath>

#include "gl0/knapsack.hpp"
#include "gl0/rng.hpp"

namespace {

gl0::KnapsackInstance integer_instance(std::size_t n) {
  gl0::Stream s(n);
  gl0::KnapsackInstance inst;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    inst.values.push_back(static_cast<double>(1 + s.uniform_index(100)));
    inst.weights.push_back(static_cast<double>(1 + s.uniform_index(20)));
    total += inst.weights.back();
  }
  inst.capacity = std::floor(total / 2);
  return inst;
}

void BM_Bnb(benchmark::State& state) {
  const auto inst = integer_instance(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(gl0::solve_bnb(inst));
}
BENCHMARK(BM_Bnb)->RangeMultiplier(4)->Range(16, 1024);

void BM_Dp(benchmark::State& state) {
  const auto inst = integer_instance(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(gl0::solve_dp(inst));
}
BENCHMARK(BM_Dp)->RangeMultiplier(4)->Range(16, 1024);

}  // namespace
