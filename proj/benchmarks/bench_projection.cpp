#include <benchmark/benchmark.h>

#include "gl0/constraint.hpp"
#include "gl0/rng.hpp"

namespace {

// Groups of 10 with unit penalties and half the groups allowed.
void BM_Project(benchmark::State& state) {
  const auto groups = static_cast<std::size_t>(state.range(0));
  const gl0::GroupPartition part(std::vector<std::size_t>(groups, 10),
                                 std::vector<double>(groups, 1.0),
                                 static_cast<double>(groups / 2));
  gl0::Stream s(1);
  std::vector<double> w(part.dim());
  for (double& x : w) x = s.uniform(-2.0, 2.0);
  const gl0::BoxParams box{1.0, 2.0};
  for (auto _ : state) benchmark::DoNotOptimize(gl0::project(w, part, box));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(part.dim()));
}
BENCHMARK(BM_Project)->RangeMultiplier(4)->Range(8, 2048);

}  // namespace
