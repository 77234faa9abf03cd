#include <benchmark/benchmark.h>

#include <memory>

#include "gl0/dataset.hpp"
#include "gl0/estimation.hpp"
#include "gl0/problem.hpp"
#include "gl0/smoothing.hpp"
#include "gl0/tinynet.hpp"

namespace {

void BM_EstimateL0(benchmark::State& state) {
  const gl0::AbsSumProblem f(static_cast<std::size_t>(state.range(0)), 1.0, 1.0);
  gl0::LipschitzOptions opt;
  opt.q = 250;
  for (auto _ : state) benchmark::DoNotOptimize(gl0::estimate_l0_q(f, 1.0, 1, opt));
}
BENCHMARK(BM_EstimateL0)->Arg(1)->Arg(10)->Arg(100);

void BM_Minibatch(benchmark::State& state) {
  const std::size_t d = 64;
  const gl0::QuadraticProblem f(d, 2.0, 0.1);
  const std::vector<double> w(d, 0.1);
  const auto mode = state.range(0) == 0 ? gl0::EstimatorMode::zeroth : gl0::EstimatorMode::first;
  std::uint64_t k = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        gl0::minibatch_estimate(f, w, 32, mode, gl0::SmoothingParams(0.1, d), {1, ++k}));
  }
}
BENCHMARK(BM_Minibatch)->Arg(0)->Arg(1);

void BM_TinyNetGradient(benchmark::State& state) {
  auto data = std::make_shared<gl0::Dataset>(gl0::make_blobs(100, 3, 0.3, 1, 100));
  data->rows = 10;
  data->cols = 10;
  const gl0::TinyNet net({1, 10, 10},
                         {gl0::LayerSpec::conv2d(2, 3), gl0::LayerSpec::relu(),
                          gl0::LayerSpec::maxpool2d(2), gl0::LayerSpec::affine(8),
                          gl0::LayerSpec::relu(), gl0::LayerSpec::affine(3)},
                         3);
  gl0::Stream s(2);
  const auto w = net.kaiming_init(s);
  std::vector<double> g(net.param_count());
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(net.loss_and_gradient(w, data->row(i), data->labels[i], g));
    i = (i + 1) % data->count;
  }
}
BENCHMARK(BM_TinyNetGradient);

}  // namespace
