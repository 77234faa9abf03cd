#include "gl0/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include <fmt/format.h>

#include "gl0/error.hpp"
#include "gl0/smoothing.hpp"

namespace gl0 {
namespace {

// Runs body(i) for i in [0, n) on up to `jobs` threads with a static stride.
template <class Body>
void parallel_for(std::size_t n, std::size_t jobs, Body body) {
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(jobs);
  std::vector<std::thread> workers;
  for (std::size_t t = 0; t < jobs; ++t) {
    workers.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < n; i += jobs) body(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : workers) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

LipschitzEstimate estimate_l0_q(const StochasticProblem& problem, double kappa,
                                std::uint64_t seed, const LipschitzOptions& options) {
  const std::size_t q = options.q;
  const std::size_t pairs = options.pairs.value_or(q);
  require(q >= 2 && pairs >= 1, Errc::invalid_argument,
          "estimate_l0_q: need q >= 2 samples and at least one pair");
  require(std::isfinite(kappa) && kappa > 0.0, Errc::invalid_argument,
          "estimate_l0_q: kappa must be positive and finite");
  const double iota = options.iota.value_or(0.01 / kappa);
  require(iota > 0.0 && kappa > iota, Errc::invalid_argument,
          fmt::format("estimate_l0_q: need 0 < iota < kappa (iota = {}, kappa = {})", iota,
                      kappa));
  const std::size_t d = problem.dim();

  // Pair j: w_j then the offset, redrawn while the offset is exactly zero.
  std::vector<double> ws(pairs * d);
  std::vector<double> vs(pairs * d);
  std::vector<double> gaps(pairs);
  for (std::size_t j = 0; j < pairs; ++j) {
    Stream stream(seed, j, 0, StreamTag::estimation_points);
    double* w = ws.data() + j * d;
    double* v = vs.data() + j * d;
    for (std::size_t k = 0; k < d; ++k) w[k] = stream.uniform(-(kappa - iota), kappa - iota);
    double gap = 0.0;
    while (gap == 0.0) {
      double sq = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        v[k] = w[k] + stream.uniform(-iota, iota);
        sq += (v[k] - w[k]) * (v[k] - w[k]);
      }
      gap = std::sqrt(sq);
    }
    gaps[j] = gap;
  }

  LipschitzEstimate est;
  est.q = q;
  est.iota = iota;
  est.per_xi_slopes.assign(q, 0.0);
  parallel_for(q, options.jobs, [&](std::size_t i) {
    Stream stream(seed, i, 0, StreamTag::estimation_samples);
    const Sample xi = problem.sample_xi(stream);
    double best = 0.0;
    for (std::size_t j = 0; j < pairs; ++j) {
      const std::span<const double> w(ws.data() + j * d, d);
      const std::span<const double> v(vs.data() + j * d, d);
      const double slope = std::abs(problem.value(w, xi) - problem.value(v, xi)) / gaps[j];
      best = std::max(best, slope);
    }
    est.per_xi_slopes[i] = best;
  });
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double s : est.per_xi_slopes) {
    sum += s;
    sum_sq += s * s;
  }
  est.l0_hat = sum / static_cast<double>(q);
  est.q_hat = sum_sq / static_cast<double>(q);
  return est;
}

double estimate_delta_at(const StochasticProblem& problem, std::span<const double> w1,
                         double alpha, std::uint64_t seed, const DeltaOptions& options) {
  require(w1.size() == problem.dim(), Errc::dimension_mismatch,
          "estimate_delta: start point has the wrong length");
  const SmoothingParams params(alpha, problem.dim());
  const auto dataset = problem.dataset_size();
  const std::size_t n = dataset.value_or(options.samples);
  require(n > 0, Errc::invalid_argument, "estimate_delta: no samples");

  std::vector<double> values(n);
  parallel_for(n, options.jobs, [&](std::size_t i) {
    Stream us(seed, 0, i, StreamTag::perturbation);
    const auto u = sample_u(us, params);
    Sample xi;
    if (dataset) {
      xi = problem.sample_at(i);
    } else {
      Stream xs(seed, 0, i, StreamTag::sample);
      xi = problem.sample_xi(xs);
    }
    std::vector<double> point(w1.begin(), w1.end());
    for (std::size_t j = 0; j < point.size(); ++j) point[j] += u[j];
    values[i] = problem.value(point, xi);
  });
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    require(values[i] >= 0.0, Errc::invalid_argument,
            fmt::format("estimate_delta: negative loss {} at sample {}; the estimate "
                        "needs a nonnegative loss",
                        values[i], i));
    total += values[i];
  }
  return total / static_cast<double>(n);
}

DeltaEstimate estimate_delta(const StochasticProblem& problem, const GroupPartition& part,
                             const BoxParams& box, double alpha, std::uint64_t seed,
                             const DeltaOptions& options) {
  require(options.starts >= 1, Errc::invalid_argument, "estimate_delta: need a start");
  DeltaEstimate est;
  for (std::size_t l = 0; l < options.starts; ++l) {
    const std::uint64_t start_seed = derive_seed(seed, l);
    Stream init(start_seed, 0, 0, StreamTag::initialization);
    const auto w1 = project(problem.initial_point(init), part, box);
    est.per_start.push_back(estimate_delta_at(problem, w1, alpha, start_seed, options));
  }
  est.delta = *std::max_element(est.per_start.begin(), est.per_start.end());
  return est;
}

double delta_bound(double f_w1, double f_wstar_lower, double lipschitz, std::size_t d,
                   double alpha, double beta) {
  require(lipschitz >= 0.0 && alpha >= 0.0 && beta >= 0.0, Errc::invalid_argument,
          "delta_bound: inputs must be nonnegative");
  require(f_w1 >= f_wstar_lower, Errc::invalid_argument,
          "delta_bound: f(w1) is below the lower bound on f(w*)");
  const double rd = std::sqrt(static_cast<double>(d));
  const double box_side = 2.0 * beta * rd * lipschitz;
  const double gap_side =
      f_w1 - f_wstar_lower + alpha * lipschitz * std::sqrt(static_cast<double>(d) / 3.0);
  return std::min(box_side, gap_side);
}

}  // namespace gl0
