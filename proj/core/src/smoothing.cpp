#include "gl0/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include <fmt/format.h>

#include "gl0/error.hpp"

namespace gl0 {

std::string to_string(EstimatorMode mode) {
  return mode == EstimatorMode::zeroth ? "zeroth" : "first";
}

EstimatorMode parse_mode(const std::string& text) {
  if (text == "zeroth" || text == "0") return EstimatorMode::zeroth;
  if (text == "first" || text == "1") return EstimatorMode::first;
  fail(Errc::parse_error, fmt::format("unknown estimator mode '{}'", text));
}

double upsilon(EstimatorMode mode, std::size_t d) noexcept {
  return mode == EstimatorMode::zeroth ? static_cast<double>(d) : 1.0;
}

SmoothingParams::SmoothingParams(double alpha_, std::size_t d_) : alpha(alpha_), d(d_) {
  require(alpha >= 0.0 && std::isfinite(alpha), Errc::invalid_argument,
          fmt::format("smoothing radius must be finite and nonnegative, got {}", alpha));
  require(d > 0, Errc::invalid_argument, "smoothing dimension must be positive");
}

double SmoothingParams::alpha_hat() const noexcept {
  return std::sqrt(static_cast<double>(d)) * alpha / 2.0;
}

std::vector<double> sample_u(Stream& stream, const SmoothingParams& params) {
  std::vector<double> u(params.d);
  const double h = params.alpha / 2.0;
  for (auto& x : u) x = stream.uniform(-h, h);
  return u;
}

namespace {

void check_inside(std::span<const double> point, double kappa, const char* who) {
  if (!std::isfinite(kappa)) return;
  for (std::size_t j = 0; j < point.size(); ++j) {
    if (std::abs(point[j]) > kappa) {
      fail(Errc::infeasible_config,
           fmt::format("{}: evaluation at coordinate {} = {} leaves the kappa ball "
                       "(kappa = {}); need kappa > beta + alpha/2",
                       who, j, point[j], kappa));
    }
  }
}

void check_lengths(const StochasticProblem& problem, std::span<const double> w,
                   std::span<const double> u) {
  require(w.size() == problem.dim() && u.size() == problem.dim(), Errc::dimension_mismatch,
          fmt::format("estimator: w has {} and u has {} entries, d = {}", w.size(),
                      u.size(), problem.dim()));
}

void zeroth_into(const StochasticProblem& problem, std::span<const double> w,
                 std::span<const double> u, const Sample& xi, double alpha,
                 std::span<double> out) {
  const std::size_t d = w.size();
  const double kappa = problem.metadata().kappa;
  std::vector<double> point(d);
  for (std::size_t j = 0; j < d; ++j) point[j] = w[j] + u[j];
  const double h = alpha / 2.0;
  for (std::size_t i = 0; i < d; ++i) {
    point[i] = w[i] + h;
    check_inside(point, kappa, "zeroth-order estimate");
    const double plus = problem.value(point, xi);
    point[i] = w[i] - h;
    check_inside(point, kappa, "zeroth-order estimate");
    const double minus = problem.value(point, xi);
    out[i] = (plus - minus) / alpha;
    point[i] = w[i] + u[i];
  }
}

void first_into(const StochasticProblem& problem, std::span<const double> w,
                std::span<const double> u, const Sample& xi, std::span<double> out) {
  std::vector<double> point(w.size());
  for (std::size_t j = 0; j < w.size(); ++j) point[j] = w[j] + u[j];
  check_inside(point, problem.metadata().kappa, "first-order estimate");
  problem.gradient_into(point, xi, out);
}

}  // namespace

std::vector<double> zeroth_order_estimate(const StochasticProblem& problem,
                                          std::span<const double> w,
                                          std::span<const double> u, const Sample& xi,
                                          const SmoothingParams& params) {
  check_lengths(problem, w, u);
  require(params.alpha > 0.0, Errc::invalid_argument,
          "zeroth-order estimate needs alpha > 0");
  std::vector<double> g(w.size());
  zeroth_into(problem, w, u, xi, params.alpha, g);
  return g;
}

std::vector<double> first_order_estimate(const StochasticProblem& problem,
                                         std::span<const double> w,
                                         std::span<const double> u, const Sample& xi) {
  check_lengths(problem, w, u);
  std::vector<double> g(w.size());
  first_into(problem, w, u, xi, g);
  return g;
}

GradientEstimate minibatch_estimate(const StochasticProblem& problem,
                                    std::span<const double> w, std::size_t batch_size,
                                    EstimatorMode mode, const SmoothingParams& params,
                                    const BatchStreams& streams,
                                    const BatchOptions& options) {
  require(batch_size >= 1, Errc::invalid_argument, "mini-batch size must be at least 1");
  require(w.size() == problem.dim() && params.d == problem.dim(), Errc::dimension_mismatch,
          "minibatch_estimate: dimension mismatch");
  require(mode == EstimatorMode::first || params.alpha > 0.0, Errc::invalid_argument,
          "zeroth-order estimate needs alpha > 0");
  const std::size_t d = w.size();

  auto one_sample = [&](std::size_t i, std::span<double> out) {
    std::vector<double> u(d, 0.0);
    if (options.perturb) {
      Stream us(streams.seed, streams.iteration, i, StreamTag::perturbation);
      u = sample_u(us, params);
    }
    Stream xs(streams.seed, streams.iteration, i, StreamTag::sample);
    const Sample xi = problem.sample_xi(xs);
    if (mode == EstimatorMode::zeroth) {
      zeroth_into(problem, w, u, xi, params.alpha, out);
    } else {
      first_into(problem, w, u, xi, out);
    }
  };

  GradientEstimate est;
  est.batch_size = batch_size;
  est.mode = mode;
  est.g.assign(d, 0.0);
  const std::size_t jobs = std::max<std::size_t>(1, std::min(options.jobs, batch_size));

  if (jobs == 1) {
    std::vector<double> buf(d);
    for (std::size_t i = 0; i < batch_size; ++i) {
      one_sample(i, buf);
      for (std::size_t j = 0; j < d; ++j) est.g[j] += buf[j];
    }
  } else {
    // Evaluate a chunk of samples concurrently, then add them in sample order.
    const std::size_t chunk = jobs * 8;
    std::vector<double> bufs(std::min(chunk, batch_size) * d);
    for (std::size_t start = 0; start < batch_size; start += chunk) {
      const std::size_t count = std::min(chunk, batch_size - start);
      std::vector<std::exception_ptr> errors(jobs);
      std::vector<std::thread> workers;
      for (std::size_t t = 0; t < jobs; ++t) {
        workers.emplace_back([&, t] {
          try {
            for (std::size_t s = t; s < count; s += jobs) {
              one_sample(start + s, std::span<double>(bufs).subspan(s * d, d));
            }
          } catch (...) {
            errors[t] = std::current_exception();
          }
        });
      }
      for (auto& th : workers) th.join();
      for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
      for (std::size_t s = 0; s < count; ++s) {
        for (std::size_t j = 0; j < d; ++j) est.g[j] += bufs[s * d + j];
      }
    }
  }
  const auto m = static_cast<double>(batch_size);
  for (auto& x : est.g) x /= m;
  return est;
}

MonteCarloEstimate estimate_f_alpha(const StochasticProblem& problem,
                                    std::span<const double> w,
                                    const SmoothingParams& params, std::size_t num_samples,
                                    Stream& stream) {
  require(num_samples >= 1, Errc::invalid_argument, "estimate_f_alpha: no samples");
  require(w.size() == problem.dim(), Errc::dimension_mismatch,
          "estimate_f_alpha: dimension mismatch");
  std::vector<double> point(w.size());
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t n = 1; n <= num_samples; ++n) {
    const auto u = sample_u(stream, params);
    const Sample xi = problem.sample_xi(stream);
    for (std::size_t j = 0; j < w.size(); ++j) point[j] = w[j] + u[j];
    const double v = problem.value(point, xi);
    const double delta = v - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (v - mean);
  }
  MonteCarloEstimate est;
  est.mean = mean;
  est.samples = num_samples;
  if (num_samples > 1) {
    const double var = m2 / static_cast<double>(num_samples - 1);
    est.std_error = std::sqrt(var / static_cast<double>(num_samples));
  }
  return est;
}

double uniform_error_bound(double alpha, double lipschitz, std::size_t d) noexcept {
  return alpha * lipschitz * std::sqrt(static_cast<double>(d) / 12.0);
}

}  // namespace gl0
