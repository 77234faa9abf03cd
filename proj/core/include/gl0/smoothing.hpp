#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gl0/problem.hpp"
#include "gl0/rng.hpp"

namespace gl0 {

/// zeroth: finite differences dF(w, u, xi) / alpha.
/// first: bp gradient at w + u.
enum class EstimatorMode { zeroth, first };

std::string to_string(EstimatorMode mode);
EstimatorMode parse_mode(const std::string& text);

/// Variance factor of the estimator: d for zeroth order, 1 for first order.
double upsilon(EstimatorMode mode, std::size_t d) noexcept;

struct SmoothingParams {
  double alpha = 0.0;
  std::size_t d = 0;

  SmoothingParams(double alpha, std::size_t d);
  /// sqrt(d) * alpha / 2, the radius of the Clarke subdifferential enlargement.
  [[nodiscard]] double alpha_hat() const noexcept;
};

struct GradientEstimate {
  std::vector<double> g;
  std::size_t batch_size = 0;
  EstimatorMode mode = EstimatorMode::first;
};

/// Independent components uniform on [-alpha/2, alpha/2].
std::vector<double> sample_u(Stream& stream, const SmoothingParams& params);

/// dF(w, u, xi) / alpha. Component i perturbs w_i by +-alpha/2 and every other
/// coordinate j by u_j; u_i is ignored. Costs 2d evaluations of F. Throws
/// infeasible_config if an evaluation point leaves the kappa ball.
std::vector<double> zeroth_order_estimate(const StochasticProblem& problem,
                                          std::span<const double> w,
                                          std::span<const double> u, const Sample& xi,
                                          const SmoothingParams& params);

/// bp gradient of F(., xi) at w + u, with the same kappa check.
std::vector<double> first_order_estimate(const StochasticProblem& problem,
                                         std::span<const double> w,
                                         std::span<const double> u, const Sample& xi);

/// Where a mini-batch takes its randomness. Sample i of iteration k draws u
/// from Stream(seed, k, i, perturbation) and xi from Stream(seed, k, i,
/// sample), so runs in either mode with the same seed see identical u and xi.
struct BatchStreams {
  std::uint64_t seed = 0;
  std::uint64_t iteration = 0;
};

struct BatchOptions {
  /// u = 0 turns the estimator into a plain stochastic (sub)gradient.
  bool perturb = true;
  /// Worker threads for per-sample evaluation; results are summed in sample
  /// order regardless.
  std::size_t jobs = 1;
};

/// Mean of M per-sample estimates, summed in sample order. Rejects M = 0.
GradientEstimate minibatch_estimate(const StochasticProblem& problem,
                                    std::span<const double> w, std::size_t batch_size,
                                    EstimatorMode mode, const SmoothingParams& params,
                                    const BatchStreams& streams,
                                    const BatchOptions& options = {});

struct MonteCarloEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

/// Mean of F(w + u, xi) over `num_samples` paired draws (u, then xi) from
/// `stream`, with its standard error.
MonteCarloEstimate estimate_f_alpha(const StochasticProblem& problem,
                                    std::span<const double> w,
                                    const SmoothingParams& params, std::size_t num_samples,
                                    Stream& stream);

/// Bound on |f_alpha - f| over the box: alpha * L0 * sqrt(d / 12).
double uniform_error_bound(double alpha, double lipschitz, std::size_t d) noexcept;

}  // namespace gl0
