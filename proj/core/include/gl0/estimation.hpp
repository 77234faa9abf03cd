#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gl0/constraint.hpp"
#include "gl0/problem.hpp"

namespace gl0 {

struct LipschitzEstimate {
  double l0_hat = 0.0;
  double q_hat = 0.0;
  std::size_t q = 0;
  double iota = 0.0;
  /// Max secant slope for each sampled xi, in sample order.
  std::vector<double> per_xi_slopes;
};

struct LipschitzOptions {
  std::size_t q = 250;
  /// Pair radius; defaults to 0.01 / kappa.
  std::optional<double> iota;
  /// Number of point pairs; defaults to q.
  std::optional<std::size_t> pairs;
  std::size_t jobs = 1;
};

/// Secant-slope estimates of L0 and Q. Pair j is (w_j, v_j) with w_j uniform
/// on the l-inf ball of radius kappa - iota and v_j uniform on w_j + B_iota;
/// L0(xi_i) is estimated by the largest |F(w_j, xi_i) - F(v_j, xi_i)| /
/// ||w_j - v_j||. Pair j and sample i come from their own derived streams, so
/// a larger q reuses every pair and sample of a smaller one.
LipschitzEstimate estimate_l0_q(const StochasticProblem& problem, double kappa,
                                std::uint64_t seed, const LipschitzOptions& options = {});

struct DeltaEstimate {
  double delta = 0.0;
  std::vector<double> per_start;
};

struct DeltaOptions {
  std::size_t starts = 3;
  /// Samples per start when the problem has no finite dataset.
  std::size_t samples = 1000;
  std::size_t jobs = 1;
};

/// Mean of F(w1 + u_i, xi_i) over one pass of the dataset (or `samples`
/// draws), one u per sample. Rejects negative losses, since the mean only
/// bounds f_alpha(w1) - f_alpha(w*) when f >= 0.
double estimate_delta_at(const StochasticProblem& problem, std::span<const double> w1,
                         double alpha, std::uint64_t seed, const DeltaOptions& options = {});

/// Multi-start version: start l draws w0 from the problem, projects it, and
/// takes estimate_delta_at; the result is the maximum over starts.
DeltaEstimate estimate_delta(const StochasticProblem& problem, const GroupPartition& part,
                             const BoxParams& box, double alpha, std::uint64_t seed,
                             const DeltaOptions& options = {});

/// min(2 beta sqrt(d) L0, f(w1) - f(w*) + alpha L0 sqrt(d / 3)).
double delta_bound(double f_w1, double f_wstar_lower, double lipschitz, std::size_t d,
                   double alpha, double beta);

}  // namespace gl0
