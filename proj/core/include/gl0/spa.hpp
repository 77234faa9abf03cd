#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gl0/constraint.hpp"
#include "gl0/problem.hpp"
#include "gl0/smoothing.hpp"

namespace gl0 {

struct SpaConstants {
  double c1 = 0.0;
  double c2 = 0.0;
};

/// C1 = 2(1 + 3 rho) / (tau + rho - 1) + 3 rho and
/// C2 = 4(1 + 3 rho) / (tau + rho - 1) (1/2 + (2/3) M tau / rho^2) + 3.
/// Rejects rho <= 0, tau < 0 and rho + tau <= 1.
SpaConstants constants_c1_c2(double rho, double tau = 0.0, std::size_t batch = 1);

/// Right-hand side C1 * 2 sqrt(d) L0 Delta / (alpha K) + C2 * upsilon Q / M.
double expected_stationarity_bound(const SpaConstants& c, double alpha, std::size_t d,
                                   double lipschitz, double delta, std::size_t iterations,
                                   std::size_t batch, double upsilon_q);

/// (eps1, eps2): uniform smoothing error eps1, expected stationarity eps2.
/// (eps3, eps4): Clarke radius eps3, expected stationarity eps4.
enum class Criterion { eps12, eps34 };

struct Targets {
  Criterion criterion = Criterion::eps12;
  double eps_smoothing = 0.0;  // eps1 or eps3
  double eps_stationary = 0.0;  // eps2 or eps4
};

struct ProblemConstants {
  double lipschitz = 0.0;
  double second_moment = 0.0;
  double delta = 0.0;
  std::size_t d = 0;
  double kappa = 0.0;
};

struct SPAConfig {
  double alpha = 0.0;
  double eta = 0.0;
  std::uint64_t iterations = 1;  // K
  std::uint64_t batch = 1;       // M
  double rho = 2.0;
  double tau = 0.0;
  EstimatorMode mode = EstimatorMode::first;
  double delta = 0.0;
  std::uint64_t seed = 0;
};

struct Derivation {
  SPAConfig config;
  BoxParams box;
  SpaConstants constants;
  std::size_t d = 0;
  double alpha_hat = 0.0;
  /// Bound on the expected squared stationarity distance at (K, M).
  double bound = 0.0;
};

/// Manual replacements for derived values. A finite horizon or batch below the
/// derived one weakens the guarantee but leaves the algorithm unchanged.
struct DerivationOverrides {
  std::optional<double> beta;
  std::optional<std::uint64_t> iterations;
  std::optional<std::uint64_t> batch;

  /// Rejects a beta that violates kappa > beta + alpha / 2; refreshes the bound.
  void apply(Derivation& derivation, double lipschitz, double upsilon_q) const;
};

/// Hyperparameters for the requested criterion with tau = 0 and the box
/// radius beta = 0.99 (kappa - alpha / 2) (for eps34: 0.99 (kappa - eps3)).
/// K and M are ceilings clamped below at 1; eta = alpha / (3 rho sqrt(d) L0).
/// Throws infeasible_config when kappa cannot host the box.
Derivation derive_params(const Targets& targets, const ProblemConstants& constants,
                         double rho, EstimatorMode mode, std::uint64_t seed = 0);

struct TraceRecord {
  std::uint64_t k = 0;
  double fhat = std::numeric_limits<double>::quiet_NaN();
  double step_norm = 0.0;
  std::size_t feasible_groups = 0;
};

struct RunOptions {
  /// false sets u = 0 (projected SGD).
  bool perturb = true;
  /// false skips the projection (plain SGD); iterates may leave C.
  bool project = true;
  std::size_t jobs = 1;
  /// Iterations between held-out loss records; 0 means ceil(K / 100).
  std::uint64_t trace_every = 0;
  std::size_t holdout_batch = 64;
  bool record_trace = true;
  /// Overrides the random stopping index (must lie in [2, K + 1]).
  std::optional<std::uint64_t> stopping_index;
};

struct RunResult {
  std::vector<double> w;
  std::uint64_t R = 0;
  std::vector<TraceRecord> trace;
  std::vector<std::string> warnings;
  std::uint64_t seed = 0;
  std::uint64_t gradient_calls = 0;
  std::uint64_t projections = 0;
  double wall_seconds = 0.0;
};

/// Draws R uniformly from {2, ..., K + 1}.
std::uint64_t draw_stopping_index(std::uint64_t seed, std::uint64_t iterations);

/// Blocks of `part` whose groups are all zero in `w`.
std::vector<std::string> collapsed_layers(std::span<const double> w,
                                          const GroupPartition& part,
                                          const std::vector<LayerBlock>& blocks);

struct Initialization {
  std::vector<double> w;
  std::size_t attempts = 0;
  std::vector<std::string> warnings;
};

inline constexpr std::size_t kInitRedraws = 10;

/// w1 = project(w0). Without a supplied w0, w0 is drawn from the problem and
/// redrawn up to 10 times while a declared layer is entirely zero; a layer
/// that stays empty produces a "layer collapse" warning.
Initialization initialize(const StochasticProblem& problem, const GroupPartition& part,
                          const BoxParams& box, std::uint64_t seed,
                          std::optional<std::span<const double>> w0 = std::nullopt);

/// Stochastic projected algorithm. Iterates
/// w^{k+1} = project(w^k - eta * G^k) for k = 1, ..., R - 1 with G^k the
/// mini-batch estimate of the configured mode, and returns w^R.
RunResult run_spa(const StochasticProblem& problem, const GroupPartition& part,
                  const BoxParams& box, const SPAConfig& config,
                  std::span<const double> w1, const RunOptions& options = {});

/// Stationarity distance of the T-sample estimate of grad f_alpha at w.
double estimated_stationarity(const StochasticProblem& problem, const GroupPartition& part,
                              const BoxParams& box, std::span<const double> w,
                              EstimatorMode mode, double alpha, std::size_t samples,
                              std::uint64_t seed, std::size_t jobs = 1);

struct HighProbabilityTargets {
  double gamma = 0.1;
  double c = 0.5;
  double phi = 2.0;
};

struct HighProbabilityPlan {
  std::size_t runs = 1;    // r
  double psi = 0.0;
  std::uint64_t samples = 1;  // T
  double eps_prime = 0.0;
};

/// r = ceil(-ln(c gamma)), psi = r / ((1 - c) gamma),
/// T = ceil(6 phi psi upsilon Q / eps^2), eps' = sqrt((eps^2 - 6 psi upsilon Q / T) / (4e)).
HighProbabilityPlan plan_high_probability(const HighProbabilityTargets& hp, double eps,
                                          double upsilon_q);

struct Selection {
  std::vector<double> distances;
  std::size_t index = 0;
};

/// Index of the smallest distance; the first one on ties.
std::size_t argmin_distance(std::span<const double> distances);

/// Scores each candidate with estimated_stationarity using the same T samples
/// and returns the argmin.
Selection select_candidate(const StochasticProblem& problem, const GroupPartition& part,
                           const BoxParams& box,
                           const std::vector<std::vector<double>>& candidates,
                           EstimatorMode mode, double alpha, std::uint64_t samples,
                           std::uint64_t seed, std::size_t jobs = 1);

struct HighProbabilityResult {
  HighProbabilityPlan plan;
  Derivation derivation;
  std::vector<RunResult> runs;
  Selection selection;
  [[nodiscard]] const std::vector<double>& best() const { return runs[selection.index].w; }
};

/// r independent runs configured for the shrunken target eps', then selection
/// of the run with the smallest estimated stationarity distance.
HighProbabilityResult run_high_probability(const StochasticProblem& problem,
                                           const GroupPartition& part,
                                           const Targets& targets,
                                           const ProblemConstants& constants,
                                           const HighProbabilityTargets& hp, double rho,
                                           EstimatorMode mode, std::uint64_t seed,
                                           const RunOptions& options = {},
                                           const DerivationOverrides& overrides = {});

struct Stage {
  Targets targets;
  Derivation derivation;
  RunResult run;
  double stationarity = 0.0;
};

/// eps^i = (eps3^1 / 2^(i-1), eps4^1 / 2^(i-1)).
std::vector<Targets> geometric_schedule(double eps3, double eps4, std::size_t stages);

/// One (eps3, eps4) run per stage. Every stage uses the box of the first
/// stage, so kappa > beta + eps3^1 covers all of them. Rejects schedules that
/// are not strictly decreasing and positive.
std::vector<Stage> run_asymptotic(const StochasticProblem& problem,
                                  const GroupPartition& part,
                                  const std::vector<Targets>& schedule,
                                  const ProblemConstants& constants, double rho,
                                  EstimatorMode mode, std::uint64_t seed,
                                  std::size_t stationarity_samples = 1000,
                                  const RunOptions& options = {},
                                  const DerivationOverrides& overrides = {});

}  // namespace gl0
