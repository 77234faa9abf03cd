#include "gl0/spa.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "gl0/error.hpp"

namespace gl0 {
namespace {

constexpr double kMaxCount = 9007199254740992.0;  // 2^53

std::uint64_t ceil_count(double x, const char* what) {
  require(!std::isnan(x), Errc::infeasible_config, fmt::format("{} is NaN", what));
  const double c = std::ceil(x);
  require(c <= kMaxCount, Errc::limit_exceeded,
          fmt::format("{} = {:.6g} is too large to run", what, x));
  return c < 1.0 ? 1 : static_cast<std::uint64_t>(c);
}

double norm2(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

std::uint64_t selection_seed(std::uint64_t seed) {
  return derive_seed(seed, static_cast<std::uint64_t>(StreamTag::selection) << 32);
}

}  // namespace

SpaConstants constants_c1_c2(double rho, double tau, std::size_t batch) {
  require(rho > 0.0 && tau >= 0.0 && rho + tau > 1.0, Errc::invalid_argument,
          fmt::format("need rho > 0, tau >= 0 and rho + tau > 1 (rho = {}, tau = {})", rho,
                      tau));
  require(batch >= 1, Errc::invalid_argument, "batch size must be at least 1");
  const double base = (1.0 + 3.0 * rho) / (tau + rho - 1.0);
  SpaConstants c;
  c.c1 = 2.0 * base + 3.0 * rho;
  c.c2 = 4.0 * base *
             (0.5 + (2.0 / 3.0) * static_cast<double>(batch) * tau / (rho * rho)) +
         3.0;
  return c;
}

double expected_stationarity_bound(const SpaConstants& c, double alpha, std::size_t d,
                                   double lipschitz, double delta, std::size_t iterations,
                                   std::size_t batch, double upsilon_q) {
  const double rd = std::sqrt(static_cast<double>(d));
  return c.c1 * 2.0 * rd * lipschitz * delta / (alpha * static_cast<double>(iterations)) +
         c.c2 * upsilon_q / static_cast<double>(batch);
}

Derivation derive_params(const Targets& targets, const ProblemConstants& k, double rho,
                         EstimatorMode mode, std::uint64_t seed) {
  require(targets.eps_smoothing > 0.0 && targets.eps_stationary > 0.0,
          Errc::invalid_argument, "targets must be positive");
  require(k.lipschitz > 0.0 && std::isfinite(k.lipschitz), Errc::invalid_argument,
          fmt::format("L0 must be positive and finite, got {}", k.lipschitz));
  require(k.second_moment >= 0.0 && k.delta >= 0.0, Errc::invalid_argument,
          "Q and Delta must be nonnegative");
  require(k.d > 0, Errc::invalid_argument, "dimension must be positive");
  require(k.kappa > 0.0, Errc::invalid_argument, "kappa must be positive");

  Derivation out;
  out.constants = constants_c1_c2(rho, 0.0, 1);
  const auto d = static_cast<double>(k.d);
  const double l0 = k.lipschitz;
  const double uq = upsilon(mode, k.d) * k.second_moment;
  const double e2 = targets.eps_stationary;
  SPAConfig& cfg = out.config;
  cfg.rho = rho;
  cfg.tau = 0.0;
  cfg.mode = mode;
  cfg.delta = k.delta;
  cfg.seed = seed;

  if (targets.criterion == Criterion::eps12) {
    const double e1 = targets.eps_smoothing;
    cfg.alpha = e1 / (l0 * std::sqrt(d / 12.0));
    require(k.kappa > cfg.alpha / 2.0, Errc::infeasible_config,
            fmt::format("kappa = {} leaves no room for a box: need kappa > alpha/2 = {}",
                        k.kappa, cfg.alpha / 2.0));
    out.box.beta = 0.99 * (k.kappa - cfg.alpha / 2.0);
    cfg.iterations = ceil_count(
        out.constants.c1 * std::sqrt(4.0 / 3.0) * d * l0 * l0 * k.delta / (e1 * e2 * e2),
        "K");
  } else {
    const double e3 = targets.eps_smoothing;
    cfg.alpha = 2.0 * e3 / std::sqrt(d);
    require(k.kappa > e3, Errc::infeasible_config,
            fmt::format("kappa = {} is too small for eps3 = {}: need kappa > beta + eps3, "
                        "so kappa must exceed {}",
                        k.kappa, e3, e3));
    out.box.beta = 0.99 * (k.kappa - e3);
    cfg.iterations = ceil_count(
        out.constants.c1 * 2.0 * d * l0 * k.delta / (e3 * e2 * e2), "K");
  }
  out.box.kappa = k.kappa;
  validate_box(out.box, cfg.alpha);
  cfg.batch = ceil_count(out.constants.c2 * 2.0 * uq / (e2 * e2), "M");
  cfg.eta = cfg.alpha / (3.0 * rho * std::sqrt(d) * l0);
  out.d = k.d;
  out.alpha_hat = SmoothingParams(cfg.alpha, k.d).alpha_hat();
  out.bound = expected_stationarity_bound(out.constants, cfg.alpha, k.d, l0, k.delta,
                                          cfg.iterations, cfg.batch, uq);
  return out;
}

void DerivationOverrides::apply(Derivation& derivation, double lipschitz,
                                double upsilon_q) const {
  SPAConfig& cfg = derivation.config;
  if (beta) {
    derivation.box.beta = *beta;
    validate_box(derivation.box, cfg.alpha);
  }
  if (iterations) {
    require(*iterations >= 1, Errc::invalid_argument, "K override must be at least 1");
    cfg.iterations = *iterations;
  }
  if (batch) {
    require(*batch >= 1, Errc::invalid_argument, "M override must be at least 1");
    cfg.batch = *batch;
  }
  derivation.bound = expected_stationarity_bound(derivation.constants, cfg.alpha,
                                                 derivation.d, lipschitz,
                                                 cfg.delta, cfg.iterations, cfg.batch,
                                                 upsilon_q);
}

std::uint64_t draw_stopping_index(std::uint64_t seed, std::uint64_t iterations) {
  require(iterations >= 1, Errc::invalid_argument, "K must be at least 1");
  Stream stream(seed, 0, 0, StreamTag::stopping_index);
  return static_cast<std::uint64_t>(
      stream.uniform_int(2, static_cast<std::int64_t>(iterations) + 1));
}

std::vector<std::string> collapsed_layers(std::span<const double> w,
                                          const GroupPartition& part,
                                          const std::vector<LayerBlock>& blocks) {
  std::vector<std::string> out;
  for (const auto& block : blocks) {
    require(block.first_group + block.group_count <= part.groups(), Errc::invalid_argument,
            fmt::format("layer {} extends past the partition", block.name));
    bool any = false;
    for (std::size_t g = block.first_group; g < block.first_group + block.group_count; ++g) {
      if (group_nonzero(w, part, g)) {
        any = true;
        break;
      }
    }
    if (!any) out.push_back(block.name);
  }
  return out;
}

namespace {

std::string collapse_warning(const std::vector<std::string>& layers, const char* when) {
  std::string names;
  for (const auto& n : layers) names += (names.empty() ? "" : ",") + n;
  return fmt::format("layer collapse {}: {}", when, names);
}

}  // namespace

Initialization initialize(const StochasticProblem& problem, const GroupPartition& part,
                          const BoxParams& box, std::uint64_t seed,
                          std::optional<std::span<const double>> w0) {
  const auto blocks = problem.layer_blocks();
  Initialization init;
  if (w0) {
    require(w0->size() == problem.dim(), Errc::dimension_mismatch,
            "initial point has the wrong length");
    init.w = project(*w0, part, box);
    init.attempts = 1;
    const auto collapsed = collapsed_layers(init.w, part, blocks);
    if (!collapsed.empty()) {
      init.warnings.push_back(collapse_warning(collapsed, "at initialization"));
    }
    return init;
  }
  std::vector<std::string> collapsed;
  for (std::size_t attempt = 0; attempt <= kInitRedraws; ++attempt) {
    Stream stream(seed, attempt, 0, StreamTag::initialization);
    init.w = project(problem.initial_point(stream), part, box);
    init.attempts = attempt + 1;
    collapsed = collapsed_layers(init.w, part, blocks);
    if (collapsed.empty()) break;
  }
  if (!collapsed.empty()) {
    init.warnings.push_back(collapse_warning(
        collapsed,
        fmt::format("after {} initialization attempts", init.attempts).c_str()));
  }
  return init;
}

RunResult run_spa(const StochasticProblem& problem, const GroupPartition& part,
                  const BoxParams& box, const SPAConfig& config,
                  std::span<const double> w1, const RunOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  const std::size_t d = problem.dim();
  require(part.dim() == d, Errc::dimension_mismatch,
          fmt::format("partition dimension {} differs from problem dimension {}",
                      part.dim(), d));
  require(w1.size() == d, Errc::dimension_mismatch, "w1 has the wrong length");
  require(config.eta >= 0.0 && std::isfinite(config.eta), Errc::invalid_argument,
          "step size must be finite and nonnegative");
  require(config.iterations >= 1 && config.batch >= 1, Errc::invalid_argument,
          "K and M must be at least 1");
  if (config.alpha > 0.0) validate_box(box, config.alpha);
  if (options.project) {
    require(is_feasible(w1, part, box), Errc::infeasible_point,
            "w1 is not in C ∩ box; project it first");
  }
  const SmoothingParams params(config.alpha, d);

  RunResult result;
  result.seed = config.seed;
  result.R = options.stopping_index.value_or(draw_stopping_index(config.seed, config.iterations));
  require(result.R >= 2 && result.R <= config.iterations + 1, Errc::invalid_argument,
          fmt::format("stopping index {} outside [2, {}]", result.R, config.iterations + 1));
  const std::uint64_t every = options.trace_every > 0
                                  ? options.trace_every
                                  : (config.iterations + 99) / 100;
  const auto blocks = problem.layer_blocks();
  std::vector<std::string> reported;

  std::vector<double> w(w1.begin(), w1.end());
  std::vector<double> y(d);
  if (options.record_trace) result.trace.reserve(result.R - 1);
  for (std::uint64_t k = 1; k < result.R; ++k) {
    const GradientEstimate g =
        minibatch_estimate(problem, w, config.batch, config.mode, params,
                           {config.seed, k}, {options.perturb, options.jobs});
    result.gradient_calls += config.batch;
    for (std::size_t j = 0; j < d; ++j) y[j] = w[j] - config.eta * g.g[j];
    std::vector<double> next;
    if (options.project) {
      next = project(y, part, box);
      ++result.projections;
      if (!is_feasible(next, part, box)) {
        fail(Errc::infeasible_point, fmt::format("iterate {} left C ∩ box", k + 1));
      }
    } else {
      next = y;
    }

    if (!blocks.empty()) {
      const auto collapsed = collapsed_layers(next, part, blocks);
      std::vector<std::string> fresh;
      for (const auto& name : collapsed) {
        if (std::find(reported.begin(), reported.end(), name) == reported.end()) {
          fresh.push_back(name);
          reported.push_back(name);
        }
      }
      if (!fresh.empty()) {
        result.warnings.push_back(
            collapse_warning(fresh, fmt::format("at iteration {}", k + 1).c_str()));
      }
    }

    if (options.record_trace) {
      TraceRecord rec;
      rec.k = k;
      rec.step_norm = norm2(next, w);
      rec.feasible_groups = active_groups(next, part);
      if (k % every == 0 && options.holdout_batch > 0) {
        double total = 0.0;
        for (std::size_t i = 0; i < options.holdout_batch; ++i) {
          Stream hs(config.seed, k, i, StreamTag::holdout);
          total += problem.value(next, problem.sample_xi(hs));
        }
        rec.fhat = total / static_cast<double>(options.holdout_batch);
      }
      result.trace.push_back(rec);
    }
    w = std::move(next);
  }
  result.w = std::move(w);
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

double estimated_stationarity(const StochasticProblem& problem, const GroupPartition& part,
                              const BoxParams& box, std::span<const double> w,
                              EstimatorMode mode, double alpha, std::size_t samples,
                              std::uint64_t seed, std::size_t jobs) {
  const SmoothingParams params(alpha, problem.dim());
  const auto g = minibatch_estimate(problem, w, samples, mode, params, {seed, 0},
                                    {alpha > 0.0, jobs});
  return stationarity_distance(g.g, w, part, box);
}

HighProbabilityPlan plan_high_probability(const HighProbabilityTargets& hp, double eps,
                                          double upsilon_q) {
  require(hp.gamma > 0.0 && hp.gamma < 1.0, Errc::invalid_argument,
          "gamma must lie in (0, 1)");
  require(hp.c > 0.0 && hp.c < 1.0, Errc::invalid_argument, "c must lie in (0, 1)");
  require(hp.phi > 1.0, Errc::invalid_argument, "phi must exceed 1");
  require(eps > 0.0 && upsilon_q >= 0.0, Errc::invalid_argument,
          "need eps > 0 and upsilon Q >= 0");
  HighProbabilityPlan plan;
  const double r = std::ceil(-std::log(hp.c * hp.gamma));
  plan.runs = static_cast<std::size_t>(std::max(1.0, r));
  plan.psi = static_cast<double>(plan.runs) / ((1.0 - hp.c) * hp.gamma);
  plan.samples = ceil_count(6.0 * hp.phi * plan.psi * upsilon_q / (eps * eps), "T");
  const double slack =
      eps * eps - 6.0 * plan.psi * upsilon_q / static_cast<double>(plan.samples);
  if (!(slack > 0.0)) {
    fail(Errc::infeasible_config,
         fmt::format("shrunken target is not positive (eps^2 - 6 psi upsilon Q / T = {}); "
                     "increase phi above {}",
                     slack, hp.phi));
  }
  plan.eps_prime = std::sqrt(slack / (4.0 * std::numbers::e));
  return plan;
}

std::size_t argmin_distance(std::span<const double> distances) {
  require(!distances.empty(), Errc::invalid_argument, "no candidates to select from");
  std::size_t best = 0;
  for (std::size_t i = 1; i < distances.size(); ++i) {
    if (distances[i] < distances[best]) best = i;
  }
  return best;
}

Selection select_candidate(const StochasticProblem& problem, const GroupPartition& part,
                           const BoxParams& box,
                           const std::vector<std::vector<double>>& candidates,
                           EstimatorMode mode, double alpha, std::uint64_t samples,
                           std::uint64_t seed, std::size_t jobs) {
  Selection sel;
  for (const auto& w : candidates) {
    sel.distances.push_back(
        estimated_stationarity(problem, part, box, w, mode, alpha, samples, seed, jobs));
  }
  sel.index = argmin_distance(sel.distances);
  return sel;
}

HighProbabilityResult run_high_probability(const StochasticProblem& problem,
                                           const GroupPartition& part,
                                           const Targets& targets,
                                           const ProblemConstants& constants,
                                           const HighProbabilityTargets& hp, double rho,
                                           EstimatorMode mode, std::uint64_t seed,
                                           const RunOptions& options,
                                           const DerivationOverrides& overrides) {
  HighProbabilityResult out;
  const double uq = upsilon(mode, constants.d) * constants.second_moment;
  out.plan = plan_high_probability(hp, targets.eps_stationary, uq);
  Targets shrunk = targets;
  shrunk.eps_stationary = out.plan.eps_prime;
  out.derivation = derive_params(shrunk, constants, rho, mode, seed);
  overrides.apply(out.derivation, constants.lipschitz, uq);
  const BoxParams& box = out.derivation.box;

  std::vector<std::vector<double>> candidates;
  for (std::size_t l = 0; l < out.plan.runs; ++l) {
    SPAConfig cfg = out.derivation.config;
    cfg.seed = derive_seed(seed, l);
    const auto init = initialize(problem, part, box, cfg.seed);
    RunResult run = run_spa(problem, part, box, cfg, init.w, options);
    run.warnings.insert(run.warnings.begin(), init.warnings.begin(), init.warnings.end());
    candidates.push_back(run.w);
    out.runs.push_back(std::move(run));
  }
  out.selection = select_candidate(problem, part, box, candidates, mode,
                                   out.derivation.config.alpha, out.plan.samples,
                                   selection_seed(seed), options.jobs);
  return out;
}

std::vector<Targets> geometric_schedule(double eps3, double eps4, std::size_t stages) {
  require(stages >= 1, Errc::invalid_argument, "need at least one stage");
  std::vector<Targets> out;
  double scale = 1.0;
  for (std::size_t i = 0; i < stages; ++i) {
    out.push_back({Criterion::eps34, eps3 * scale, eps4 * scale});
    scale /= 2.0;
  }
  return out;
}

std::vector<Stage> run_asymptotic(const StochasticProblem& problem,
                                  const GroupPartition& part,
                                  const std::vector<Targets>& schedule,
                                  const ProblemConstants& constants, double rho,
                                  EstimatorMode mode, std::uint64_t seed,
                                  std::size_t stationarity_samples,
                                  const RunOptions& options,
                                  const DerivationOverrides& overrides) {
  require(!schedule.empty(), Errc::invalid_argument, "empty schedule");
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const auto& t = schedule[i];
    require(t.eps_smoothing > 0.0 && t.eps_stationary > 0.0, Errc::invalid_argument,
            fmt::format("stage {} has a nonpositive target", i + 1));
    if (i > 0) {
      require(t.eps_smoothing < schedule[i - 1].eps_smoothing &&
                  t.eps_stationary < schedule[i - 1].eps_stationary,
              Errc::invalid_argument,
              fmt::format("schedule must be strictly decreasing (stage {})", i + 1));
    }
  }
  std::vector<Stage> stages;
  const double uq = upsilon(mode, constants.d) * constants.second_moment;
  BoxParams box;
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    Stage stage;
    stage.targets = schedule[i];
    stage.targets.criterion = Criterion::eps34;
    const std::uint64_t stage_seed = derive_seed(seed, i);
    stage.derivation = derive_params(stage.targets, constants, rho, mode, stage_seed);
    if (i == 0) {
      overrides.apply(stage.derivation, constants.lipschitz, uq);
      box = stage.derivation.box;
    } else {
      stage.derivation.box = box;
      DerivationOverrides rest = overrides;
      rest.beta.reset();
      rest.apply(stage.derivation, constants.lipschitz, uq);
    }
    const auto init = initialize(problem, part, box, stage_seed);
    stage.run = run_spa(problem, part, box, stage.derivation.config, init.w, options);
    stage.run.warnings.insert(stage.run.warnings.begin(), init.warnings.begin(),
                              init.warnings.end());
    stage.stationarity = estimated_stationarity(
        problem, part, box, stage.run.w, mode, stage.derivation.config.alpha,
        stationarity_samples, selection_seed(stage_seed), options.jobs);
    stages.push_back(std::move(stage));
  }
  return stages;
}

}  // namespace gl0
