// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failed criteria (capped at 100). `--only N` runs a single criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "gl0/gl0.hpp"
#include "oracles.hpp"
#include "pipeline.hpp"

namespace {

using namespace gl0;
using gl0::testing::brute_projection_sq_distance;
using gl0::testing::brute_stationarity;
using gl0::testing::random_feasible_point;
using gl0::testing::random_integer_instance;
using gl0::testing::random_partition;
using gl0::testing::random_real_instance;

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Check {
  int id;
  const char* title;
  double limit_seconds;
  Outcome (*run)();
};

double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

/// Same leading three significant digits after rounding.
bool same_3sf(double actual, double expected) {
  const double scale = std::pow(10.0, std::floor(std::log10(std::abs(expected))) - 2);
  return std::round(actual / scale) == std::round(expected / scale);
}

// --- 1 -------------------------------------------------------------------

Outcome small_constants_table() {
  struct Row {
    double rho;
    int c1, c2;
    const char* label;
  };
  const Row rows[] = {{4.0 / 3.0, 34, 33, "4/3"},
                      {5.0 / 3.0, 23, 21, "5/3"},
                      {2.0, 20, 17, "2"},
                      {5.0, 23, 11, "5"}};
  Outcome out{true, ""};
  for (const auto& r : rows) {
    const auto c = constants_c1_c2(r.rho);
    const bool ok = std::abs(c.c1 - r.c1) < 1e-9 && std::abs(c.c2 - r.c2) < 1e-9;
    out.pass = out.pass && ok;
    out.detail += fmt::format("{}rho={} -> ({:.12g}, {:.12g}){}", out.detail.empty() ? "" : "; ",
                              r.label, c.c1, c.c2, ok ? "" : fmt::format(" want ({}, {})", r.c1, r.c2));
  }
  return out;
}

// --- 2 -------------------------------------------------------------------

Outcome large_net_rows() {
  struct Row {
    const char* name;
    double l0, q, delta, rho, kappa;
    double alpha, beta, eta, k;
    std::uint64_t m;
  };
  // Both rows share the network (d = 44426) and targets eps1 = eps2 = 1/3.
  const Row rows[] = {
      {"MN", 8.53e-2, 7.49e-3, 2.31, 2.5, 0.2, 6.42e-2, 1.66e-1, 4.76e-4, 4.38e5, 2},
      {"FMN", 1.09e-1, 1.22e-2, 2.30, 2.75, 0.22, 5.05e-2, 1.93e-1, 2.68e-4, 7.07e5, 3},
  };
  Outcome out{true, ""};
  for (const auto& r : rows) {
    const Targets t{gl0::Criterion::eps12, 1.0 / 3.0, 1.0 / 3.0};
    const ProblemConstants pc{r.l0, r.q, r.delta, 44426, r.kappa};
    const auto d = derive_params(t, pc, r.rho, EstimatorMode::first);
    const auto& c = d.config;
    std::vector<std::string> misses;
    const auto check = [&](const char* what, double got, double want) {
      if (!same_3sf(got, want)) misses.push_back(fmt::format("{} {:.4g} vs {:.3g}", what, got, want));
    };
    check("alpha", c.alpha, r.alpha);
    check("beta", d.box.beta, r.beta);
    check("eta", c.eta, r.eta);
    check("K", static_cast<double>(c.iterations), r.k);
    if (c.batch != r.m) misses.push_back(fmt::format("M {} vs {}", c.batch, r.m));
    out.pass = out.pass && misses.empty();
    std::string row = fmt::format("{}: alpha={:.4g} beta={:.4g} eta={:.4g} K={} M={}", r.name,
                                  c.alpha, d.box.beta, c.eta, c.iterations, c.batch);
    if (!misses.empty()) {
      row += " [mismatch:";
      for (const auto& m : misses) row += " " + m + ";";
      row += "]";
    }
    out.detail += (out.detail.empty() ? "" : " | ") + row;
  }
  return out;
}

// --- 3 -------------------------------------------------------------------

Outcome projection_oracle() {
  Stream rng(3003);
  const double betas[] = {0.5, 1.0, kInf};
  std::size_t failures = 0;
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 1 + rng.uniform_index(12);
    const auto part = random_partition(rng, n, 4, rng.uniform01() < 0.5);
    const double beta = betas[t % 3];
    std::vector<double> w(part.dim());
    for (double& x : w) x = rng.uniform(-2.0, 2.0);
    const auto p = project(w, part, {beta, kInf});
    double dist = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) dist += (w[j] - p[j]) * (w[j] - p[j]);
    const double ref = brute_projection_sq_distance(w, part, beta);
    const double err = std::abs(dist - ref) / std::max(ref, 1e-300);
    worst = std::max(worst, ref == 0.0 ? dist : err);
    if (!(ref == 0.0 ? dist == 0.0 : err <= 1e-9) || !is_feasible(p, part, {beta, kInf})) {
      ++failures;
    }
  }
  return {failures == 0,
          fmt::format("1000 instances, {} mismatches, max rel err {:.2e}", failures, worst)};
}

// --- 4 -------------------------------------------------------------------

Outcome knapsack_oracles() {
  Stream rng(4004);
  std::size_t dp_fail = 0, ex_fail = 0;
  double worst = 0.0;
  for (int t = 0; t < 500; ++t) {
    const auto inst = random_integer_instance(rng, 100);
    const auto a = solve_bnb(inst);
    const auto b = solve_dp(inst);
    if (a.objective != b.objective) ++dp_fail;
  }
  for (int t = 0; t < 500; ++t) {
    const auto inst = random_real_instance(rng, 20);
    const auto a = solve_bnb(inst);
    const auto b = solve_exhaustive(inst);
    const double err = rel_err(a.objective, b.objective);
    worst = std::max(worst, err);
    if (err > 1e-9) ++ex_fail;
  }
  return {dp_fail == 0 && ex_fail == 0,
          fmt::format("bnb vs dp: {}/500 mismatches (exact); bnb vs exhaustive: {}/500 "
                      "mismatches, max rel err {:.2e}",
                      dp_fail, ex_fail, worst)};
}

// --- 5 -------------------------------------------------------------------

/// Adds random entries to every group that still fits, so J(w) is empty.
void fill_support(Stream& rng, std::vector<double>& w, const GroupPartition& part, double beta) {
  double used = 0.0;
  for (std::size_t i = 0; i < part.groups(); ++i) {
    if (gl0::testing::nonzero_group(w, part, i)) used += part.penalties()[i];
  }
  for (std::size_t i = 0; i < part.groups(); ++i) {
    if (gl0::testing::nonzero_group(w, part, i)) continue;
    if (used + part.penalties()[i] > part.budget()) continue;
    used += part.penalties()[i];
    for (std::size_t j = 0; j < part.size(i); ++j) {
      w[part.offset(i) + j] = rng.uniform(0.1, 0.9) * beta * (rng.uniform01() < 0.5 ? -1 : 1);
    }
  }
}

Outcome stationarity_routes() {
  Stream rng(5005);
  std::size_t closed = 0, failures = 0;
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + rng.uniform_index(9);
    const auto part = random_partition(rng, n, 3, true);
    const double beta = t % 4 == 3 ? kInf : rng.uniform(0.5, 1.5);
    const BoxParams box{beta, kInf};
    auto w = random_feasible_point(rng, part, beta);
    if (t % 2 == 0) fill_support(rng, w, part, std::isfinite(beta) ? beta : 1.0);
    std::vector<double> g(part.dim());
    for (double& x : g) x = rng.uniform(-1.0, 1.0);

    const double bip = stationarity_distance(g, w, part, box, StationarityMethod::integer_program);
    const double en = stationarity_distance(g, w, part, box, StationarityMethod::enumerate);
    const double brute = brute_stationarity(g, w, part, beta);
    double err = std::max(rel_err(bip, en), rel_err(en, brute));
    if (index_sets(w, part, false).closed_form()) {
      ++closed;
      const double cf = stationarity_distance(g, w, part, box, StationarityMethod::automatic);
      err = std::max(err, rel_err(cf, en));
    }
    worst = std::max(worst, err);
    if (err > 1e-9) ++failures;
  }
  return {failures == 0 && closed >= 50,
          fmt::format("200 instances ({} with Y = {{I}}), {} disagreements, max rel err {:.2e}",
                      closed, failures, worst)};
}

// --- 6 -------------------------------------------------------------------

struct MomentStats {
  std::vector<double> mean;
  std::vector<double> se;
  double err_sq = 0.0;   // E||G - grad f_alpha||^2
  double norm_sq = 0.0;  // E||G||^2
};

MomentStats moments(const StochasticProblem& f, const std::vector<double>& w, EstimatorMode mode,
                    double alpha, std::size_t batch, std::size_t reps, std::uint64_t seed,
                    const std::vector<double>& exact) {
  const std::size_t d = w.size();
  std::vector<double> sum(d, 0.0), sq(d, 0.0);
  double err_sq = 0.0, norm_sq = 0.0;
  const SmoothingParams params(alpha, d);
  for (std::size_t r = 0; r < reps; ++r) {
    const auto est = minibatch_estimate(f, w, batch, mode, params, {seed, r});
    for (std::size_t j = 0; j < d; ++j) {
      sum[j] += est.g[j];
      sq[j] += est.g[j] * est.g[j];
      err_sq += (est.g[j] - exact[j]) * (est.g[j] - exact[j]);
      norm_sq += est.g[j] * est.g[j];
    }
  }
  MomentStats s;
  const double n = static_cast<double>(reps);
  for (std::size_t j = 0; j < d; ++j) {
    const double m = sum[j] / n;
    s.mean.push_back(m);
    s.se.push_back(std::sqrt(std::max(sq[j] / n - m * m, 0.0) / n));
  }
  s.err_sq = err_sq / n;
  s.norm_sq = norm_sq / n;
  return s;
}

Outcome smoothing_properties() {
  const double alpha = 0.2;
  const AbsSumProblem abs1(1, 1.0, 2.0);
  const QuadraticProblem quad(5, 2.0, 0.5, {0.2, -0.1, 0.0, 0.3, -0.4});
  struct Case {
    const char* name;
    const StochasticProblem* f;
    const SmoothedClosedForm* closed;
    std::vector<std::vector<double>> points;
  };
  const std::vector<Case> cases = {
      {"|w|", &abs1, &abs1, {{-0.3}, {0.0}, {0.05}, {0.4}}},
      {"quadratic", &quad, &quad, {{0.1, 0.2, -0.3, 0.0, 0.5}, {0.0, 0.0, 0.0, 0.0, 0.0}}},
  };
  std::size_t mean_fail = 0, moment_fail = 0, bound_fail = 0, mean_checks = 0;
  double worst_z = 0.0, worst_ratio = 0.0;
  std::uint64_t seed = 600;
  for (const auto& c : cases) {
    const double q = c.f->metadata().second_moment;
    for (const auto& w : c.points) {
      const auto exact = c.closed->smoothed_gradient(w, alpha);
      for (auto mode : {EstimatorMode::zeroth, EstimatorMode::first}) {
        const double ups = upsilon(mode, w.size());
        const auto one = moments(*c.f, w, mode, alpha, 1, 100'000, ++seed, exact);
        for (std::size_t j = 0; j < w.size(); ++j) {
          ++mean_checks;
          // Zero-variance points (the whole window on one side of a kink) are
          // compared up to rounding.
          const double diff = std::abs(one.mean[j] - exact[j]);
          const double z = diff <= 1e-12 ? 0.0 : one.se[j] > 0 ? diff / one.se[j] : kInf;
          worst_z = std::max(worst_z, z);
          if (z > 4.0) ++mean_fail;
        }
        // Variance bounds at M = 1 and M = 8; norm bounds at M = 1.
        const auto eight = moments(*c.f, w, mode, alpha, 8, 20'000, ++seed, exact);
        const double ratios[] = {one.err_sq / (ups * q), eight.err_sq / (ups * q / 8),
                                 one.norm_sq / (ups * q), eight.norm_sq / (ups * q)};
        for (double r : ratios) {
          worst_ratio = std::max(worst_ratio, r);
          if (r > 1.2) ++moment_fail;
        }
      }
    }
  }
  // Uniform smoothing error on a 100-point grid.
  double worst_gap = -kInf;
  for (const auto& c : cases) {
    const std::size_t d = c.f->dim();
    const double bound = uniform_error_bound(alpha, c.f->metadata().lipschitz, d);
    for (int i = 0; i < 100; ++i) {
      const double s = -0.9 + 1.8 * i / 99.0;
      std::vector<double> w(d);
      for (std::size_t j = 0; j < d; ++j) w[j] = s * (j % 2 == 0 ? 1.0 : -0.5);
      Stream stream(++seed);
      const auto est = estimate_f_alpha(*c.f, w, SmoothingParams(alpha, d), 4000, stream);
      const double gap = std::abs(est.mean - c.closed->expected_value(w)) - bound - 3 * est.std_error;
      worst_gap = std::max(worst_gap, gap);
      if (gap > 0.0) ++bound_fail;
    }
  }
  return {mean_fail == 0 && moment_fail == 0 && bound_fail == 0,
          fmt::format("means: {}/{} beyond 4 SE (max {:.2f} SE); second moments: {} over 1.2x "
                      "(max ratio {:.3f}); uniform error: {}/200 grid points over bound + 3 SE "
                      "(max excess {:.3g})",
                      mean_fail, mean_checks, worst_z, moment_fail, worst_ratio, bound_fail,
                      worst_gap)};
}

// --- 7 -------------------------------------------------------------------

Outcome expected_stationarity_bound() {
  const std::size_t d = 10;
  const std::vector<double> center{0.6, -0.4, 0.3, 0.0, -0.8, 0.5, 0.1, -0.2, 0.7, -0.6};
  const AbsSumProblem f(d, 1.0, 1.5, 1.0, center);
  const GroupPartition part =
      GroupPartition::uniform(d, 2, GroupPartition::budget_for_sparsity(0.4, d));
  const double l0 = f.metadata().lipschitz;
  const double q = f.metadata().second_moment;
  Outcome out{true, ""};
  for (auto mode : {EstimatorMode::first, EstimatorMode::zeroth}) {
    const Targets t{gl0::Criterion::eps12, 0.5, 3.0};
    // Delta is f_alpha(w1) itself: f >= 0, so f_alpha(w1) - f_alpha(w*) <= f_alpha(w1).
    ProblemConstants pc{l0, q, 0.0, d, 1.5};
    auto deriv = derive_params(t, pc, 2.0, mode);
    const std::vector<double> w0{-0.9, 0.9, 0.9, -0.9, 0.9, 0.0, -0.9, 0.9, 0.0, 0.9};
    const auto w1 = project(w0, part, deriv.box);
    pc.delta = f.smoothed_value(w1, deriv.config.alpha);
    deriv = derive_params(t, pc, 2.0, mode);
    const double rhs = expected_stationarity_bound(
        deriv.constants, deriv.config.alpha, d, l0, pc.delta, deriv.config.iterations,
        deriv.config.batch, upsilon(mode, d) * q);

    const int runs = 50;
    double sum = 0.0, sq = 0.0;
    for (int r = 0; r < runs; ++r) {
      SPAConfig cfg = deriv.config;
      cfg.seed = derive_seed(7007, static_cast<std::uint64_t>(r) + (mode == EstimatorMode::zeroth ? 1000 : 0));
      RunOptions opt;
      opt.record_trace = false;
      const auto res = run_spa(f, part, deriv.box, cfg, w1, opt);
      const auto g = f.smoothed_gradient(res.w, cfg.alpha);
      const double dist = stationarity_distance(g, res.w, part, deriv.box);
      sum += dist * dist;
      sq += dist * dist * dist * dist;
    }
    const double mean = sum / runs;
    const double se = std::sqrt(std::max(sq / runs - mean * mean, 0.0) / runs);
    const bool ok = mean <= rhs + 3 * se;
    out.pass = out.pass && ok;
    out.detail += fmt::format("{}{}: K={} M={} E[dist^2]~{:.4g} (SE {:.2g}) vs RHS {:.4g}",
                              out.detail.empty() ? "" : "; ", to_string(mode),
                              deriv.config.iterations, deriv.config.batch, mean, se, rhs);
  }
  return out;
}

// --- 8 -------------------------------------------------------------------

Outcome backprop_rules() {
  const TinyNet net({1, 10, 10},
                    {LayerSpec::conv2d(2, 3), LayerSpec::relu(), LayerSpec::maxpool2d(2),
                     LayerSpec::affine(8), LayerSpec::relu(), LayerSpec::affine(3)},
                    3);
  Stream rng(8008);
  const double h = 1e-6;
  std::size_t points = 0, skipped = 0, failures = 0;
  double worst = 0.0;
  std::vector<double> g(net.param_count());
  while (points < 100) {
    std::vector<double> w(net.param_count()), x(100);
    for (double& v : w) v = rng.uniform(-1.0, 1.0);
    for (double& v : x) v = rng.uniform(-1.0, 1.0);
    const int y = static_cast<int>(rng.uniform_index(3));
    const double base = net.loss_and_gradient(w, x, y, g);
    std::vector<double> fd(w.size());
    bool kink = false;
    for (std::size_t j = 0; j < w.size() && !kink; ++j) {
      auto a = w, b = w;
      a[j] += h;
      b[j] -= h;
      const double up = net.loss(a, x, y), down = net.loss(b, x, y);
      // One-sided slopes that disagree mean a kink inside [w - h, w + h].
      const double fwd = (up - base) / h, bwd = (base - down) / h;
      if (std::abs(fwd - bwd) > 1e-4 * std::max(1.0, std::abs(fwd))) kink = true;
      fd[j] = (up - down) / (2 * h);
    }
    if (kink) {
      ++skipped;
      continue;
    }
    ++points;
    for (std::size_t j = 0; j < w.size(); ++j) {
      const double err = std::abs(g[j] - fd[j]) / std::max(1.0, std::abs(fd[j]));
      worst = std::max(worst, err);
      if (err > 1e-5) ++failures;
    }
  }

  // ReLU'(0) = 0: a hidden unit with preactivation exactly zero passes nothing.
  bool relu_ok = true;
  {
    const TinyNet tiny({1, 1, 2}, {LayerSpec::affine(1), LayerSpec::relu(), LayerSpec::affine(2)}, 2);
    const std::vector<double> w{1.0, -1.0, 0.0, 2.0, 0.0, -2.0, 0.0};
    std::vector<double> gt(tiny.param_count());
    tiny.loss_and_gradient(w, std::vector<double>{0.5, 0.5}, 0, gt);
    relu_ok = gt[0] == 0.0 && gt[1] == 0.0 && gt[2] == 0.0 && gt[3] == 0.0 && gt[4] != 0.0;
  }
  // Max-pool ties route to the first maximal entry in row-major order.
  bool pool_ok = true;
  {
    const TinyNet tiny({1, 3, 3},
                       {LayerSpec::conv2d(1, 2), LayerSpec::maxpool2d(2), LayerSpec::affine(2)}, 2);
    const std::vector<double> w{1, 0, 0, 0, 0, 1, 0, -1, 0};
    const std::vector<double> x{3, 3, 7, 1, 2, 5, 0, 0, 0};
    std::vector<double> gt(tiny.param_count()), dz(2);
    tiny.loss_and_gradient(w, x, 0, gt);
    (void)cross_entropy(std::vector<double>{3.0, -3.0}, 0, dz);
    const double up = dz[0] - dz[1];
    // Routed to (0, 0): the top-right tap sees x[0][1] = 3, not x[0][2] = 7.
    pool_ok = gt[0] == up * 3.0 && gt[1] == up * 3.0 && gt[2] == up * 1.0 && gt[3] == up * 2.0;
  }
  return {failures == 0 && relu_ok && pool_ok,
          fmt::format("{} params, 100 points ({} kinked draws skipped), {} coordinate "
                      "mismatches, max rel err {:.2e}; relu(0) rule {}; max-pool tie rule {}",
                      net.param_count(), skipped, failures, worst, relu_ok ? "ok" : "VIOLATED",
                      pool_ok ? "ok" : "VIOLATED")};
}

// --- 9 -------------------------------------------------------------------

Outcome desk_training() {
  const auto spec = cli::load_run_spec(GL0_SPECS_DIR "/tinynet_blobs.kv");
  auto prepared = cli::prepare_problem(spec);
  cli::resolve_constants(prepared, 1);
  const auto out = cli::train(prepared, 1);
  const auto* net = dynamic_cast<const TinyNetProblem*>(prepared.problem.get());
  if (net == nullptr) return {false, "spec does not describe a tiny net"};
  const auto& part = *prepared.part;
  double used = 0.0;
  for (std::size_t i = 0; i < part.groups(); ++i) {
    if (gl0::testing::nonzero_group(out.run.w, part, i)) used += part.penalties()[i];
  }
  const bool feasible = is_feasible(out.run.w, part, out.derivation.box) && used <= part.budget();
  const double acc = net->accuracy(out.run.w);
  const std::size_t d = net->dim();
  return {acc >= 0.9 && feasible && d <= 2000,
          fmt::format("d={} seed={} K={} M={} R={} L0^={:.3g} Q^={:.3g} Delta^={:.3g}; train "
                      "accuracy {:.3f}; group penalty {} <= budget {} ({})",
                      d, spec.seed, out.derivation.config.iterations,
                      out.derivation.config.batch, out.run.R, prepared.constants.lipschitz,
                      prepared.constants.second_moment, prepared.constants.delta, acc, used,
                      part.budget(), feasible ? "feasible" : "INFEASIBLE")};
}

// --- 10 ------------------------------------------------------------------

Outcome high_probability() {
  Outcome out{true, ""};
  const HighProbabilityTargets hp{0.1, 0.5, 2.0};
  const double eps = 0.5, ups_q = 1.0;
  const auto plan = plan_high_probability(hp, eps, ups_q);
  // By hand: r = ceil(-ln 0.05) = 3, psi = 3 / 0.05 = 60,
  // T = ceil(6 * 2 * 60 * 1 / 0.25) = 2880, eps' = sqrt((0.25 - 360 / 2880) / (4e)).
  const double eps_prime = std::sqrt((0.25 - 360.0 / 2880.0) / (4 * std::numbers::e));
  const bool plan_ok = plan.runs == 3 && std::abs(plan.psi - 60.0) < 1e-12 &&
                       plan.samples == 2880 && std::abs(plan.eps_prime - eps_prime) < 1e-15;
  out.detail = fmt::format("r={} psi={:.12g} T={} eps'={:.6g}{}", plan.runs, plan.psi,
                           plan.samples, plan.eps_prime, plan_ok ? "" : " (hand: 3, 60, 2880)");

  const AbsSumProblem f(4, 1.0, 2.0, 0.5, {0.5, -0.5, 0.25, 0.0});
  const auto part = GroupPartition::uniform(4, 1, 3.0);
  const Targets t{gl0::Criterion::eps34, 0.2, 3.0};
  const ProblemConstants pc{f.metadata().lipschitz, f.metadata().second_moment, 2.0, 4, 2.0};
  const auto res = run_high_probability(f, part, t, pc, hp, 2.0, EstimatorMode::first, 10010,
                                        {.record_trace = false});
  const auto& dist = res.selection.distances;
  const double best = *std::min_element(dist.begin(), dist.end());
  const bool select_ok = res.runs.size() == res.plan.runs && dist[res.selection.index] == best &&
                         res.best() == res.runs[res.selection.index].w;
  out.detail += fmt::format("; {} runs, selected #{} at distance {:.4g} = min {:.4g}",
                            res.runs.size(), res.selection.index, dist[res.selection.index], best);

  // The stationary point of the smoothed objective is planted at index 2.
  const std::vector<std::vector<double>> rigged{
      {0.9, 0.9, 0.9, 0.0}, {-0.9, 0.0, 0.9, 0.0}, {0.5, -0.5, 0.25, 0.0}, {0.0, 0.0, 0.0, 0.0}};
  const auto sel = select_candidate(f, part, {1.0, 2.0}, rigged, EstimatorMode::first,
                                    res.derivation.config.alpha, plan.samples, 42);
  const bool rigged_ok = sel.index == 2;
  out.detail += fmt::format("; rigged set picks #{}", sel.index);
  out.pass = plan_ok && select_ok && rigged_ok;
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks for gl0"};
  int only = 0;
  app.add_option("--only", only, "Run a single criterion (1-10)")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);

  const std::vector<Check> criteria = {
      {1, "small constants table", 1.0, small_constants_table},
      {2, "large-net parameter rows", 1.0, large_net_rows},
      {3, "projection oracle equivalence", 30.0, projection_oracle},
      {4, "knapsack oracles", 60.0, knapsack_oracles},
      {5, "stationarity distance routes", 30.0, stationarity_routes},
      {6, "smoothing unbiasedness and bounds", 120.0, smoothing_properties},
      {7, "expected stationarity bound", 300.0, expected_stationarity_bound},
      {8, "bp gradient correctness", 60.0, backprop_rules},
      {9, "desk-scale tiny net training", 180.0, desk_training},
      {10, "high-probability wrapper", 60.0, high_probability},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, fmt::format("threw: {}", e.what())};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.limit_seconds;
    const bool pass = out.pass && in_time;
    if (!pass) ++failed;
    std::printf("[%s] %d %s: %s (%.2f s, limit %.0f s%s)\n", pass ? "PASS" : "FAIL", c.id,
                c.title, out.detail.c_str(), secs, c.limit_seconds,
                in_time ? "" : ", OVER TIME");
    std::fflush(stdout);
  }
  return std::min(failed, 100);
}
