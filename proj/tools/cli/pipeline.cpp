#include "pipeline.hpp"

#include <cmath>

#include <fmt/format.h>

#include "gl0/error.hpp"
#include "gl0/tinynet.hpp"

namespace gl0::cli {

std::string fmt_double(double x) { return fmt::format("{:.17g}", x); }

Prepared prepare_problem(const RunSpec& spec) {
  Prepared p;
  p.spec = spec;
  p.problem = builtin_problem(spec.problem, spec.problem_options, spec.base_dir.string());
  const std::size_t d = p.problem->dim();

  auto budget_for = [&](std::size_t total) -> double {
    if (spec.sparsity) return GroupPartition::budget_for_sparsity(*spec.sparsity, total);
    require(spec.budget.has_value(), Errc::parse_error,
            "missing key 'budget' or 'sparsity'");
    return *spec.budget;
  };

  if (const auto* net = dynamic_cast<const TinyNetProblem*>(p.problem.get())) {
    require(!spec.partition_file && !spec.group_size, Errc::parse_error,
            "tiny nets group parameters by neuron and filter; drop 'partition' and "
            "'group_size'");
    const auto dims = net->net().group_dims();
    std::vector<double> penalties(dims.begin(), dims.end());
    p.part = std::make_unique<GroupPartition>(dims, std::move(penalties), budget_for(d));
  } else if (spec.partition_file) {
    GroupPartition file = read_partition(*spec.partition_file);
    if (spec.budget || spec.sparsity) {
      std::vector<std::size_t> dims(file.dims().begin(), file.dims().end());
      std::vector<double> pen(file.penalties().begin(), file.penalties().end());
      file = GroupPartition(std::move(dims), std::move(pen), budget_for(file.dim()));
    }
    p.part = std::make_unique<GroupPartition>(std::move(file));
  } else {
    p.part = std::make_unique<GroupPartition>(
        GroupPartition::uniform(d, spec.group_size.value_or(1), budget_for(d)));
  }
  require(p.part->dim() == d, Errc::dimension_mismatch,
          fmt::format("partition covers {} coordinates but the problem has {}",
                      p.part->dim(), d));
  p.constants.d = d;
  p.constants.kappa = spec.kappa;
  return p;
}

void resolve_constants(Prepared& p, std::size_t jobs, bool force_estimate) {
  const RunSpec& spec = p.spec;
  require(spec.targets.has_value(), Errc::parse_error,
          "missing targets: give eps1 and eps2, or eps3 and eps4");
  const auto& meta = p.problem->metadata();

  if (spec.lipschitz && spec.second_moment) {
    p.constants.lipschitz = *spec.lipschitz;
    p.constants.second_moment = *spec.second_moment;
    p.notes.emplace_back("L0_source", "given");
  } else if (!spec.lipschitz && !spec.second_moment && meta.known() && !force_estimate) {
    p.constants.lipschitz = meta.lipschitz;
    p.constants.second_moment = meta.second_moment;
    p.notes.emplace_back("L0_source", "declared");
  } else {
    LipschitzOptions opt;
    opt.q = spec.q;
    opt.jobs = jobs;
    p.lipschitz_estimate = estimate_l0_q(*p.problem, spec.kappa, spec.seed, opt);
    p.constants.lipschitz = spec.lipschitz.value_or(p.lipschitz_estimate->l0_hat);
    p.constants.second_moment = spec.second_moment.value_or(p.lipschitz_estimate->q_hat);
    p.notes.emplace_back("L0_source", "estimated");
  }

  if (spec.delta) {
    p.constants.delta = *spec.delta;
    p.notes.emplace_back("Delta_source", "given");
    return;
  }
  // alpha and beta do not depend on Delta.
  ProblemConstants probe = p.constants;
  probe.delta = 0.0;
  Derivation pre = derive_params(*spec.targets, probe, spec.rho, spec.mode, spec.seed);
  DerivationOverrides box_only;
  box_only.beta = spec.beta;
  box_only.apply(pre, probe.lipschitz, 0.0);

  DeltaOptions opt;
  opt.starts = spec.delta_starts;
  opt.samples = spec.delta_samples;
  opt.jobs = jobs;
  const std::uint64_t delta_seed = derive_seed(spec.seed, 0xde17a);
  if (spec.delta_method == "estimate") {
    const auto est =
        estimate_delta(*p.problem, *p.part, pre.box, pre.config.alpha, delta_seed, opt);
    p.constants.delta = est.delta;
    p.notes.emplace_back("Delta_source", "estimated");
  } else {
    Stream init(delta_seed, 0, 0, StreamTag::initialization);
    const auto w1 = project(p.problem->initial_point(init), *p.part, pre.box);
    const double f_w1 = estimate_delta_at(*p.problem, w1, 0.0, delta_seed, opt);
    p.constants.delta = delta_bound(f_w1, 0.0, p.constants.lipschitz, p.constants.d,
                                    pre.config.alpha, pre.box.beta);
    p.notes.emplace_back("Delta_source", "bound");
  }
}

Derivation derive(const Prepared& p) {
  Derivation out = derive_params(*p.spec.targets, p.constants, p.spec.rho, p.spec.mode,
                                 p.spec.seed);
  p.spec.overrides().apply(out, p.constants.lipschitz,
                           upsilon(p.spec.mode, p.constants.d) * p.constants.second_moment);
  return out;
}

std::string format_trace(const RunResult& run) {
  std::string out = "k,fhat,step_norm,feasible_groups\n";
  for (const auto& r : run.trace) {
    out += fmt::format("{},{},{},{}\n", r.k, std::isnan(r.fhat) ? "" : fmt_double(r.fhat),
                       fmt_double(r.step_norm), r.feasible_groups);
  }
  return out;
}

void write_run(const std::filesystem::path& dir, const RunResult& run, KeyValues summary) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(Errc::io_error, fmt::format("cannot create '{}': {}", dir.string(), ec.message()));
  const auto trace = dir / "trace.csv";
  const auto solution = dir / "solution.vec";
  write_text(trace.string(), format_trace(run));
  write_vector(solution.string(), run.w);
  summary.emplace_back("trace", trace.string());
  summary.emplace_back("solution", solution.string());
  write_text((dir / "summary.kv").string(), format_key_values(summary));
}

namespace {

void describe(KeyValues& s, const Prepared& p, const Derivation& deriv) {
  const auto& cfg = deriv.config;
  s.emplace_back("problem", p.problem->name());
  s.emplace_back("d", std::to_string(p.constants.d));
  s.emplace_back("groups", std::to_string(p.part->groups()));
  s.emplace_back("budget", fmt_double(p.part->budget()));
  s.emplace_back("kappa", fmt_double(deriv.box.kappa));
  s.emplace_back("beta", fmt_double(deriv.box.beta));
  s.emplace_back("alpha", fmt_double(cfg.alpha));
  s.emplace_back("alpha_hat", fmt_double(deriv.alpha_hat));
  s.emplace_back("eta", fmt_double(cfg.eta));
  s.emplace_back("K", std::to_string(cfg.iterations));
  s.emplace_back("M", std::to_string(cfg.batch));
  s.emplace_back("rho", fmt_double(cfg.rho));
  s.emplace_back("tau", fmt_double(cfg.tau));
  s.emplace_back("C1", fmt_double(deriv.constants.c1));
  s.emplace_back("C2", fmt_double(deriv.constants.c2));
  s.emplace_back("mode", to_string(cfg.mode));
  s.emplace_back("L0", fmt_double(p.constants.lipschitz));
  s.emplace_back("Q", fmt_double(p.constants.second_moment));
  s.emplace_back("Delta", fmt_double(p.constants.delta));
  for (const auto& note : p.notes) s.push_back(note);
  s.emplace_back("bound", fmt_double(deriv.bound));
  s.emplace_back("seed", std::to_string(p.spec.seed));
}

void describe_point(KeyValues& s, const Prepared& p, const BoxParams& box,
                    std::span<const double> w) {
  s.emplace_back("active_groups", std::to_string(active_groups(w, *p.part)));
  s.emplace_back("active_penalty", fmt_double(active_penalty(w, *p.part)));
  s.emplace_back("feasible", is_feasible(w, *p.part, box) ? "true" : "false");
  if (const auto* net = dynamic_cast<const TinyNetProblem*>(p.problem.get())) {
    s.emplace_back("train_accuracy", fmt_double(net->accuracy(w)));
    s.emplace_back("train_loss", fmt_double(net->mean_loss(w)));
  }
}

void describe_warnings(KeyValues& s, const std::vector<std::string>& warnings) {
  s.emplace_back("warning_count", std::to_string(warnings.size()));
  for (std::size_t i = 0; i < warnings.size(); ++i) {
    s.emplace_back(fmt::format("warning.{}", i + 1), warnings[i]);
  }
}

}  // namespace

TrainOutput train(const Prepared& p, std::size_t jobs) {
  TrainOutput out;
  const RunSpec& spec = p.spec;
  out.derivation = derive(p);
  const BoxParams& box = out.derivation.box;

  std::optional<std::vector<double>> w0;
  if (spec.init) w0 = read_vector(*spec.init);
  out.init = w0 ? initialize(*p.problem, *p.part, box, spec.seed, std::span<const double>(*w0))
                : initialize(*p.problem, *p.part, box, spec.seed);
  out.run = run_spa(*p.problem, *p.part, box, out.derivation.config, out.init.w,
                    spec.run_options(jobs));
  // The normal cone is only defined on C; unprojected SGD reports NaN.
  out.stationarity = spec.project
                         ? estimated_stationarity(*p.problem, *p.part, box, out.run.w,
                                                  spec.mode, out.derivation.config.alpha,
                                                  spec.stationarity_samples,
                                                  derive_seed(spec.seed, 0x57a7), jobs)
                         : std::numeric_limits<double>::quiet_NaN();

  KeyValues& s = out.summary;
  s.emplace_back("command", "train");
  describe(s, p, out.derivation);
  s.emplace_back("R", std::to_string(out.run.R));
  s.emplace_back("stationarity", fmt_double(out.stationarity));
  s.emplace_back("stationarity_samples", std::to_string(spec.stationarity_samples));
  describe_point(s, p, box, out.run.w);
  s.emplace_back("init_attempts", std::to_string(out.init.attempts));
  std::vector<std::string> warnings = out.init.warnings;
  warnings.insert(warnings.end(), out.run.warnings.begin(), out.run.warnings.end());
  describe_warnings(s, warnings);
  s.emplace_back("gradient_calls", std::to_string(out.run.gradient_calls));
  s.emplace_back("wall_seconds", fmt::format("{:.3f}", out.run.wall_seconds));
  return out;
}

HpOutput hp_train(const Prepared& p, std::size_t jobs) {
  const RunSpec& spec = p.spec;
  require(!spec.init, Errc::parse_error, "'init' is not supported by hp-train");
  HpOutput out;
  out.result = run_high_probability(*p.problem, *p.part, *spec.targets, p.constants, spec.hp,
                                    spec.rho, spec.mode, spec.seed, spec.run_options(jobs),
                                    spec.overrides());
  const auto& res = out.result;
  const auto& best = res.runs[res.selection.index];
  KeyValues& s = out.summary;
  s.emplace_back("command", "hp-train");
  describe(s, p, res.derivation);
  s.emplace_back("gamma", fmt_double(spec.hp.gamma));
  s.emplace_back("c", fmt_double(spec.hp.c));
  s.emplace_back("phi", fmt_double(spec.hp.phi));
  s.emplace_back("r", std::to_string(res.plan.runs));
  s.emplace_back("psi", fmt_double(res.plan.psi));
  s.emplace_back("T", std::to_string(res.plan.samples));
  s.emplace_back("eps_prime", fmt_double(res.plan.eps_prime));
  for (std::size_t i = 0; i < res.runs.size(); ++i) {
    s.emplace_back(fmt::format("run.{}.R", i + 1), std::to_string(res.runs[i].R));
    s.emplace_back(fmt::format("run.{}.distance", i + 1),
                   fmt_double(res.selection.distances[i]));
  }
  s.emplace_back("selected", std::to_string(res.selection.index + 1));
  s.emplace_back("R", std::to_string(best.R));
  s.emplace_back("stationarity", fmt_double(res.selection.distances[res.selection.index]));
  describe_point(s, p, res.derivation.box, best.w);
  std::vector<std::string> warnings;
  double wall = 0.0;
  for (const auto& run : res.runs) {
    warnings.insert(warnings.end(), run.warnings.begin(), run.warnings.end());
    wall += run.wall_seconds;
  }
  describe_warnings(s, warnings);
  s.emplace_back("wall_seconds", fmt::format("{:.3f}", wall));
  return out;
}

AsymptoticOutput asymptotic(const Prepared& p, std::size_t jobs) {
  const RunSpec& spec = p.spec;
  require(spec.targets->criterion == Criterion::eps34, Errc::parse_error,
          "asymptotic runs need eps3 and eps4");
  require(!spec.init, Errc::parse_error, "'init' is not supported by asymptotic");
  AsymptoticOutput out;
  const auto schedule = geometric_schedule(spec.targets->eps_smoothing,
                                           spec.targets->eps_stationary, spec.stages);
  out.stages = run_asymptotic(*p.problem, *p.part, schedule, p.constants, spec.rho, spec.mode,
                              spec.seed, spec.stationarity_samples, spec.run_options(jobs),
                              spec.overrides());
  const Stage& last = out.stages.back();
  KeyValues& s = out.summary;
  s.emplace_back("command", "asymptotic");
  describe(s, p, last.derivation);
  s.emplace_back("stages", std::to_string(out.stages.size()));
  std::vector<std::string> warnings;
  double wall = 0.0;
  for (std::size_t i = 0; i < out.stages.size(); ++i) {
    const Stage& st = out.stages[i];
    const auto key = [&](const char* name) { return fmt::format("stage.{}.{}", i + 1, name); };
    s.emplace_back(key("eps3"), fmt_double(st.targets.eps_smoothing));
    s.emplace_back(key("eps4"), fmt_double(st.targets.eps_stationary));
    s.emplace_back(key("alpha"), fmt_double(st.derivation.config.alpha));
    s.emplace_back(key("K"), std::to_string(st.derivation.config.iterations));
    s.emplace_back(key("M"), std::to_string(st.derivation.config.batch));
    s.emplace_back(key("R"), std::to_string(st.run.R));
    s.emplace_back(key("stationarity"), fmt_double(st.stationarity));
    warnings.insert(warnings.end(), st.run.warnings.begin(), st.run.warnings.end());
    wall += st.run.wall_seconds;
  }
  s.emplace_back("R", std::to_string(last.run.R));
  s.emplace_back("stationarity", fmt_double(last.stationarity));
  describe_point(s, p, last.derivation.box, last.run.w);
  describe_warnings(s, warnings);
  s.emplace_back("wall_seconds", fmt::format("{:.3f}", wall));
  return out;
}

}  // namespace gl0::cli
