#pragma once

#include <filesystem>
#include <memory>
#include <optional>

#include "gl0/constraint.hpp"
#include "gl0/estimation.hpp"
#include "gl0/problem.hpp"
#include "gl0/spa.hpp"
#include "gl0/vecio.hpp"
#include "run_spec.hpp"

namespace gl0::cli {

/// Problem, partition and constants resolved from a run spec. `notes`
/// records where each constant came from.
struct Prepared {
  RunSpec spec;
  std::unique_ptr<StochasticProblem> problem;
  std::unique_ptr<GroupPartition> part;
  ProblemConstants constants;
  std::optional<LipschitzEstimate> lipschitz_estimate;
  KeyValues notes;
};

/// Builds the problem and partition. Tiny nets always use one group per
/// neuron or filter with p_i = d_i; other problems use `partition` or
/// uniform groups of `group_size` (default 1) with p_i = d_i.
Prepared prepare_problem(const RunSpec& spec);

/// Fills L0, Q (given, declared by the problem, or estimated) and Delta
/// (given, estimated, or bounded). Requires targets. `force_estimate` ignores
/// constants declared by the problem.
void resolve_constants(Prepared& prepared, std::size_t jobs, bool force_estimate = false);

/// derive_params followed by the run spec's overrides.
Derivation derive(const Prepared& prepared);

struct TrainOutput {
  Derivation derivation;
  Initialization init;
  RunResult run;
  double stationarity = 0.0;
  KeyValues summary;
};

TrainOutput train(const Prepared& prepared, std::size_t jobs);

struct HpOutput {
  HighProbabilityResult result;
  KeyValues summary;
};

/// r independent runs and selection; outputs describe the selected run.
HpOutput hp_train(const Prepared& prepared, std::size_t jobs);

struct AsymptoticOutput {
  std::vector<Stage> stages;
  KeyValues summary;
};

/// Geometric (eps3, eps4) schedule halving per stage; outputs describe the
/// last stage.
AsymptoticOutput asymptotic(const Prepared& prepared, std::size_t jobs);

/// Header `k,fhat,step_norm,feasible_groups`; fhat is empty between records.
std::string format_trace(const RunResult& run);

/// Writes trace.csv, solution.vec and summary.kv into `dir` (created).
void write_run(const std::filesystem::path& dir, const RunResult& run, KeyValues summary);

std::string fmt_double(double x);

}  // namespace gl0::cli
