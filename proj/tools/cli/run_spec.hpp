#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "gl0/problem.hpp"
#include "gl0/smoothing.hpp"
#include "gl0/spa.hpp"
#include "gl0/vecio.hpp"

namespace gl0::cli {

/// Flat key=value run description. Relative paths are resolved against the
/// directory of the run-spec file.
struct RunSpec {
  std::filesystem::path base_dir = ".";

  std::string problem;
  ProblemOptions problem_options;

  std::optional<std::string> partition_file;
  std::optional<std::size_t> group_size;
  std::optional<double> budget;
  std::optional<double> sparsity;

  double kappa = 1.0;
  std::optional<double> beta;

  std::optional<Targets> targets;
  double rho = 2.0;
  EstimatorMode mode = EstimatorMode::first;
  std::uint64_t seed = 0;
  std::filesystem::path output = "out";

  std::optional<double> lipschitz;
  std::optional<double> second_moment;
  std::optional<double> delta;
  std::string delta_method = "estimate";  // estimate | bound
  std::size_t q = 250;
  std::size_t delta_starts = 3;
  std::size_t delta_samples = 1000;

  std::optional<std::uint64_t> iterations;
  std::optional<std::uint64_t> batch;
  std::optional<std::string> init;

  HighProbabilityTargets hp;
  std::size_t stages = 3;
  std::size_t stationarity_samples = 1000;

  bool perturb = true;
  bool project = true;
  std::uint64_t trace_every = 0;
  std::size_t holdout_batch = 64;

  [[nodiscard]] std::filesystem::path resolve(const std::string& path) const;
  [[nodiscard]] DerivationOverrides overrides() const;
  [[nodiscard]] RunOptions run_options(std::size_t jobs) const;
};

/// Rejects unknown keys, malformed numbers, sparsity outside (0, 1), both
/// budget and sparsity, and mixed (eps1, eps2) / (eps3, eps4) targets.
RunSpec parse_run_spec(const KeyValues& kv, const std::filesystem::path& base_dir);

/// Reads a spec file; `overrides` replace or add keys before validation.
RunSpec load_run_spec(const std::filesystem::path& file, const KeyValues& overrides = {});

}  // namespace gl0::cli
