#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "build_id.hpp"
#include "gl0/gl0.hpp"
#include "pipeline.hpp"
#include "run_spec.hpp"

namespace {

using namespace gl0;
using namespace gl0::cli;

int exit_code(Errc code) {
  switch (code) {
    case Errc::parse_error: return 2;
    case Errc::io_error: return 3;
    case Errc::infeasible_config: return 4;
    case Errc::infeasible_point: return 5;
    case Errc::invalid_argument:
    case Errc::dimension_mismatch: return 6;
    case Errc::format_error: return 7;
    case Errc::limit_exceeded: return 8;
  }
  return 1;
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    if (c == '"' || c == '\\') out += '\\';
    out += (c == '\n') ? ' ' : c;
  }
  return out;
}

int report(std::string_view code, int status, const std::string& message) {
  std::cerr << fmt::format("error: code={} exit={} message=\"{}\"\n", code, status,
                           escape(message));
  return status;
}

KeyValues parse_sets(const std::vector<std::string>& sets) {
  KeyValues kv;
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    require(eq != std::string::npos && eq > 0, Errc::parse_error,
            fmt::format("--set expects key=value, got '{}'", s));
    kv.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  return kv;
}

BoxParams box_from(std::optional<double> beta) {
  BoxParams box;
  if (beta) box.beta = *beta;
  return box;
}

StationarityMethod parse_stationarity_method(const std::string& name) {
  if (name == "auto") return StationarityMethod::automatic;
  if (name == "bip") return StationarityMethod::integer_program;
  if (name == "enumerate") return StationarityMethod::enumerate;
  fail(Errc::parse_error, fmt::format("unknown stationarity method '{}'", name));
}

struct SpecArgs {
  std::string spec;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> sets;
};

void add_spec_args(CLI::App* cmd, SpecArgs& a) {
  cmd->add_option("spec", a.spec, "Run spec file (key=value)")->required();
  cmd->add_option("--out", a.out, "Output directory (overrides 'output')");
  cmd->add_option("--seed", a.seed, "Seed (overrides 'seed')");
  cmd->add_option("--set", a.sets, "Override a spec key: key=value (repeatable)");
}

RunSpec load(const SpecArgs& a) {
  KeyValues overrides = parse_sets(a.sets);
  if (a.seed) overrides.emplace_back("seed", std::to_string(*a.seed));
  RunSpec spec = load_run_spec(a.spec, overrides);
  if (a.out) spec.output = *a.out;
  return spec;
}

void print(const KeyValues& kv) { std::cout << format_key_values(kv); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Projected stochastic optimization under weighted group l0 constraints"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("gl0 ") + std::string(kBuildId));
  std::size_t jobs = 1;
  app.add_option("--jobs", jobs, "Worker threads for sample evaluation")
      ->check(CLI::PositiveNumber);

  // project
  std::string part_file, point_file, grad_file, out_file;
  std::optional<double> beta;
  auto* project_cmd = app.add_subcommand("project", "Project a point onto C and the box");
  project_cmd->add_option("--partition", part_file, "Partition file")->required();
  project_cmd->add_option("--point", point_file, "Point file, one value per line")->required();
  project_cmd->add_option("--beta", beta, "Box radius (default: no box)");
  project_cmd->add_option("--out", out_file, "Output file (default: stdout)");

  // solve-knapsack
  std::string knapsack_file, knapsack_method = "bnb";
  auto* knapsack_cmd = app.add_subcommand("solve-knapsack", "Solve a 0-1 knapsack instance");
  knapsack_cmd->add_option("instance", knapsack_file, "Instance file")->required();
  knapsack_cmd->add_option("--method", knapsack_method, "bnb, dp or exhaustive")
      ->check(CLI::IsMember({"bnb", "dp", "exhaustive"}));

  // stationarity
  std::string stat_method = "auto";
  auto* stat_cmd = app.add_subcommand("stationarity", "Normal-cone stationarity distance");
  stat_cmd->add_option("--partition", part_file, "Partition file")->required();
  stat_cmd->add_option("--point", point_file, "Point file")->required();
  stat_cmd->add_option("--gradient", grad_file, "Gradient file")->required();
  stat_cmd->add_option("--beta", beta, "Box radius (default: no box)");
  stat_cmd->add_option("--method", stat_method, "auto, bip or enumerate")
      ->check(CLI::IsMember({"auto", "bip", "enumerate"}));

  SpecArgs est_args, train_args, hp_args, asym_args;
  auto* est_cmd = app.add_subcommand("estimate", "Estimate L0, Q and Delta for a run spec");
  add_spec_args(est_cmd, est_args);
  auto* train_cmd = app.add_subcommand("train", "Single SPA run");
  add_spec_args(train_cmd, train_args);
  auto* hp_cmd = app.add_subcommand("hp-train", "High-probability multi-run wrapper");
  add_spec_args(hp_cmd, hp_args);
  auto* asym_cmd = app.add_subcommand("asymptotic", "Decreasing (eps3, eps4) schedule");
  add_spec_args(asym_cmd, asym_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report("usage", 2, e.what());
  }

  try {
    if (*project_cmd) {
      const auto part = read_partition(part_file);
      const auto w = read_vector(point_file);
      require(w.size() == part.dim(), Errc::dimension_mismatch,
              fmt::format("point has {} entries, partition covers {}", w.size(), part.dim()));
      const auto x = project(w, part, box_from(beta));
      if (out_file.empty()) {
        std::cout << format_vector(x);
      } else {
        write_vector(out_file, x);
      }
    } else if (*knapsack_cmd) {
      const auto inst = parse_knapsack_instance(read_text(knapsack_file));
      const auto sol = knapsack_method == "dp"           ? solve_dp(inst)
                       : knapsack_method == "exhaustive" ? solve_exhaustive(inst)
                                                         : solve_bnb(inst);
      std::string bits;
      for (auto b : sol.selection) bits += b ? '1' : '0';
      std::cout << fmt::format("objective={}\nselection={}\n", sol.objective, bits);
    } else if (*stat_cmd) {
      const auto part = read_partition(part_file);
      const auto w = read_vector(point_file);
      const auto g = read_vector(grad_file);
      require(w.size() == part.dim() && g.size() == part.dim(), Errc::dimension_mismatch,
              "point, gradient and partition dimensions differ");
      const double dist = stationarity_distance(g, w, part, box_from(beta),
                                                parse_stationarity_method(stat_method));
      std::cout << fmt::format("distance={}\n", fmt_double(dist));
    } else if (*est_cmd) {
      RunSpec spec = load(est_args);
      spec.lipschitz.reset();
      spec.second_moment.reset();
      spec.delta.reset();
      Prepared p = prepare_problem(spec);
      resolve_constants(p, jobs, /*force_estimate=*/true);
      KeyValues kv;
      kv.emplace_back("L0", fmt_double(p.constants.lipschitz));
      kv.emplace_back("Q", fmt_double(p.constants.second_moment));
      kv.emplace_back("Delta", fmt_double(p.constants.delta));
      const auto& est = p.lipschitz_estimate;
      kv.emplace_back("q", est ? std::to_string(est->q) : std::string("0"));
      kv.emplace_back("iota", est ? fmt_double(est->iota) : std::string("nan"));
      kv.emplace_back("seed", std::to_string(spec.seed));
      for (const auto& note : p.notes) kv.push_back(note);
      print(kv);
    } else if (*train_cmd) {
      Prepared p = prepare_problem(load(train_args));
      resolve_constants(p, jobs);
      auto out = train(p, jobs);
      write_run(p.spec.output, out.run, out.summary);
      print(out.summary);
    } else if (*hp_cmd) {
      Prepared p = prepare_problem(load(hp_args));
      resolve_constants(p, jobs);
      auto out = hp_train(p, jobs);
      write_run(p.spec.output, out.result.runs[out.result.selection.index], out.summary);
      print(out.summary);
    } else if (*asym_cmd) {
      Prepared p = prepare_problem(load(asym_args));
      resolve_constants(p, jobs);
      auto out = asymptotic(p, jobs);
      for (std::size_t i = 0; i + 1 < out.stages.size(); ++i) {
        KeyValues stage{{"stage", std::to_string(i + 1)}};
        write_run(p.spec.output / fmt::format("stage{}", i + 1), out.stages[i].run, stage);
      }
      write_run(p.spec.output, out.stages.back().run, out.summary);
      print(out.summary);
    }
  } catch (const Error& e) {
    return report(to_string(e.code()), exit_code(e.code()), e.what());
  } catch (const std::exception& e) {
    return report("internal", 1, e.what());
  }
  return EXIT_SUCCESS;
}
