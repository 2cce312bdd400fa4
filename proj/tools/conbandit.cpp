// conbandit: run, sweep and validate constrained bandit experiments.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "harness/experiment.hpp"
#include "harness/validate.hpp"

int main(int argc, char** argv) {
  using namespace conbandit::harness;

  CLI::App app{"Constrained multi-armed bandits under corrupted constraints"};
  app.require_subcommand(1);

  RunnerOptions run_opts;
  std::string run_config;
  auto* run = app.add_subcommand("run", "Run every (T, seed) pair of a config");
  run->add_option("--config", run_config, "Experiment config (JSON)")->required();
  run->add_flag("--traces", run_opts.traces, "Write per-round trace CSVs");
  run->add_option("--jobs", run_opts.jobs, "Worker threads (0 = hardware threads)");
  run->add_flag("--wall-time", run_opts.wall_time, "Record wall_ms instead of 0");

  RunnerOptions sweep_opts;
  std::string sweep_config;
  auto* sweep = app.add_subcommand("sweep", "Run a (T, C_target, beta, algorithm) grid and fit slopes");
  sweep->add_option("--config", sweep_config, "Sweep config (JSON)")->required();
  sweep->add_option("--jobs", sweep_opts.jobs, "Worker threads (0 = hardware threads)");
  sweep->add_flag("--wall-time", sweep_opts.wall_time, "Record wall_ms instead of 0");

  ValidateOptions val_opts;
  std::string suite;
  auto* validate = app.add_subcommand("validate", "Check the solvers against exhaustive oracles");
  validate->add_option("--suite", suite, "projection, lp, corruption or concentration");
  validate->add_option("--inject-radius-scale", val_opts.radius_scale,
                       "Scale the radius under test (mutation check)");
  validate->add_option("--inject-projection-tol", val_opts.projection_tol,
                       "Projection tolerance under test (mutation check)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  if (*run) return cmd_run(run_config, run_opts);
  if (*sweep) return cmd_sweep(sweep_config, sweep_opts);
  if (!suite.empty()) val_opts.suite = suite;
  return cmd_validate(val_opts, std::cout);
}
