#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace conbandit::harness {

struct SuiteReport {
  std::string name;
  bool passed = true;
  std::size_t cases = 0;     // generated
  std::size_t compared = 0;  // actually checked against the oracle
  double worst = 0.0;        // largest observed error, suite-specific units
  double seconds = 0.0;
  std::vector<std::string> failures;  // first few, human readable

  void fail(std::string what);
};

// kl_project against an exhaustive lattice minimization of D(x || raw):
// random K in {2,3}, m in {1,2} cases, l1 distance within 1e-3.
struct ProjectionSuiteOptions {
  std::size_t cases = 200;
  double grid_step = 1e-2;
  std::size_t refinements = 3;
  double projection_tol = 1e-7;  // handed to kl_project
  std::uint64_t seed = 101;
};
SuiteReport projection_suite(const ProjectionSuiteOptions& opt);

// solve_opt and compute_rho (mixed and arm) against lattice searches on
// random instances with K <= 3, m <= 2, T <= 20; values within 1e-3.
struct LpSuiteOptions {
  std::size_t cases = 200;
  double grid_step = 1e-2;
  std::size_t refinements = 3;
  std::uint64_t seed = 202;
};
SuiteReport lp_suite(const LpSuiteOptions& opt);

// compute_corruption against a per-coordinate anchor grid (within 1e-2), and
// the anchor-versus-average deviation bound C/T, on random small instances.
struct CorruptionSuiteOptions {
  std::size_t cases = 100;
  double grid_step = 1e-3;
  std::uint64_t seed = 303;
};
SuiteReport corruption_suite(const CorruptionSuiteOptions& opt);

// Estimator radii against the closed form, then coverage of the concentration
// bounds (time-average and anchor) over seeded runs in full and bandit mode
// on instances whose corruption is concentrated on one coordinate early on.
struct ConcentrationSuiteOptions {
  std::size_t seeds = 200;
  std::size_t horizon = 1024;
  double delta = 0.1;
  double radius_scale = 1.0;  // multiplies the radius under test
  std::uint64_t seed = 404;
};
SuiteReport concentration_suite(const ConcentrationSuiteOptions& opt);

struct ValidateOptions {
  std::optional<std::string> suite;  // all when empty
  double radius_scale = 1.0;
  double projection_tol = 1e-7;
};

const std::vector<std::string>& suite_names();

// Writes a JSON report to `report`; returns 0 when every suite passed, 1 on
// any failure, 2 for an unknown suite name.
int cmd_validate(const ValidateOptions& options, std::ostream& report);

}  // namespace conbandit::harness
