#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "conbandit/env.hpp"
#include "conbandit/estimators.hpp"
#include "conbandit/metrics.hpp"
#include "conbandit/offline.hpp"

namespace conbandit {

enum class AlphaMode { full, bandit };

// Comparators x*_alpha = (1 - alpha) x_diamond + alpha x* per round.
// Full mode: alpha_t = rho / (rho + 2C/t) with the mixed Slater witness.
// Bandit mode: alpha = rho / (rho + 2C/T^beta) with the strictly feasible arm.
struct AlphaDiagnostic {
  AlphaMode mode = AlphaMode::full;
  std::vector<double> alpha;           // per 0-based round
  std::vector<Strategy> comparators;   // per 0-based round
  std::vector<bool> member;            // filled by check_alpha_membership
  std::vector<double> worst_slack;     // max_i row_i^T comparator, per checked round
};

AlphaDiagnostic build_alpha_benchmark(const OfflineSolution& offline, double corruption,
                                      AlphaMode mode, std::size_t horizon, double beta = 0.5);

// Marks each snapshot round whose decision set contains the round's comparator
// within tol. Returns true when every checked round is a member.
bool check_alpha_membership(AlphaDiagnostic& diag, std::span<const DecisionSnapshot> sets,
                            double tol = 1e-6);

// Phases starting at rounds 1, 2, 4, ... (1-based); the last one is cut at T.
// Returned 0-based and half-open. floor(log2 T) + 1 phases.
std::vector<Phase> doubling_partition(std::size_t horizon);

// Doubling-trick comparator sequence: each phase uses x*_alpha at its first round.
SwitchBenchmark doubling_benchmark(const AlphaDiagnostic& diag);

enum class CoverageBound {
  time_average,  // |g_hat - (1/T) sum_t g_t| <= min(radius + C/n + C/T, 2)
  anchor,        // |g_hat - g_anchor| <= min(radius + C/n, 2)
};

// Watches one run's estimator and records whether the bound held at every
// (t, a, i) using the estimator's own radius. radius_scale multiplies that
// radius and bound_scale the final capped bound; both are 1 for the real bound.
class CoverageMonitor {
 public:
  CoverageMonitor(const ProblemInstance& inst, double corruption, CoverageBound bound,
                  double radius_scale = 1.0, double bound_scale = 1.0);

  void observe(std::size_t t, const ConstraintEstimator& est);

  bool held() const { return held_; }
  std::size_t checks() const { return checks_; }
  // Largest |error| - bound seen; negative when the bound always held.
  double worst_excess() const { return worst_excess_; }

 private:
  std::size_t arms_;
  std::size_t constraints_;
  std::size_t horizon_;
  double corruption_;
  CoverageBound bound_;
  double radius_scale_;
  double bound_scale_;
  std::vector<double> reference_;  // m*K
  bool held_ = true;
  std::size_t checks_ = 0;
  double worst_excess_ = -1e300;
};

// Fraction of runs whose bound held everywhere. Throws missing-ground-truth on
// runs that were never observed.
double coverage_count(std::span<const CoverageMonitor> runs);

}  // namespace conbandit
