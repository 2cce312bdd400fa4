#include "conbandit/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "conbandit/error.hpp"

namespace conbandit {

namespace {

Strategy mix(const Strategy& safe, const Strategy& opt, double alpha) {
  std::vector<double> out(safe.size());
  for (std::size_t a = 0; a < out.size(); ++a) out[a] = (1.0 - alpha) * safe[a] + alpha * opt[a];
  return Strategy::normalized(std::move(out));
}

}  // namespace

AlphaDiagnostic build_alpha_benchmark(const OfflineSolution& offline, double corruption,
                                      AlphaMode mode, std::size_t horizon, double beta) {
  if (corruption < 0.0) throw Error(ErrorCode::invalid_argument, "corruption must be non-negative");
  const double rho = mode == AlphaMode::full ? offline.rho : offline.rho_arm_value;
  if (!(rho > 0.0)) throw Error(ErrorCode::invalid_argument, "alpha benchmark needs rho > 0");
  const std::size_t K = offline.opt_strategy.size();
  const Strategy safe =
      mode == AlphaMode::full ? offline.rho_strategy : Strategy::point_mass(K, offline.rho_arm);

  AlphaDiagnostic diag;
  diag.mode = mode;
  diag.alpha.resize(horizon);
  diag.comparators.reserve(horizon);
  const double bandit_alpha =
      rho / (rho + 2.0 * corruption / std::pow(static_cast<double>(horizon), beta));
  for (std::size_t t = 0; t < horizon; ++t) {
    double alpha = mode == AlphaMode::full
                       ? rho / (rho + 2.0 * corruption / static_cast<double>(t + 1))
                       : bandit_alpha;
    if (corruption == 0.0) alpha = 1.0;
    diag.alpha[t] = alpha;
    diag.comparators.push_back(mix(safe, offline.opt_strategy, alpha));
  }
  return diag;
}

bool check_alpha_membership(AlphaDiagnostic& diag, std::span<const DecisionSnapshot> sets,
                            double tol) {
  diag.member.clear();
  diag.worst_slack.clear();
  bool all = true;
  for (const auto& snap : sets) {
    if (snap.round >= diag.comparators.size()) {
      throw Error(ErrorCode::out_of_range, "snapshot round beyond the benchmark horizon");
    }
    const double slack = snap.set.max_residual(diag.comparators[snap.round].probs());
    diag.worst_slack.push_back(slack);
    diag.member.push_back(slack <= tol);
    all = all && slack <= tol;
  }
  return all;
}

std::vector<Phase> doubling_partition(std::size_t horizon) {
  std::vector<Phase> phases;
  if (horizon == 0) return phases;
  std::size_t start = 1;  // 1-based
  while (start <= horizon) {
    const std::size_t next = start * 2;
    phases.push_back({start - 1, std::min(next - 1, horizon)});
    start = next;
  }
  return phases;
}

SwitchBenchmark doubling_benchmark(const AlphaDiagnostic& diag) {
  SwitchBenchmark bench;
  bench.phases = doubling_partition(diag.comparators.size());
  for (const auto& phase : bench.phases) bench.comparators.push_back(diag.comparators[phase.begin]);
  return bench;
}

CoverageMonitor::CoverageMonitor(const ProblemInstance& inst, double corruption,
                                 CoverageBound bound, double radius_scale, double bound_scale)
    : arms_(inst.arms()),
      constraints_(inst.constraints()),
      horizon_(inst.horizon()),
      corruption_(corruption),
      bound_(bound),
      radius_scale_(radius_scale),
      bound_scale_(bound_scale) {
  reference_ = bound == CoverageBound::time_average ? inst.average_constraints()
                                                    : compute_corruption(inst).anchors;
}

void CoverageMonitor::observe(std::size_t t, const ConstraintEstimator& est) {
  (void)t;
  for (std::size_t a = 0; a < arms_; ++a) {
    const auto n = est.count(ArmIndex{a});
    if (n == 0) continue;
    const double nd = static_cast<double>(n);
    const double radius = radius_scale_ * est.radius(ArmIndex{a});
    double bound = radius + corruption_ / nd;
    if (bound_ == CoverageBound::time_average) bound += corruption_ / static_cast<double>(horizon_);
    bound = bound_scale_ * std::min(bound, kRadiusCap);
    for (std::size_t i = 0; i < constraints_; ++i) {
      const double err = std::abs(est.mean(i, ArmIndex{a}) - reference_[i * arms_ + a]);
      const double excess = err - bound;
      worst_excess_ = std::max(worst_excess_, excess);
      if (excess > 1e-12) held_ = false;
      ++checks_;
    }
  }
}

double coverage_count(std::span<const CoverageMonitor> runs) {
  if (runs.empty()) throw Error(ErrorCode::missing_ground_truth, "no runs to count");
  std::size_t held = 0;
  for (const auto& run : runs) {
    if (run.checks() == 0) throw Error(ErrorCode::missing_ground_truth, "run was never observed");
    if (run.held()) ++held;
  }
  return static_cast<double>(held) / static_cast<double>(runs.size());
}

}  // namespace conbandit
