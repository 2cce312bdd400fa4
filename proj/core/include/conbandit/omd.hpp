#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "conbandit/estimators.hpp"
#include "conbandit/strategy.hpp"

namespace conbandit {

// X_t = {x in simplex : rows_i^T x <= 0 for every i}, rows_i = g_hat_i - radius.
class DecisionSet {
 public:
  DecisionSet(std::size_t arms, std::size_t constraints, std::vector<double> rows);

  std::size_t arms() const { return arms_; }
  std::size_t constraints() const { return constraints_; }
  std::span<const double> row(std::size_t i) const { return {rows_.data() + i * arms_, arms_}; }
  const std::vector<double>& rows() const { return rows_; }

  double residual(std::size_t i, std::span<const double> x) const;
  double max_residual(std::span<const double> x) const;
  bool contains(std::span<const double> x, double tol) const { return max_residual(x) <= tol; }

 private:
  std::size_t arms_;
  std::size_t constraints_;
  std::vector<double> rows_;
};

DecisionSet build_decision_set(const ConstraintEstimator& est);
DecisionSet build_decision_set_known_c(const ConstraintEstimator& est, double corruption);

// x(a) * exp(-eta * loss(a)), unnormalized.
std::vector<double> unconstrained_md_point(const Strategy& x, std::span<const double> loss,
                                           double eta);

enum class ProjectionStatus { interior, boundary, fallback };

const char* to_string(ProjectionStatus status);

struct ProjectionOptions {
  double tol = 1e-7;
  std::size_t max_iter = 10'000;
  std::span<const double> warm_start;  // previous multipliers, may be empty
};

struct ProjectionResult {
  Strategy point = Strategy::uniform(1);
  std::vector<double> multipliers;
  ProjectionStatus status = ProjectionStatus::interior;
  std::size_t iterations = 0;
  bool dual_monotone = true;  // every accepted ascent step kept phi non-decreasing
};

// argmin over X_t of the KL divergence D(x || raw), computed in the dual:
// x(lambda) is proportional to raw * exp(-sum_i lambda_i rows_i) and lambda
// maximizes phi(lambda) = -ln sum_a raw(a) exp(-sum_i lambda_i rows_i(a)).
// One constraint uses bisection on lambda; more use projected gradient ascent
// with backtracking. Falls back to the phase-one witness when no feasible
// multiplier is found.
ProjectionResult kl_project(std::span<const double> raw, const DecisionSet& ds,
                            const ProjectionOptions& options = {});

// (1 - 1/T) x + (1/T) uniform.
Strategy fixed_share_mix(const Strategy& x, std::size_t horizon);

struct FeasibilityResult {
  bool nonempty = false;
  Strategy witness = Strategy::uniform(1);
  double worst_residual = 0.0;  // optimal s of min s s.t. rows^T x <= s
};

FeasibilityResult feasibility_check(const DecisionSet& ds);

// Negative-entropy Bregman divergence, with the unnormalized-mass correction.
double kl_divergence(std::span<const double> x, std::span<const double> y);

}  // namespace conbandit
