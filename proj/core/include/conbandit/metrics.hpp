#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "conbandit/env.hpp"
#include "conbandit/omd.hpp"
#include "conbandit/strategy.hpp"

namespace conbandit {

// Realized loss sum plus per-constraint positive violation sum_t [g_t^T x_t]^+
// evaluated against ground-truth means.
class MetricsAccumulator {
 public:
  MetricsAccumulator(std::size_t constraints, double opt_value);

  void update_round(const ProblemInstance& inst, std::size_t t, std::span<const double> x,
                    double realized_loss);
  // Same, given the products g_{t,i}^T x_t directly.
  void add(double realized_loss, std::span<const double> products);

  double loss_sum() const { return loss_sum_; }
  double opt_value() const { return opt_value_; }
  std::span<const double> positive_violation() const { return positive_violation_; }
  std::size_t rounds() const { return rounds_; }

  struct Totals {
    double regret = 0.0;     // R_T = realized loss - OPT
    double violation = 0.0;  // V_T = max_i positive violation
  };
  Totals finalize() const;

 private:
  double opt_value_;
  double loss_sum_ = 0.0;
  std::vector<double> positive_violation_;
  std::size_t rounds_ = 0;
};

// Half-open round range [begin, end), 0-based.
struct Phase {
  std::size_t begin = 0;
  std::size_t end = 0;
};

struct SwitchBenchmark {
  std::vector<Phase> phases;
  std::vector<Strategy> comparators;  // one per phase
};

struct DecisionSnapshot {
  std::size_t round = 0;
  DecisionSet set;
};

// Throws invalid-benchmark unless the phases partition [0, T) in order and
// each comparator lies in every decision set of its phase within `tol`.
void verify_benchmark(const SwitchBenchmark& benchmark, std::size_t horizon,
                      std::span<const DecisionSnapshot> sets, double tol = 1e-6);

// sum_t loss_t^T x_t - loss_t^T u_t with u_t the comparator of t's phase.
double switching_regret(std::span<const std::vector<double>> strategies,
                        std::span<const std::vector<double>> loss_vectors,
                        const SwitchBenchmark& benchmark);

struct ScalingFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t n_points = 0;
};

// Least squares of ln(value) on ln(T). Needs >= 3 points with positive values.
ScalingFit fit_scaling_exponent(std::span<const std::pair<double, double>> points);

// As above, but when r^2 < 0.9 drops the smallest-T point and refits once.
ScalingFit fit_scaling_with_refit(std::vector<std::pair<double, double>> points);

struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double max_abs_residual = 0.0;
  std::size_t n_points = 0;
};

// Ordinary least squares y ~ intercept + slope * x (>= 2 points).
LinearFit fit_linear(std::span<const std::pair<double, double>> points);

}  // namespace conbandit
