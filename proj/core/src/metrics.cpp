#include "conbandit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "conbandit/error.hpp"

namespace conbandit {

MetricsAccumulator::MetricsAccumulator(std::size_t constraints, double opt_value)
    : opt_value_(opt_value), positive_violation_(constraints, 0.0) {}

void MetricsAccumulator::update_round(const ProblemInstance& inst, std::size_t t,
                                      std::span<const double> x, double realized_loss) {
  if (t >= inst.horizon()) throw Error(ErrorCode::out_of_range, "round beyond horizon");
  std::vector<double> products(inst.constraints());
  for (std::size_t i = 0; i < inst.constraints(); ++i) {
    auto g = inst.constraint_row(i, t);
    double s = 0.0;
    for (std::size_t a = 0; a < inst.arms(); ++a) s += g[a] * x[a];
    products[i] = s;
  }
  add(realized_loss, products);
}

void MetricsAccumulator::add(double realized_loss, std::span<const double> products) {
  if (products.size() != positive_violation_.size()) {
    throw Error(ErrorCode::invalid_dimension, "one product per constraint expected");
  }
  loss_sum_ += realized_loss;
  for (std::size_t i = 0; i < products.size(); ++i) {
    positive_violation_[i] += std::max(0.0, products[i]);
  }
  ++rounds_;
}

MetricsAccumulator::Totals MetricsAccumulator::finalize() const {
  Totals totals;
  totals.regret = loss_sum_ - opt_value_;
  totals.violation = positive_violation_.empty()
                         ? 0.0
                         : *std::max_element(positive_violation_.begin(), positive_violation_.end());
  return totals;
}

void verify_benchmark(const SwitchBenchmark& benchmark, std::size_t horizon,
                      std::span<const DecisionSnapshot> sets, double tol) {
  if (benchmark.phases.size() != benchmark.comparators.size() || benchmark.phases.empty()) {
    throw Error(ErrorCode::invalid_benchmark, "need one comparator per phase");
  }
  std::size_t expected = 0;
  for (const auto& phase : benchmark.phases) {
    if (phase.begin != expected || phase.end <= phase.begin) {
      throw Error(ErrorCode::invalid_benchmark, "phases must partition the horizon in order");
    }
    expected = phase.end;
  }
  if (expected != horizon) throw Error(ErrorCode::invalid_benchmark, "phases do not cover the horizon");
  std::size_t j = 0;
  for (const auto& snap : sets) {
    while (j < benchmark.phases.size() && snap.round >= benchmark.phases[j].end) ++j;
    if (j == benchmark.phases.size()) break;
    const double r = snap.set.max_residual(benchmark.comparators[j].probs());
    if (r > tol) {
      throw Error(ErrorCode::invalid_benchmark,
                  "comparator of phase " + std::to_string(j) + " leaves X_t at round " +
                      std::to_string(snap.round) + " by " + std::to_string(r));
    }
  }
}

double switching_regret(std::span<const std::vector<double>> strategies,
                        std::span<const std::vector<double>> loss_vectors,
                        const SwitchBenchmark& benchmark) {
  if (strategies.size() != loss_vectors.size()) {
    throw Error(ErrorCode::invalid_dimension, "strategies and losses differ in length");
  }
  double total = 0.0;
  std::size_t j = 0;
  for (std::size_t t = 0; t < strategies.size(); ++t) {
    while (j < benchmark.phases.size() && t >= benchmark.phases[j].end) ++j;
    if (j == benchmark.phases.size()) throw Error(ErrorCode::invalid_benchmark, "round outside phases");
    const auto& u = benchmark.comparators[j];
    const auto& loss = loss_vectors[t];
    for (std::size_t a = 0; a < loss.size(); ++a) total += loss[a] * (strategies[t][a] - u[a]);
  }
  return total;
}

ScalingFit fit_scaling_exponent(std::span<const std::pair<double, double>> points) {
  if (points.size() < 3) throw Error(ErrorCode::invalid_argument, "scaling fit needs at least 3 points");
  const double n = static_cast<double>(points.size());
  double sx = 0.0, sy = 0.0;
  for (const auto& [t, v] : points) {
    if (!(t > 0.0) || !(v > 0.0)) {
      throw Error(ErrorCode::invalid_argument, "scaling fit needs positive T and values");
    }
    sx += std::log(t);
    sy += std::log(v);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [t, v] : points) {
    const double dx = std::log(t) - mx, dy = std::log(v) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw Error(ErrorCode::invalid_argument, "scaling fit needs distinct T");
  ScalingFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  fit.n_points = points.size();
  return fit;
}

ScalingFit fit_scaling_with_refit(std::vector<std::pair<double, double>> points) {
  auto fit = fit_scaling_exponent(points);
  if (fit.r2 >= 0.9 || points.size() <= 3) return fit;
  std::sort(points.begin(), points.end());
  points.erase(points.begin());
  return fit_scaling_exponent(points);
}

LinearFit fit_linear(std::span<const std::pair<double, double>> points) {
  if (points.size() < 2) throw Error(ErrorCode::invalid_argument, "linear fit needs at least 2 points");
  const double n = static_cast<double>(points.size());
  double sx = 0.0, sy = 0.0;
  for (const auto& [x, y] : points) {
    sx += x;
    sy += y;
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  LinearFit fit;
  fit.slope = sxx == 0.0 ? 0.0 : sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  for (const auto& [x, y] : points) {
    fit.max_abs_residual = std::max(fit.max_abs_residual, std::abs(y - fit.intercept - fit.slope * x));
  }
  fit.n_points = points.size();
  return fit;
}

}  // namespace conbandit
