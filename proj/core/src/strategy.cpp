#include "conbandit/strategy.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "conbandit/error.hpp"

namespace conbandit {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_dimension: return "invalid-dimension";
    case ErrorCode::invalid_strategy: return "invalid-strategy";
    case ErrorCode::invalid_config: return "invalid-config";
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::out_of_range: return "out-of-range";
    case ErrorCode::infeasible_lp: return "infeasible-lp";
    case ErrorCode::infeasible_instance: return "infeasible-instance";
    case ErrorCode::oracle_scope: return "oracle-scope";
    case ErrorCode::mode_mismatch: return "mode-mismatch";
    case ErrorCode::invalid_benchmark: return "invalid-benchmark";
    case ErrorCode::missing_ground_truth: return "missing-ground-truth";
  }
  return "unknown";
}

namespace {

void validate(std::span<const double> probs) {
  if (probs.empty()) throw Error(ErrorCode::invalid_dimension, "strategy over zero arms");
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw Error(ErrorCode::invalid_strategy, "negative or non-finite probability");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kSimplexTolerance) {
    throw Error(ErrorCode::invalid_strategy, "probabilities sum to " + std::to_string(sum));
  }
}

}  // namespace

Strategy::Strategy(std::vector<double> probs) : probs_(std::move(probs)) { validate(probs_); }

Strategy Strategy::uniform(std::size_t arms) {
  if (arms == 0) throw Error(ErrorCode::invalid_dimension, "K must be at least 1");
  return Strategy(std::vector<double>(arms, 1.0 / static_cast<double>(arms)), Unchecked{});
}

Strategy Strategy::point_mass(std::size_t arms, ArmIndex arm) {
  if (arms == 0) throw Error(ErrorCode::invalid_dimension, "K must be at least 1");
  if (arm.value >= arms) throw Error(ErrorCode::out_of_range, "arm index beyond K");
  std::vector<double> probs(arms, 0.0);
  probs[arm.value] = 1.0;
  return Strategy(std::move(probs), Unchecked{});
}

Strategy Strategy::normalized(std::vector<double> weights) {
  if (weights.empty()) throw Error(ErrorCode::invalid_dimension, "strategy over zero arms");
  double sum = 0.0;
  for (double& w : weights) {
    if (!std::isfinite(w)) throw Error(ErrorCode::invalid_strategy, "non-finite weight");
    if (w < 0.0) w = 0.0;
    sum += w;
  }
  if (!(sum > 0.0)) throw Error(ErrorCode::invalid_strategy, "weights have no mass");
  for (double& w : weights) w /= sum;
  return Strategy(std::move(weights), Unchecked{});
}

double Strategy::dot(std::span<const double> v) const {
  return std::inner_product(probs_.begin(), probs_.end(), v.begin(), 0.0);
}

ArmIndex sample_arm(std::span<const double> probs, RngStream& rng) {
  validate(probs);
  const double u = rng.uniform();
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t a = 0; a < probs.size(); ++a) {
    if (probs[a] <= 0.0) continue;
    last_positive = a;
    cumulative += probs[a];
    if (u <= cumulative) return ArmIndex{a};
  }
  // Rounding left the total slightly below u.
  return ArmIndex{last_positive};
}

ArmIndex sample_arm(const Strategy& x, RngStream& rng) { return sample_arm(x.probs(), rng); }

}  // namespace conbandit
