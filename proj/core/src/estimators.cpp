#include "conbandit/estimators.hpp"

#include <algorithm>
#include <cmath>

#include "conbandit/error.hpp"

namespace conbandit {

ConstraintEstimator::ConstraintEstimator(FeedbackMode mode, EstimatorParams params)
    : mode_(mode), params_(params) {
  if (params_.horizon == 0 || params_.arms == 0 || params_.constraints == 0) {
    throw Error(ErrorCode::invalid_dimension, "estimator needs positive T, K and m");
  }
  if (!(params_.delta > 0.0 && params_.delta < 1.0)) {
    throw Error(ErrorCode::invalid_argument, "delta must lie in (0,1)");
  }
  log_term_ = std::log(static_cast<double>(params_.horizon) * static_cast<double>(params_.arms) *
                       static_cast<double>(params_.constraints) / params_.delta);
  sums_.assign(params_.constraints * params_.arms, 0.0);
  counts_.assign(params_.arms, 0);
}

void ConstraintEstimator::update(const RoundFeedback& feedback) {
  if (feedback.mode != mode_) throw Error(ErrorCode::mode_mismatch, "feedback mode differs from estimator");
  const std::size_t K = params_.arms, m = params_.constraints;
  if (feedback.chosen.value >= K) throw Error(ErrorCode::out_of_range, "chosen arm beyond K");
  if (mode_ == FeedbackMode::full) {
    if (feedback.violations.size() != m * K) {
      throw Error(ErrorCode::invalid_dimension, "full feedback needs m*K violations");
    }
    for (std::size_t k = 0; k < m * K; ++k) sums_[k] += feedback.violations[k];
  } else {
    if (feedback.violations.size() != m) {
      throw Error(ErrorCode::invalid_dimension, "bandit feedback needs m violations");
    }
    const std::size_t a = feedback.chosen.value;
    for (std::size_t i = 0; i < m; ++i) sums_[i * K + a] += feedback.violations[i];
    ++counts_[a];
  }
  ++rounds_;
}

double ConstraintEstimator::mean(std::size_t constraint, ArmIndex arm) const {
  const auto n = count(arm);
  if (n == 0) return 0.0;
  return sums_[constraint * params_.arms + arm.value] / static_cast<double>(n);
}

double confidence_radius(std::uint64_t count, double log_term) {
  if (count == 0) return kRadiusCap;
  return std::min(4.0 * std::sqrt(log_term / static_cast<double>(count)), kRadiusCap);
}

double confidence_radius_known_c(std::uint64_t count, double log_term, double corruption,
                                 std::size_t horizon) {
  if (corruption < 0.0) throw Error(ErrorCode::invalid_argument, "corruption must be non-negative");
  if (count == 0) return kRadiusCap;
  const double n = static_cast<double>(count);
  const double zeta = 4.0 * std::sqrt(log_term / n) + corruption / n +
                      corruption / static_cast<double>(horizon);
  return std::min(zeta, kRadiusCap);
}

double ConstraintEstimator::radius(ArmIndex arm) const {
  return confidence_radius(count(arm), log_term_);
}

double ConstraintEstimator::radius_known_c(ArmIndex arm, double corruption) const {
  return confidence_radius_known_c(count(arm), log_term_, corruption, params_.horizon);
}

std::vector<double> ix_estimate(double gamma, ArmIndex chosen, double loss, const Strategy& x) {
  if (chosen.value >= x.size()) throw Error(ErrorCode::out_of_range, "chosen arm beyond K");
  std::vector<double> est(x.size(), 0.0);
  est[chosen.value] = loss / (x[chosen.value] + gamma);
  return est;
}

}  // namespace conbandit
