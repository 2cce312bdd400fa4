#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "conbandit/strategy.hpp"

namespace conbandit {

enum class FeedbackMode { full, bandit };

inline constexpr double kRadiusCap = 2.0;

// What the learner sees after playing `chosen`. Full feedback carries K losses
// and m*K violations ([i][a]); bandit feedback carries one loss and m
// violations, all for the chosen arm.
struct RoundFeedback {
  FeedbackMode mode = FeedbackMode::full;
  ArmIndex chosen;
  std::vector<double> losses;
  std::vector<double> violations;
};

struct EstimatorParams {
  std::size_t horizon = 1;
  std::size_t arms = 1;
  std::size_t constraints = 1;
  double delta = 0.1;
};

// Running means of observed violations with Hoeffding-style radii
// 4 sqrt(ln(TKm/delta) / n), capped at 2. In full mode every arm shares the
// round count; in bandit mode each arm counts its own pulls.
class ConstraintEstimator {
 public:
  ConstraintEstimator(FeedbackMode mode, EstimatorParams params);

  void update(const RoundFeedback& feedback);

  FeedbackMode mode() const { return mode_; }
  const EstimatorParams& params() const { return params_; }

  std::uint64_t count(ArmIndex arm) const {
    return mode_ == FeedbackMode::full ? rounds_ : counts_[arm.value];
  }
  std::uint64_t rounds() const { return rounds_; }

  // Zero before the first observation of the arm.
  double mean(std::size_t constraint, ArmIndex arm) const;

  double radius(ArmIndex arm) const;
  // Radius inflated by C/n + C/T for a known corruption budget C >= 0.
  double radius_known_c(ArmIndex arm, double corruption) const;

  double log_term() const { return log_term_; }

 private:
  FeedbackMode mode_;
  EstimatorParams params_;
  double log_term_;
  std::vector<double> sums_;             // m*K
  std::vector<std::uint64_t> counts_;    // K, bandit mode
  std::uint64_t rounds_ = 0;
};

// Closed forms behind the estimator's radii, for callers that only have a count.
double confidence_radius(std::uint64_t count, double log_term);
double confidence_radius_known_c(std::uint64_t count, double log_term, double corruption,
                                 std::size_t horizon);

// Implicit-exploration loss estimate: loss / (x[chosen] + gamma) on the chosen
// arm, zero elsewhere.
std::vector<double> ix_estimate(double gamma, ArmIndex chosen, double loss, const Strategy& x);

}  // namespace conbandit
