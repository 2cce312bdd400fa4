#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "conbandit/rng.hpp"
#include "conbandit/strategy.hpp"

namespace conbandit {

// Ground-truth mean sequences. Rounds are indexed 0..T-1.
class ProblemInstance {
 public:
  // loss_means is T*K row-major, constraint_means is m*T*K ([i][t][a]).
  ProblemInstance(std::size_t horizon, std::size_t arms, std::size_t constraints,
                  std::vector<double> loss_means, std::vector<double> constraint_means);

  std::size_t horizon() const { return horizon_; }
  std::size_t arms() const { return arms_; }
  std::size_t constraints() const { return constraints_; }

  double loss_mean(std::size_t t, std::size_t a) const { return loss_means_[t * arms_ + a]; }
  std::span<const double> loss_row(std::size_t t) const {
    return {loss_means_.data() + t * arms_, arms_};
  }
  double constraint_mean(std::size_t i, std::size_t t, std::size_t a) const {
    return constraint_means_[(i * horizon_ + t) * arms_ + a];
  }
  std::span<const double> constraint_row(std::size_t i, std::size_t t) const {
    return {constraint_means_.data() + (i * horizon_ + t) * arms_, arms_};
  }

  const std::vector<double>& loss_means() const { return loss_means_; }
  const std::vector<double>& constraint_means() const { return constraint_means_; }

  // Per-constraint time average (1/T) sum_t g_{t,i}, m*K row-major.
  std::vector<double> average_constraints() const;

  friend bool operator==(const ProblemInstance&, const ProblemInstance&) = default;

 private:
  std::size_t horizon_;
  std::size_t arms_;
  std::size_t constraints_;
  std::vector<double> loss_means_;
  std::vector<double> constraint_means_;
};

enum class LossPattern { constant, sinusoidal, switching };
enum class CorruptionPreset { none, burst, spread, front_loaded };
enum class CorruptionDirection { loosen, tighten };

LossPattern parse_loss_pattern(std::string_view name);
CorruptionPreset parse_corruption_preset(std::string_view name);
CorruptionDirection parse_corruption_direction(std::string_view name);
std::string_view to_string(LossPattern pattern);
std::string_view to_string(CorruptionPreset preset);

struct Perturbation {
  std::size_t round = 0;
  std::size_t constraint = 0;
  std::vector<double> delta;  // per arm
};

struct CorruptionSchedule {
  // Stationary anchor, m rows of K entries. Drawn from the rng when empty.
  std::vector<std::vector<double>> base_constraint_means;
  std::vector<Perturbation> perturbations;
  // Preset rounds get a uniform per-arm shift of `amplitude` (the last one
  // scaled so the unclipped l1 mass equals target_budget), applied to every
  // constraint. Explicit perturbations are applied on top.
  CorruptionPreset preset = CorruptionPreset::none;
  double target_budget = 0.0;
  double amplitude = 1.0;
  CorruptionDirection direction = CorruptionDirection::loosen;
};

struct EnvConfig {
  std::size_t horizon = 0;
  std::size_t arms = 0;
  std::size_t constraints = 0;
  LossPattern pattern = LossPattern::constant;
  std::vector<double> loss_base;  // drawn from the rng when empty
  double loss_amplitude = 0.2;    // sinusoidal swing
  std::size_t loss_period = 0;    // sinusoidal / switching; 0 picks a default
  // Arms whose losses rotate under the switching pattern; empty means all.
  std::vector<std::size_t> rotating_arms;
  CorruptionSchedule corruption;
  double rho_min = 0.05;
};

// Materializes the mean sequences. Throws invalid-config on empty dimensions
// and infeasible-instance when no arm keeps every constraint at or below
// -rho_min in every round.
ProblemInstance build_instance(const EnvConfig& config, RngStream& rng);

// Rounds touched by a corruption preset, in increasing order.
std::vector<std::size_t> preset_rounds(CorruptionPreset preset, std::size_t horizon,
                                       std::size_t count);

struct RoundSample {
  std::vector<double> losses;      // K entries in {0, 1}
  std::vector<double> violations;  // m*K entries in {-1, +1}, [i][a]
};

// Two-point draws matching the round's means: K loss draws, then m*K
// violation draws, in that order.
RoundSample sample_round(const ProblemInstance& inst, std::size_t t, RngStream& rng);

struct CorruptionReport {
  double total = 0.0;                   // C
  std::vector<double> per_constraint;   // C_i
  std::vector<double> anchors;          // m*K, lower median over rounds
};

CorruptionReport compute_corruption(const ProblemInstance& inst);

}  // namespace conbandit
