#include "conbandit/env.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "conbandit/error.hpp"

namespace conbandit {

ProblemInstance::ProblemInstance(std::size_t horizon, std::size_t arms, std::size_t constraints,
                                 std::vector<double> loss_means,
                                 std::vector<double> constraint_means)
    : horizon_(horizon),
      arms_(arms),
      constraints_(constraints),
      loss_means_(std::move(loss_means)),
      constraint_means_(std::move(constraint_means)) {
  if (horizon_ == 0 || arms_ == 0 || constraints_ == 0) {
    throw Error(ErrorCode::invalid_config, "T, K and m must all be positive");
  }
  if (loss_means_.size() != horizon_ * arms_) {
    throw Error(ErrorCode::invalid_dimension, "loss_means must hold T*K entries");
  }
  if (constraint_means_.size() != constraints_ * horizon_ * arms_) {
    throw Error(ErrorCode::invalid_dimension, "constraint_means must hold m*T*K entries");
  }
  for (double v : loss_means_) {
    if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorCode::invalid_config, "loss mean outside [0,1]");
  }
  for (double v : constraint_means_) {
    if (!(v >= -1.0 && v <= 1.0)) {
      throw Error(ErrorCode::invalid_config, "constraint mean outside [-1,1]");
    }
  }
}

std::vector<double> ProblemInstance::average_constraints() const {
  std::vector<double> avg(constraints_ * arms_, 0.0);
  for (std::size_t i = 0; i < constraints_; ++i) {
    for (std::size_t t = 0; t < horizon_; ++t) {
      auto row = constraint_row(i, t);
      for (std::size_t a = 0; a < arms_; ++a) avg[i * arms_ + a] += row[a];
    }
  }
  for (double& v : avg) v /= static_cast<double>(horizon_);
  return avg;
}

LossPattern parse_loss_pattern(std::string_view name) {
  if (name == "constant") return LossPattern::constant;
  if (name == "sinusoidal" || name == "sinusoidal-drift") return LossPattern::sinusoidal;
  if (name == "switching" || name == "switching-best-arm") return LossPattern::switching;
  throw Error(ErrorCode::invalid_config, "unknown loss pattern '" + std::string(name) + "'");
}

CorruptionPreset parse_corruption_preset(std::string_view name) {
  if (name == "none") return CorruptionPreset::none;
  if (name == "burst") return CorruptionPreset::burst;
  if (name == "spread") return CorruptionPreset::spread;
  if (name == "front_loaded" || name == "front-loaded") return CorruptionPreset::front_loaded;
  throw Error(ErrorCode::invalid_config, "unknown corruption preset '" + std::string(name) + "'");
}

CorruptionDirection parse_corruption_direction(std::string_view name) {
  if (name == "loosen") return CorruptionDirection::loosen;
  if (name == "tighten") return CorruptionDirection::tighten;
  throw Error(ErrorCode::invalid_config,
              "unknown corruption direction '" + std::string(name) + "'");
}

std::string_view to_string(LossPattern pattern) {
  switch (pattern) {
    case LossPattern::constant: return "constant";
    case LossPattern::sinusoidal: return "sinusoidal";
    case LossPattern::switching: return "switching";
  }
  return "constant";
}

std::string_view to_string(CorruptionPreset preset) {
  switch (preset) {
    case CorruptionPreset::none: return "none";
    case CorruptionPreset::burst: return "burst";
    case CorruptionPreset::spread: return "spread";
    case CorruptionPreset::front_loaded: return "front_loaded";
  }
  return "none";
}

std::vector<std::size_t> preset_rounds(CorruptionPreset preset, std::size_t horizon,
                                       std::size_t count) {
  count = std::min(count, horizon);
  std::vector<std::size_t> rounds;
  if (count == 0 || preset == CorruptionPreset::none) return rounds;
  rounds.reserve(count);
  switch (preset) {
    case CorruptionPreset::burst: {
      const std::size_t start = std::min(horizon / 3, horizon - count);
      for (std::size_t k = 0; k < count; ++k) rounds.push_back(start + k);
      break;
    }
    case CorruptionPreset::spread: {
      const std::size_t stride = std::max<std::size_t>(1, horizon / count);
      for (std::size_t k = 0; k < count; ++k) rounds.push_back(k * stride);
      break;
    }
    case CorruptionPreset::front_loaded:
      for (std::size_t k = 0; k < count; ++k) rounds.push_back(k);
      break;
    case CorruptionPreset::none:
      break;
  }
  return rounds;
}

namespace {

double uniform_in(RngStream& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

std::vector<double> draw_loss_base(std::size_t arms, RngStream& rng) {
  std::vector<double> base(arms);
  for (double& v : base) v = uniform_in(rng, 0.1, 0.9);
  return base;
}

// One arm is safe by a margin of at least 0.3; the rest straddle zero.
std::vector<std::vector<double>> draw_constraint_base(std::size_t arms, std::size_t constraints,
                                                      RngStream& rng) {
  const auto safe = std::min(arms - 1, static_cast<std::size_t>(rng.uniform() * arms));
  std::vector<std::vector<double>> base(constraints, std::vector<double>(arms));
  for (auto& row : base) {
    for (std::size_t a = 0; a < arms; ++a) {
      row[a] = a == safe ? uniform_in(rng, -0.8, -0.3) : uniform_in(rng, -0.5, 0.7);
    }
  }
  return base;
}

double loss_at(const EnvConfig& config, std::span<const double> base, std::size_t t,
               std::size_t a) {
  const std::size_t arms = config.arms;
  switch (config.pattern) {
    case LossPattern::constant:
      return base[a];
    case LossPattern::sinusoidal: {
      const double period = static_cast<double>(
          config.loss_period ? config.loss_period : config.horizon);
      const double phase = 2.0 * std::numbers::pi *
                           (static_cast<double>(t) / period +
                            static_cast<double>(a) / static_cast<double>(arms));
      return std::clamp(base[a] + config.loss_amplitude * std::sin(phase), 0.0, 1.0);
    }
    case LossPattern::switching: {
      const std::size_t period =
          config.loss_period ? config.loss_period : std::max<std::size_t>(1, config.horizon / 4);
      const auto& ring = config.rotating_arms;
      if (ring.empty()) return base[(a + (t / period) % arms) % arms];
      const auto pos = std::find(ring.begin(), ring.end(), a);
      if (pos == ring.end()) return base[a];
      const auto j = static_cast<std::size_t>(pos - ring.begin());
      return base[ring[(j + (t / period) % ring.size()) % ring.size()]];
    }
  }
  return base[a];
}

}  // namespace

ProblemInstance build_instance(const EnvConfig& config, RngStream& rng) {
  const std::size_t T = config.horizon, K = config.arms, m = config.constraints;
  if (T == 0) throw Error(ErrorCode::invalid_config, "empty horizon");
  if (K == 0) throw Error(ErrorCode::invalid_config, "K must be at least 1");
  if (m == 0) throw Error(ErrorCode::invalid_config, "m must be at least 1");

  std::vector<double> loss_base = config.loss_base;
  if (loss_base.empty()) loss_base = draw_loss_base(K, rng);
  if (loss_base.size() != K) throw Error(ErrorCode::invalid_config, "loss_base must have K entries");
  for (double v : loss_base) {
    if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorCode::invalid_config, "loss_base outside [0,1]");
  }

  auto constraint_base = config.corruption.base_constraint_means;
  if (constraint_base.empty()) constraint_base = draw_constraint_base(K, m, rng);
  if (constraint_base.size() != m) {
    throw Error(ErrorCode::invalid_config, "base_constraint_means must have m rows");
  }
  for (const auto& row : constraint_base) {
    if (row.size() != K) throw Error(ErrorCode::invalid_config, "constraint row must have K entries");
    for (double v : row) {
      if (!(v >= -1.0 && v <= 1.0)) {
        throw Error(ErrorCode::invalid_config, "base constraint mean outside [-1,1]");
      }
    }
  }

  for (std::size_t a : config.rotating_arms) {
    if (a >= K) throw Error(ErrorCode::invalid_config, "rotating arm beyond K");
  }

  std::vector<double> losses(T * K);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t a = 0; a < K; ++a) losses[t * K + a] = loss_at(config, loss_base, t, a);
  }

  std::vector<double> constraints(m * T * K);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t t = 0; t < T; ++t) {
      std::copy(constraint_base[i].begin(), constraint_base[i].end(),
                constraints.begin() + static_cast<std::ptrdiff_t>((i * T + t) * K));
    }
  }

  const auto& schedule = config.corruption;
  if (schedule.target_budget < 0.0) {
    throw Error(ErrorCode::invalid_config, "corruption target must be non-negative");
  }
  if (schedule.preset != CorruptionPreset::none && schedule.target_budget > 0.0) {
    if (!(schedule.amplitude > 0.0)) {
      throw Error(ErrorCode::invalid_config, "corruption amplitude must be positive");
    }
    const double per_round = schedule.amplitude * static_cast<double>(K);
    const auto count = static_cast<std::size_t>(std::ceil(schedule.target_budget / per_round));
    const auto rounds = preset_rounds(schedule.preset, T, count);
    const double sign = schedule.direction == CorruptionDirection::loosen ? -1.0 : 1.0;
    for (std::size_t k = 0; k < rounds.size(); ++k) {
      double shift = schedule.amplitude;
      if (k + 1 == count) {
        shift = (schedule.target_budget - per_round * static_cast<double>(count - 1)) /
                static_cast<double>(K);
      }
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t a = 0; a < K; ++a) {
          double& g = constraints[(i * T + rounds[k]) * K + a];
          g = std::clamp(g + sign * shift, -1.0, 1.0);
        }
      }
    }
  }
  for (const auto& p : schedule.perturbations) {
    if (p.round >= T || p.constraint >= m || p.delta.size() != K) {
      throw Error(ErrorCode::invalid_config, "perturbation out of range");
    }
    for (std::size_t a = 0; a < K; ++a) {
      double& g = constraints[(p.constraint * T + p.round) * K + a];
      g = std::clamp(g + p.delta[a], -1.0, 1.0);
    }
  }

  // Slater by construction: some arm keeps every constraint <= -rho_min.
  double best_margin = -2.0;
  for (std::size_t a = 0; a < K; ++a) {
    double worst = 2.0;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t t = 0; t < T; ++t) worst = std::min(worst, -constraints[(i * T + t) * K + a]);
    }
    best_margin = std::max(best_margin, worst);
  }
  if (best_margin < config.rho_min) {
    throw Error(ErrorCode::infeasible_instance,
                "no arm is strictly feasible by rho_min=" + std::to_string(config.rho_min) +
                    " (best margin " + std::to_string(best_margin) + ")");
  }

  return ProblemInstance(T, K, m, std::move(losses), std::move(constraints));
}

RoundSample sample_round(const ProblemInstance& inst, std::size_t t, RngStream& rng) {
  if (t >= inst.horizon()) throw Error(ErrorCode::out_of_range, "round beyond horizon");
  const std::size_t K = inst.arms(), m = inst.constraints();
  RoundSample sample;
  sample.losses.resize(K);
  sample.violations.resize(m * K);
  auto loss = inst.loss_row(t);
  for (std::size_t a = 0; a < K; ++a) sample.losses[a] = rng.uniform() < loss[a] ? 1.0 : 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    auto g = inst.constraint_row(i, t);
    for (std::size_t a = 0; a < K; ++a) {
      sample.violations[i * K + a] = rng.uniform() < 0.5 * (1.0 + g[a]) ? 1.0 : -1.0;
    }
  }
  return sample;
}

CorruptionReport compute_corruption(const ProblemInstance& inst) {
  const std::size_t T = inst.horizon(), K = inst.arms(), m = inst.constraints();
  CorruptionReport report;
  report.per_constraint.assign(m, 0.0);
  report.anchors.assign(m * K, 0.0);
  std::vector<double> column(T);
  // The l1 objective separates per coordinate; the lower median minimizes it.
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t a = 0; a < K; ++a) {
      for (std::size_t t = 0; t < T; ++t) column[t] = inst.constraint_mean(i, t, a);
      const auto mid = column.begin() + static_cast<std::ptrdiff_t>((T - 1) / 2);
      std::nth_element(column.begin(), mid, column.end());
      const double anchor = *mid;
      report.anchors[i * K + a] = anchor;
      double sum = 0.0;
      for (std::size_t t = 0; t < T; ++t) sum += std::abs(inst.constraint_mean(i, t, a) - anchor);
      report.per_constraint[i] += sum;
    }
    report.total = std::max(report.total, report.per_constraint[i]);
  }
  return report;
}

}  // namespace conbandit
