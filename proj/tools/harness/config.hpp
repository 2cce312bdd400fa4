#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "conbandit/algorithms.hpp"
#include "conbandit/env.hpp"

namespace conbandit::harness {

inline constexpr int kSchemaVersion = 1;

// Thrown for any rejected config; `line` is 1-based, 0 when unknown.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::size_t line, const std::string& message);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// A corruption budget given either as a number or as "T^p" (floor of T^p).
struct BudgetSpec {
  double value = 0.0;
  std::optional<double> exponent;
  std::string label = "0";

  double resolve(std::size_t horizon) const;
};

struct CorruptionSpec {
  CorruptionPreset preset = CorruptionPreset::none;
  BudgetSpec target;
  double amplitude = 1.0;
  CorruptionDirection direction = CorruptionDirection::loosen;
};

struct EnvSpec {
  std::size_t arms = 0;
  std::size_t constraints = 0;
  LossPattern pattern = LossPattern::constant;
  std::vector<double> loss_base;
  double loss_amplitude = 0.2;
  std::size_t loss_period = 0;
  std::vector<std::size_t> rotating_arms;
  std::vector<std::vector<double>> constraint_base;
  std::vector<Perturbation> perturbations;
  CorruptionSpec corruption;
  double rho_min = 0.05;
  std::uint64_t instance_seed = 0;

  EnvConfig materialize(std::size_t horizon, const BudgetSpec& target) const;
};

struct AlgorithmSpec {
  AlgorithmId id = AlgorithmId::conomd_fs;
  AlgoParams params;  // known_c unset means the realized C of the instance
};

struct SweepSpec {
  std::vector<AlgorithmId> algorithms;
  std::vector<BudgetSpec> targets;
  std::vector<double> betas;
};

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  EnvSpec env;
  AlgorithmSpec algorithm;
  std::vector<std::size_t> horizons;
  std::vector<std::uint64_t> seeds;
  std::string output_dir;
  std::optional<SweepSpec> sweep;
  bool diagnostics = false;
};

// Parses and validates; unknown keys and type errors raise ConfigError with
// the line of the offending key.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);

}  // namespace conbandit::harness
