#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "conbandit/env.hpp"
#include "conbandit/estimators.hpp"
#include "conbandit/metrics.hpp"
#include "conbandit/omd.hpp"
#include "conbandit/rng.hpp"

namespace conbandit {

enum class AlgorithmId {
  conomd_fs,     // full feedback, fixed share
  conomd_fs_ix,  // bandit losses, full constraints, fixed share
  expopt,        // bandit feedback, forced exploration then OMD
  known_c,       // bandit feedback with corruption-inflated radii
};

AlgorithmId parse_algorithm(std::string_view name);
std::string_view to_string(AlgorithmId id);

struct AlgoParams {
  double delta = 0.1;
  double beta = 0.5;  // expopt exploration exponent
  std::optional<double> eta;
  std::optional<double> gamma;
  std::optional<double> known_c;  // known_c baseline only
};

// sqrt(ln(KT)/T) for conomd_fs, sqrt(ln(KT)/(KT)) otherwise.
double default_eta(AlgorithmId id, std::size_t horizon, std::size_t arms);
// ceil(T^beta), robust to pow() landing a hair above an integer.
std::size_t exploration_pulls(std::size_t horizon, double beta);

struct RoundRecord {
  std::size_t t = 0;
  std::vector<double> strategy;            // x_t
  ArmIndex arm;                            // a_t
  double loss = 0.0;                       // l_t(a_t)
  std::vector<double> expected_violation;  // g_{t,i}^T x_t per constraint
  bool projected = false;                  // false in forced-pull rounds
  ProjectionStatus status = ProjectionStatus::interior;
  std::vector<double> multipliers;
};

struct RunSummary {
  double cumulative_loss = 0.0;
  double opt_value = 0.0;
  double regret = 0.0;
  double violation = 0.0;
  std::vector<double> positive_violation;  // per constraint
  double realized_violation = 0.0;         // max_i sum_t g_{t,i}(a_t), informational
  std::size_t fallback_rounds = 0;
  std::size_t forced_rounds = 0;           // exploration / seeding pulls
};

struct RunRecord {
  AlgorithmId algorithm = AlgorithmId::conomd_fs;
  std::vector<RoundRecord> rows;
  RunSummary summary;
  std::vector<std::vector<double>> loss_vectors;  // realized l_t, opt-in
  std::vector<DecisionSnapshot> decision_sets;     // X_t per projected round, opt-in
  std::vector<std::uint64_t> final_counts;         // N_T(a)
};

struct RunOptions {
  std::optional<double> opt_value;  // solved from the instance when absent
  bool record_rows = true;
  bool record_loss_vectors = false;
  bool record_decision_sets = false;
  // Called after every estimator update with the 0-based round.
  std::function<void(std::size_t, const ConstraintEstimator&)> estimator_observer;
};

// Per round: a_t ~ x_t, observe, update the estimator, build X_t, project the
// exponentiated-gradient step onto X_t, then mix with uniform at rate 1/T.
RunRecord run_conomd_fs(const ProblemInstance& inst, const AlgoParams& params, RngStream rng,
                        const RunOptions& options = {});
// As above with the implicit-exploration loss estimate in the gradient step.
RunRecord run_conomd_fs_ix(const ProblemInstance& inst, const AlgoParams& params, RngStream rng,
                           const RunOptions& options = {});
// ceil(T^beta) consecutive pulls of each arm, then OMD with IX losses over
// bandit-estimated decision sets, without fixed share.
RunRecord run_expopt(const ProblemInstance& inst, const AlgoParams& params, RngStream rng,
                     const RunOptions& options = {});
// One pull per arm, then OMD with IX losses over sets built from radii
// inflated by the known corruption budget.
RunRecord run_known_c_baseline(const ProblemInstance& inst, const AlgoParams& params,
                               RngStream rng, const RunOptions& options = {});

RunRecord run_algorithm(AlgorithmId id, const ProblemInstance& inst, const AlgoParams& params,
                        RngStream rng, const RunOptions& options = {});

}  // namespace conbandit
