#include "conbandit/algorithms.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "conbandit/error.hpp"
#include "conbandit/offline.hpp"

namespace conbandit {

AlgorithmId parse_algorithm(std::string_view name) {
  if (name == "conomd_fs") return AlgorithmId::conomd_fs;
  if (name == "conomd_fs_ix") return AlgorithmId::conomd_fs_ix;
  if (name == "expopt") return AlgorithmId::expopt;
  if (name == "known_c") return AlgorithmId::known_c;
  throw Error(ErrorCode::invalid_config, "unknown algorithm '" + std::string(name) + "'");
}

std::string_view to_string(AlgorithmId id) {
  switch (id) {
    case AlgorithmId::conomd_fs: return "conomd_fs";
    case AlgorithmId::conomd_fs_ix: return "conomd_fs_ix";
    case AlgorithmId::expopt: return "expopt";
    case AlgorithmId::known_c: return "known_c";
  }
  return "conomd_fs";
}

double default_eta(AlgorithmId id, std::size_t horizon, std::size_t arms) {
  const double T = static_cast<double>(horizon), K = static_cast<double>(arms);
  const double log_kt = std::log(K * T);
  if (id == AlgorithmId::conomd_fs) return std::sqrt(log_kt / T);
  return std::sqrt(log_kt / (K * T));
}

std::size_t exploration_pulls(std::size_t horizon, double beta) {
  const double p = std::pow(static_cast<double>(horizon), beta);
  const double nearest = std::round(p);
  if (std::abs(p - nearest) <= 1e-9 * std::max(1.0, nearest)) {
    return static_cast<std::size_t>(nearest);
  }
  return static_cast<std::size_t>(std::ceil(p));
}

namespace {

constexpr double kRawFloor = 1e-300;

void check_params(const ProblemInstance& inst, const AlgoParams& params) {
  if (!(params.delta > 0.0 && params.delta < 1.0)) {
    throw Error(ErrorCode::invalid_config, "delta must lie in (0,1)");
  }
  if (params.eta && !(*params.eta >= 0.0)) throw Error(ErrorCode::invalid_config, "eta must be >= 0");
  if (params.gamma && !(*params.gamma > 0.0)) throw Error(ErrorCode::invalid_config, "gamma must be > 0");
  (void)inst;
}

// Shared bookkeeping for one run: streams, metrics, trace.
class RunContext {
 public:
  RunContext(AlgorithmId id, const ProblemInstance& inst, RngStream rng, const RunOptions& options)
      : inst_(inst),
        options_(options),
        feedback_rng_(rng.split("feedback")),
        arm_rng_(rng.split("arms")),
        metrics_(inst.constraints(),
                 options.opt_value ? *options.opt_value : solve_opt(inst).value),
        realized_(inst.constraints(), 0.0) {
    record_.algorithm = id;
    if (options_.record_rows) record_.rows.reserve(inst.horizon());
  }

  RoundSample sample(std::size_t t) {
    auto s = sample_round(inst_, t, feedback_rng_);
    if (options_.record_loss_vectors) record_.loss_vectors.push_back(s.losses);
    return s;
  }

  ArmIndex draw(const Strategy& x) { return sample_arm(x, arm_rng_); }

  // Metrics and the trace row for round t; the projection fields are filled
  // by note_projection.
  void play(std::size_t t, const Strategy& x, ArmIndex arm, const RoundSample& s) {
    const std::size_t m = inst_.constraints(), K = inst_.arms();
    const double loss = s.losses[arm.value];
    std::vector<double> products(m);
    for (std::size_t i = 0; i < m; ++i) {
      products[i] = x.dot(inst_.constraint_row(i, t));
      realized_[i] += s.violations[i * K + arm.value];
    }
    metrics_.add(loss, products);
    if (options_.record_rows) {
      RoundRecord row;
      row.t = t;
      row.strategy = x.values();
      row.arm = arm;
      row.loss = loss;
      row.expected_violation = std::move(products);
      record_.rows.push_back(std::move(row));
    }
  }

  void observed(std::size_t t, const ConstraintEstimator& est) {
    if (options_.estimator_observer) options_.estimator_observer(t, est);
  }

  void note_projection(std::size_t t, const DecisionSet& ds, const ProjectionResult& proj) {
    if (proj.status == ProjectionStatus::fallback) ++record_.summary.fallback_rounds;
    if (options_.record_decision_sets) record_.decision_sets.push_back({t, ds});
    if (options_.record_rows) {
      auto& row = record_.rows.back();
      row.projected = true;
      row.status = proj.status;
      row.multipliers = proj.multipliers;
    }
  }

  RunRecord finish(const ConstraintEstimator& est, std::size_t forced) {
    auto& s = record_.summary;
    const auto totals = metrics_.finalize();
    s.cumulative_loss = metrics_.loss_sum();
    s.opt_value = metrics_.opt_value();
    s.regret = totals.regret;
    s.violation = totals.violation;
    s.positive_violation.assign(metrics_.positive_violation().begin(),
                                metrics_.positive_violation().end());
    s.realized_violation = *std::max_element(realized_.begin(), realized_.end());
    s.forced_rounds = forced;
    record_.final_counts.resize(inst_.arms());
    for (std::size_t a = 0; a < inst_.arms(); ++a) record_.final_counts[a] = est.count(ArmIndex{a});
    return std::move(record_);
  }

 private:
  const ProblemInstance& inst_;
  const RunOptions& options_;
  RngStream feedback_rng_;
  RngStream arm_rng_;
  MetricsAccumulator metrics_;
  std::vector<double> realized_;
  RunRecord record_;
};

EstimatorParams estimator_params(const ProblemInstance& inst, double delta) {
  return {inst.horizon(), inst.arms(), inst.constraints(), delta};
}

RoundFeedback full_feedback(ArmIndex arm, RoundSample s) {
  return {FeedbackMode::full, arm, std::move(s.losses), std::move(s.violations)};
}

RoundFeedback bandit_feedback(ArmIndex arm, const RoundSample& s, std::size_t arms,
                              std::size_t constraints) {
  RoundFeedback fb{FeedbackMode::bandit, arm, {s.losses[arm.value]}, {}};
  fb.violations.resize(constraints);
  for (std::size_t i = 0; i < constraints; ++i) fb.violations[i] = s.violations[i * arms + arm.value];
  return fb;
}

std::vector<double> floored(std::vector<double> raw) {
  for (double& v : raw) v = std::max(v, kRawFloor);
  return raw;
}

RunRecord run_fixed_share(AlgorithmId id, const ProblemInstance& inst, const AlgoParams& params,
                          RngStream rng, const RunOptions& options) {
  check_params(inst, params);
  const bool ix = id == AlgorithmId::conomd_fs_ix;
  const std::size_t T = inst.horizon(), K = inst.arms();
  const double eta = params.eta ? *params.eta : default_eta(id, T, K);
  const double gamma = params.gamma ? *params.gamma : eta / 2.0;

  RunContext ctx(id, inst, rng, options);
  ConstraintEstimator est(FeedbackMode::full, estimator_params(inst, params.delta));
  Strategy x = Strategy::uniform(K);
  std::vector<double> multipliers;
  for (std::size_t t = 0; t < T; ++t) {
    auto s = ctx.sample(t);
    const ArmIndex arm = ctx.draw(x);
    ctx.play(t, x, arm, s);
    const double loss = s.losses[arm.value];
    const auto loss_vec = ix ? ix_estimate(gamma, arm, loss, x) : s.losses;
    est.update(full_feedback(arm, std::move(s)));
    ctx.observed(t, est);
    const auto ds = build_decision_set(est);
    const auto raw = floored(unconstrained_md_point(x, loss_vec, eta));
    ProjectionOptions popt;
    popt.warm_start = multipliers;
    auto proj = kl_project(raw, ds, popt);
    ctx.note_projection(t, ds, proj);
    multipliers = proj.multipliers;
    x = fixed_share_mix(proj.point, T);
  }
  return ctx.finish(est, 0);
}

// OMD with IX losses over bandit-estimated sets from round `start` onward.
template <typename BuildSet>
void optimize_bandit(const ProblemInstance& inst, double eta, double gamma, std::size_t start,
                     RunContext& ctx, ConstraintEstimator& est, BuildSet build_set) {
  const std::size_t T = inst.horizon(), K = inst.arms(), m = inst.constraints();
  Strategy x = Strategy::uniform(K);
  std::vector<double> multipliers;
  for (std::size_t t = start; t < T; ++t) {
    const auto s = ctx.sample(t);
    const ArmIndex arm = ctx.draw(x);
    ctx.play(t, x, arm, s);
    est.update(bandit_feedback(arm, s, K, m));
    ctx.observed(t, est);
    const auto ds = build_set(est);
    const auto loss_hat = ix_estimate(gamma, arm, s.losses[arm.value], x);
    const auto raw = floored(unconstrained_md_point(x, loss_hat, eta));
    ProjectionOptions popt;
    popt.warm_start = multipliers;
    auto proj = kl_project(raw, ds, popt);
    ctx.note_projection(t, ds, proj);
    multipliers = proj.multipliers;
    x = proj.point;
  }
}

void forced_pull(std::size_t t, ArmIndex arm, const ProblemInstance& inst, RunContext& ctx,
                 ConstraintEstimator& est) {
  const auto s = ctx.sample(t);
  ctx.play(t, Strategy::point_mass(inst.arms(), arm), arm, s);
  est.update(bandit_feedback(arm, s, inst.arms(), inst.constraints()));
  ctx.observed(t, est);
}

}  // namespace

RunRecord run_conomd_fs(const ProblemInstance& inst, const AlgoParams& params, RngStream rng,
                        const RunOptions& options) {
  return run_fixed_share(AlgorithmId::conomd_fs, inst, params, rng, options);
}

RunRecord run_conomd_fs_ix(const ProblemInstance& inst, const AlgoParams& params, RngStream rng,
                           const RunOptions& options) {
  return run_fixed_share(AlgorithmId::conomd_fs_ix, inst, params, rng, options);
}

RunRecord run_expopt(const ProblemInstance& inst, const AlgoParams& params, RngStream rng,
                     const RunOptions& options) {
  check_params(inst, params);
  if (!(params.beta >= 0.0 && params.beta <= 1.0)) {
    throw Error(ErrorCode::invalid_config, "beta must lie in [0,1]");
  }
  const std::size_t T = inst.horizon(), K = inst.arms();
  const std::size_t pulls = exploration_pulls(T, params.beta);
  const std::size_t explore = K * pulls;
  if (explore > T) {
    throw Error(ErrorCode::invalid_config, "exploration K*ceil(T^beta)=" + std::to_string(explore) +
                                               " exceeds T=" + std::to_string(T));
  }
  const double eta = params.eta ? *params.eta : default_eta(AlgorithmId::expopt, T, K);
  const double gamma = params.gamma ? *params.gamma : eta / 2.0;

  RunContext ctx(AlgorithmId::expopt, inst, rng, options);
  ConstraintEstimator est(FeedbackMode::bandit, estimator_params(inst, params.delta));
  for (std::size_t a = 0; a < K; ++a) {
    for (std::size_t k = 0; k < pulls; ++k) forced_pull(a * pulls + k, ArmIndex{a}, inst, ctx, est);
  }
  optimize_bandit(inst, eta, gamma, explore, ctx, est,
                  [](const ConstraintEstimator& e) { return build_decision_set(e); });
  return ctx.finish(est, explore);
}

RunRecord run_known_c_baseline(const ProblemInstance& inst, const AlgoParams& params,
                               RngStream rng, const RunOptions& options) {
  check_params(inst, params);
  if (!params.known_c) throw Error(ErrorCode::invalid_config, "known_c baseline needs known_c");
  const double corruption = *params.known_c;
  if (corruption < 0.0) throw Error(ErrorCode::invalid_argument, "known_c must be non-negative");
  const std::size_t T = inst.horizon(), K = inst.arms();
  if (K > T) throw Error(ErrorCode::invalid_config, "known_c seeding needs T >= K");
  const double eta = params.eta ? *params.eta : default_eta(AlgorithmId::known_c, T, K);
  const double gamma = params.gamma ? *params.gamma : eta / 2.0;

  RunContext ctx(AlgorithmId::known_c, inst, rng, options);
  ConstraintEstimator est(FeedbackMode::bandit, estimator_params(inst, params.delta));
  for (std::size_t a = 0; a < K; ++a) forced_pull(a, ArmIndex{a}, inst, ctx, est);
  optimize_bandit(inst, eta, gamma, K, ctx, est, [corruption](const ConstraintEstimator& e) {
    return build_decision_set_known_c(e, corruption);
  });
  return ctx.finish(est, K);
}

RunRecord run_algorithm(AlgorithmId id, const ProblemInstance& inst, const AlgoParams& params,
                        RngStream rng, const RunOptions& options) {
  switch (id) {
    case AlgorithmId::conomd_fs: return run_conomd_fs(inst, params, rng, options);
    case AlgorithmId::conomd_fs_ix: return run_conomd_fs_ix(inst, params, rng, options);
    case AlgorithmId::expopt: return run_expopt(inst, params, rng, options);
    case AlgorithmId::known_c: return run_known_c_baseline(inst, params, rng, options);
  }
  throw Error(ErrorCode::invalid_config, "unknown algorithm");
}

}  // namespace conbandit
