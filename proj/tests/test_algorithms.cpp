#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "conbandit/algorithms.hpp"
#include "conbandit/error.hpp"
#include "conbandit/offline.hpp"

using namespace conbandit;

namespace {

ProblemInstance stationary(std::size_t T, std::vector<double> loss, std::vector<double> g) {
  const std::size_t K = loss.size(), m = g.size() / K;
  std::vector<double> L, G(m * T * K);
  for (std::size_t t = 0; t < T; ++t) L.insert(L.end(), loss.begin(), loss.end());
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t a = 0; a < K; ++a) G[(i * T + t) * K + a] = g[i * K + a];
  return ProblemInstance(T, K, m, std::move(L), std::move(G));
}

ProblemInstance generated(std::size_t T, std::uint64_t seed, double budget = 0.0) {
  EnvConfig cfg;
  cfg.horizon = T;
  cfg.arms = 3;
  cfg.constraints = 2;
  cfg.pattern = LossPattern::switching;
  cfg.corruption.preset = budget > 0.0 ? CorruptionPreset::burst : CorruptionPreset::none;
  cfg.corruption.target_budget = budget;
  RngStream rng(seed);
  return build_instance(cfg, rng);
}

void check_same(const RunRecord& a, const RunRecord& b) {
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t t = 0; t < a.rows.size(); ++t) {
    CHECK(a.rows[t].strategy == b.rows[t].strategy);
    CHECK(a.rows[t].arm == b.rows[t].arm);
    CHECK(a.rows[t].loss == b.rows[t].loss);
    CHECK(a.rows[t].multipliers == b.rows[t].multipliers);
  }
  CHECK(a.summary.regret == b.summary.regret);
  CHECK(a.summary.violation == b.summary.violation);
  CHECK(a.summary.fallback_rounds == b.summary.fallback_rounds);
}

}  // namespace

TEST_CASE("default step sizes") {
  CHECK(default_eta(AlgorithmId::conomd_fs, 100, 2) == doctest::Approx(std::sqrt(std::log(200.0) / 100)));
  CHECK(default_eta(AlgorithmId::expopt, 100, 2) == doctest::Approx(std::sqrt(std::log(200.0) / 200)));
  CHECK(default_eta(AlgorithmId::conomd_fs_ix, 100, 2) == default_eta(AlgorithmId::known_c, 100, 2));
}

TEST_CASE("exploration length") {
  CHECK(exploration_pulls(10, 0.5) == 4);
  CHECK(exploration_pulls(16384, 0.5) == 128);
  CHECK(exploration_pulls(100, 0.5) == 10);
  CHECK(exploration_pulls(1000, 1.0 / 3.0) == 10);
  CHECK(exploration_pulls(17, 0.0) == 1);
}

TEST_CASE("algorithm names round trip") {
  for (auto id : {AlgorithmId::conomd_fs, AlgorithmId::conomd_fs_ix, AlgorithmId::expopt, AlgorithmId::known_c}) {
    CHECK(parse_algorithm(to_string(id)) == id);
  }
  CHECK_THROWS_AS(parse_algorithm("ucb"), Error);
}

TEST_CASE("single round is bounded") {
  const auto inst = stationary(1, {0.3, 0.9}, {-0.5, 0.4});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto run = run_conomd_fs(inst, {}, RngStream(seed));
    CHECK(run.rows.size() == 1);
    CHECK(run.summary.regret <= 1.0);
    CHECK(run.summary.violation <= 1.0);
  }
}

TEST_CASE("trace folds into the summary") {
  const auto inst = generated(400, 3, 6.0);
  for (auto id : {AlgorithmId::conomd_fs, AlgorithmId::conomd_fs_ix, AlgorithmId::expopt}) {
    const auto run = run_algorithm(id, inst, {}, RngStream(5));
    REQUIRE(run.rows.size() == inst.horizon());
    double loss = 0.0;
    std::vector<double> pos(inst.constraints(), 0.0);
    std::size_t fallbacks = 0;
    for (const auto& row : run.rows) {
      loss += row.loss;
      for (std::size_t i = 0; i < pos.size(); ++i) pos[i] += std::max(row.expected_violation[i], 0.0);
      fallbacks += row.projected && row.status == ProjectionStatus::fallback;
      CHECK(std::abs(std::accumulate(row.strategy.begin(), row.strategy.end(), 0.0) - 1.0) <= 1e-9);
    }
    CHECK(run.summary.cumulative_loss == doctest::Approx(loss).epsilon(1e-12));
    CHECK(run.summary.regret == doctest::Approx(loss - solve_opt(inst).value).epsilon(1e-12));
    CHECK(run.summary.violation == doctest::Approx(*std::max_element(pos.begin(), pos.end())).epsilon(1e-12));
    CHECK(run.summary.fallback_rounds == fallbacks);
  }
}

TEST_CASE("runs are deterministic") {
  const auto inst = generated(300, 4, 5.0);
  for (auto id : {AlgorithmId::conomd_fs, AlgorithmId::conomd_fs_ix, AlgorithmId::expopt}) {
    check_same(run_algorithm(id, inst, {}, RngStream(9)), run_algorithm(id, inst, {}, RngStream(9)));
  }
  AlgoParams p;
  p.known_c = 5.0;
  check_same(run_known_c_baseline(inst, p, RngStream(9)), run_known_c_baseline(inst, p, RngStream(9)));
}

TEST_CASE("zero step size keeps the uniform strategy") {
  const std::size_t T = 2000;
  const auto inst = stationary(T, {0.2, 0.5, 0.9}, {-1.0, -1.0, -1.0});
  AlgoParams p;
  p.eta = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto run = run_conomd_fs(inst, p, RngStream(seed));
    double expected = 0.0;
    for (const auto& row : run.rows) {
      for (std::size_t a = 0; a < 3; ++a) CHECK(row.strategy[a] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
      for (std::size_t a = 0; a < 3; ++a) expected += row.strategy[a] * inst.loss_mean(row.t, a);
    }
    CHECK(std::abs(run.summary.cumulative_loss - expected) <= 4.0 * std::sqrt(T * std::log(T / 0.1)));
  }
}

TEST_CASE("huge gamma reproduces the zero-loss trajectory") {
  const auto inst = generated(200, 6);
  AlgoParams huge;
  huge.gamma = 1e300;
  AlgoParams still;
  still.eta = 0.0;
  const auto a = run_conomd_fs_ix(inst, huge, RngStream(2));
  const auto b = run_conomd_fs_ix(inst, still, RngStream(2));
  for (std::size_t t = 0; t < a.rows.size(); ++t) CHECK(a.rows[t].strategy == b.rows[t].strategy);
}

TEST_CASE("both fixed-share variants find the dominant arm") {
  const std::size_t T = 2000;
  const auto inst = stationary(T, {0.2, 0.8}, {-0.5, -0.5});
  for (auto id : {AlgorithmId::conomd_fs, AlgorithmId::conomd_fs_ix}) {
    const auto run = run_algorithm(id, inst, {}, RngStream(17));
    CHECK(run.rows[T / 2].strategy[0] >= 0.8);
  }
}

TEST_CASE("expopt exploration ledger") {
  const auto inst = stationary(10, {0.3, 0.6}, {-0.5, 0.2});
  std::vector<std::uint64_t> at_t0;
  RunOptions opt;
  opt.estimator_observer = [&](std::size_t t, const ConstraintEstimator& est) {
    if (t == 7) at_t0 = {est.count(ArmIndex{0}), est.count(ArmIndex{1})};
  };
  const auto run = run_expopt(inst, {}, RngStream(1), opt);
  CHECK(run.summary.forced_rounds == 8);
  CHECK(at_t0 == std::vector<std::uint64_t>{4, 4});
  for (std::size_t t = 0; t < 8; ++t) {
    CHECK(run.rows[t].arm.value == t / 4);
    CHECK_FALSE(run.rows[t].projected);
  }
  CHECK(run.rows[8].projected);

  const auto big = generated(1000, 2);
  for (double beta : {0.0, 0.3, 0.5}) {
    AlgoParams p;
    p.beta = beta;
    const std::size_t pulls = exploration_pulls(1000, beta);
    opt.estimator_observer = [&](std::size_t t, const ConstraintEstimator& est) {
      if (t + 1 == 3 * pulls) {
        for (std::size_t a = 0; a < 3; ++a) CHECK(est.count(ArmIndex{a}) == pulls);
      }
    };
    CHECK(run_expopt(big, p, RngStream(3), opt).summary.forced_rounds == 3 * pulls);
  }
}

TEST_CASE("expopt rejects exploration longer than the horizon") {
  const auto inst = stationary(10, {0.3, 0.6, 0.5}, {-0.5, 0.2, 0.1});
  try {
    (void)run_expopt(inst, {}, RngStream(1));
    FAIL("expected invalid-config");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::invalid_config);
  }
}

TEST_CASE("known-C baseline") {
  const auto inst = generated(300, 8);
  AlgoParams zero;
  zero.known_c = 0.0;
  AlgoParams minimal;
  minimal.beta = 0.0;
  // With C = 0 the inflated radii collapse and the baseline is exploration
  // with one pull per arm.
  check_same(run_known_c_baseline(inst, zero, RngStream(4)), run_expopt(inst, minimal, RngStream(4)));

  AlgoParams vacuous;
  vacuous.known_c = 2.0 * 300;
  RunOptions opt;
  opt.record_decision_sets = true;
  const auto run = run_known_c_baseline(inst, vacuous, RngStream(4), opt);
  for (const auto& snap : run.decision_sets) {
    CHECK(snap.set.contains(Strategy::uniform(3).probs(), -0.999));
    for (std::size_t a = 0; a < 3; ++a) {
      std::vector<double> e(3, 0.0);
      e[a] = 1.0;
      CHECK(snap.set.contains(e, 0.0));
    }
  }
  for (const auto& row : run.rows) {
    if (row.projected) CHECK(row.status == ProjectionStatus::interior);
  }

  AlgoParams negative;
  negative.known_c = -1.0;
  CHECK_THROWS_AS(run_known_c_baseline(inst, negative, RngStream(4)), Error);
  CHECK_THROWS_AS(run_known_c_baseline(inst, {}, RngStream(4)), Error);
}

TEST_CASE("fallbacks are rare") {
  int with_fallback = 0;
  const int seeds = 20;
  for (int s = 0; s < seeds; ++s) {
    const auto inst = generated(500, 100 + s, 10.0);
    RunOptions opt;
    opt.record_rows = false;
    with_fallback += run_conomd_fs(inst, {}, RngStream(s), opt).summary.fallback_rounds > 0;
  }
  CHECK(with_fallback <= 0.2 * seeds);
}
