#include <doctest.h>

#include <cmath>
#include <vector>

#include "conbandit/algorithms.hpp"
#include "conbandit/diagnostics.hpp"
#include "conbandit/error.hpp"

using namespace conbandit;

namespace {

OfflineSolution toy_offline(double rho) {
  OfflineSolution off;
  off.opt_value = 1.0;
  off.opt_strategy = Strategy({1.0, 0.0});
  off.rho = rho;
  off.rho_strategy = Strategy({0.0, 1.0});
  off.rho_arm_value = rho;
  off.rho_arm = ArmIndex{1};
  return off;
}

ProblemInstance generated(std::size_t T, std::uint64_t seed, double budget) {
  EnvConfig cfg;
  cfg.horizon = T;
  cfg.arms = 3;
  cfg.constraints = 2;
  cfg.pattern = LossPattern::sinusoidal;
  cfg.corruption.preset = CorruptionPreset::burst;
  cfg.corruption.target_budget = budget;
  RngStream rng(seed);
  return build_instance(cfg, rng);
}

}  // namespace

TEST_CASE("alpha is one without corruption") {
  const auto diag = build_alpha_benchmark(toy_offline(0.2), 0.0, AlphaMode::full, 50);
  for (std::size_t t = 0; t < 50; ++t) {
    CHECK(diag.alpha[t] == 1.0);
    CHECK(diag.comparators[t] == Strategy({1.0, 0.0}));
  }
}

TEST_CASE("full-mode alpha at t = 100") {
  const auto diag = build_alpha_benchmark(toy_offline(0.2), 10.0, AlphaMode::full, 200);
  CHECK(diag.alpha[99] == doctest::Approx(0.5));
  CHECK(diag.comparators[99][0] == doctest::Approx(0.5));
  for (std::size_t t = 1; t < 200; ++t) CHECK(diag.alpha[t] >= diag.alpha[t - 1]);
  for (const auto& c : diag.comparators) CHECK(std::abs(c[0] + c[1] - 1.0) <= 1e-9);
}

TEST_CASE("bandit-mode alpha is constant") {
  const auto diag = build_alpha_benchmark(toy_offline(0.2), 10.0, AlphaMode::bandit, 10000, 0.5);
  CHECK(diag.alpha[0] == doctest::Approx(0.5));
  for (double a : diag.alpha) CHECK(a == diag.alpha[0]);
}

TEST_CASE("alpha benchmark needs positive rho") {
  CHECK_THROWS_AS(build_alpha_benchmark(toy_offline(0.0), 1.0, AlphaMode::full, 10), Error);
  CHECK_THROWS_AS(build_alpha_benchmark(toy_offline(-0.1), 1.0, AlphaMode::bandit, 10), Error);
}

TEST_CASE("membership check") {
  auto diag = build_alpha_benchmark(toy_offline(0.2), 10.0, AlphaMode::full, 100);
  // x0 <= x1 holds for alpha <= 1/2, i.e. from t = 100 on it is tight.
  const DecisionSet ds(2, 1, {1.0, -1.0});
  std::vector<DecisionSnapshot> sets{{0, ds}, {99, ds}};
  CHECK(check_alpha_membership(diag, sets));
  CHECK(diag.member == std::vector<bool>{true, true});
  CHECK(diag.worst_slack[1] == doctest::Approx(0.0).epsilon(1e-12));

  auto late = build_alpha_benchmark(toy_offline(0.2), 1.0, AlphaMode::full, 100);
  CHECK_FALSE(check_alpha_membership(late, sets));
}

TEST_CASE("doubling partition") {
  const auto p8 = doubling_partition(8);
  REQUIRE(p8.size() == 4);
  const std::vector<std::size_t> starts{0, 1, 3, 7};
  for (std::size_t j = 0; j < 4; ++j) CHECK(p8[j].begin == starts[j]);
  CHECK(p8.back().end == 8);
  CHECK(doubling_partition(1).size() == 1);

  for (std::size_t T = 1; T <= 3000; ++T) {
    const auto p = doubling_partition(T);
    CHECK(p.size() == static_cast<std::size_t>(std::floor(std::log2(static_cast<double>(T)))) + 1);
    CHECK(p.front().begin == 0);
    CHECK(p.back().end == T);
    for (std::size_t j = 1; j < p.size(); ++j) CHECK(p[j].begin == p[j - 1].end);
  }
}

TEST_CASE("doubling benchmark takes each phase's first comparator") {
  const auto diag = build_alpha_benchmark(toy_offline(0.2), 10.0, AlphaMode::full, 16);
  const auto bench = doubling_benchmark(diag);
  REQUIRE(bench.comparators.size() == 5);
  CHECK(bench.comparators[2] == diag.comparators[3]);
}

TEST_CASE("coverage on a noiseless instance is perfect") {
  const std::size_t T = 300;
  // Means in {-1, 1} make every draw deterministic.
  std::vector<double> g(T * 2);
  for (std::size_t t = 0; t < T; ++t) {
    g[t * 2] = -1.0;
    g[t * 2 + 1] = t % 7 == 0 ? 1.0 : -1.0;
  }
  const ProblemInstance inst(T, 2, 1, std::vector<double>(T * 2, 0.5), g);
  const double C = compute_corruption(inst).total;
  std::vector<CoverageMonitor> runs;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    runs.emplace_back(inst, C, CoverageBound::time_average);
    RunOptions opt;
    opt.record_rows = false;
    opt.estimator_observer = [&](std::size_t t, const ConstraintEstimator& est) { runs.back().observe(t, est); };
    (void)run_conomd_fs(inst, {}, RngStream(seed), opt);
  }
  CHECK(coverage_count(runs) == 1.0);
}

TEST_CASE("coverage collapses when the bound is shrunk") {
  const std::size_t T = 1000;
  double real = 0.0, shrunk = 0.0;
  const int seeds = 20;
  for (int s = 0; s < seeds; ++s) {
    const auto inst = generated(T, 50 + s, 20.0);
    const double C = compute_corruption(inst).total;
    std::vector<CoverageMonitor> mons{{inst, C, CoverageBound::time_average, 1.0},
                                      {inst, C, CoverageBound::time_average, 0.05}};
    RunOptions opt;
    opt.record_rows = false;
    opt.estimator_observer = [&](std::size_t t, const ConstraintEstimator& est) {
      for (auto& m : mons) m.observe(t, est);
    };
    (void)run_conomd_fs(inst, {}, RngStream(s), opt);
    real += mons[0].held();
    shrunk += mons[1].held();
  }
  CHECK(real / seeds >= 0.9);
  CHECK(shrunk / seeds < 0.9);
}

TEST_CASE("halving the bound breaks coverage under concentrated corruption") {
  // One constraint entry pushed up for the first 200 rounds: the bias reaches C/n.
  const std::size_t T = 1024;
  double real = 0.0, halved = 0.0;
  const int seeds = 20;
  for (int s = 0; s < seeds; ++s) {
    EnvConfig cfg;
    cfg.horizon = T;
    cfg.arms = 3;
    cfg.constraints = 2;
    cfg.corruption.base_constraint_means = {{-0.4, -0.6, 0.3}, {0.1, -0.5, -0.2}};
    for (std::size_t r = 0; r < 200; ++r) cfg.corruption.perturbations.push_back({r, 0, {1.0, 0.0, 0.0}});
    RngStream rng(900 + s);
    const auto inst = build_instance(cfg, rng);
    const double C = compute_corruption(inst).total;
    std::vector<CoverageMonitor> mons{{inst, C, CoverageBound::time_average},
                                      {inst, C, CoverageBound::time_average, 1.0, 0.5}};
    RunOptions opt;
    opt.record_rows = false;
    opt.estimator_observer = [&](std::size_t t, const ConstraintEstimator& est) {
      for (auto& m : mons) m.observe(t, est);
    };
    (void)run_conomd_fs(inst, {}, RngStream(s), opt);
    real += mons[0].held();
    halved += mons[1].held();
  }
  CHECK(real / seeds >= 0.9);
  CHECK(halved / seeds < 0.9);
}

TEST_CASE("coverage needs observed runs") {
  CHECK_THROWS_AS(coverage_count(std::vector<CoverageMonitor>{}), Error);
  const ProblemInstance inst(2, 1, 1, {0.5, 0.5}, {-0.5, -0.5});
  std::vector<CoverageMonitor> never{{inst, 0.0, CoverageBound::anchor}};
  try {
    (void)coverage_count(never);
    FAIL("expected missing-ground-truth");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::missing_ground_truth);
  }
}
