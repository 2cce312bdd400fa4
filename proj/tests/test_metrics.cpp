#include <doctest.h>

#include <cmath>
#include <vector>

#include "conbandit/algorithms.hpp"
#include "conbandit/error.hpp"
#include "conbandit/metrics.hpp"
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

}  // namespace

TEST_CASE("positive part of the expected violation") {
  const auto inst = stationary(2, {0.5}, {-0.3});
  MetricsAccumulator acc(1, 0.0);
  const std::vector<double> x{1.0};
  acc.update_round(inst, 0, x, 0.0);
  CHECK(acc.positive_violation()[0] == 0.0);

  const auto hot = stationary(2, {0.5}, {0.3});
  acc.update_round(hot, 1, x, 0.0);
  CHECK(acc.positive_violation()[0] == doctest::Approx(0.3));
  CHECK_THROWS_AS(acc.update_round(hot, 2, x, 0.0), Error);
}

TEST_CASE("playing the optimum incurs no violation") {
  const std::size_t T = 500;
  const auto inst = stationary(T, {0.1, 0.9, 0.5}, {0.6, -0.4, 0.2, 0.3, -0.2, -0.7});
  const auto opt = solve_opt(inst);
  MetricsAccumulator acc(2, opt.value);
  for (std::size_t t = 0; t < T; ++t) acc.update_round(inst, t, opt.strategy.probs(), 0.0);
  CHECK(acc.finalize().violation <= 1e-6 * T);
}

TEST_CASE("finalize") {
  MetricsAccumulator acc(2, 7.5);
  acc.add(7.5, std::vector<double>{3.0, 5.5});
  const auto tot = acc.finalize();
  CHECK(tot.regret == 0.0);
  CHECK(tot.violation == 5.5);
  CHECK(tot.regret + acc.opt_value() == acc.loss_sum());

  MetricsAccumulator one(1, 1.0);
  one.add(0.25, std::vector<double>{0.4});
  one.add(0.5, std::vector<double>{-1.0});
  CHECK(one.finalize().violation == one.positive_violation()[0]);
  CHECK(one.finalize().regret == -0.25);
}

TEST_CASE("positive violation is monotone and product-invariant") {
  const std::size_t T = 300;
  const auto inst = stationary(T, {0.2, 0.4, 0.6}, {0.5, -0.5, 0.0});
  MetricsAccumulator a(1, 0.0), b(1, 0.0);
  RngStream rng(1);
  double prev = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    const auto x = Strategy::normalized({rng.uniform(), rng.uniform(), rng.uniform()});
    a.update_round(inst, t, x.probs(), 0.5);
    // A different strategy with the same product: shift mass equally onto
    // arms 0 and 1, whose g values cancel.
    const double d = 0.5 * x[2];
    const std::vector<double> y{x[0] + d, x[1] + d, 0.0};
    b.update_round(inst, t, y, 0.5);
    CHECK(a.positive_violation()[0] >= prev);
    prev = a.positive_violation()[0];
  }
  CHECK(a.finalize().violation == doctest::Approx(b.finalize().violation).epsilon(1e-12));
}

TEST_CASE("benchmark verification") {
  const DecisionSet ds(2, 1, {1.0, -1.0});
  std::vector<DecisionSnapshot> sets{{0, ds}, {1, ds}};
  SwitchBenchmark ok{{{0, 2}}, {Strategy({0.5, 0.5})}};
  CHECK_NOTHROW(verify_benchmark(ok, 2, sets));
  SwitchBenchmark bad{{{0, 2}}, {Strategy({0.8, 0.2})}};
  try {
    verify_benchmark(bad, 2, sets);
    FAIL("expected invalid-benchmark");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::invalid_benchmark);
  }
  SwitchBenchmark gap{{{0, 1}}, {Strategy({0.5, 0.5})}};
  CHECK_THROWS_AS(verify_benchmark(gap, 2, sets), Error);
}

TEST_CASE("switching regret against oneself is zero") {
  std::vector<std::vector<double>> xs{{0.2, 0.8}, {0.6, 0.4}, {1.0, 0.0}};
  std::vector<std::vector<double>> ls{{1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}};
  SwitchBenchmark self;
  for (std::size_t t = 0; t < 3; ++t) {
    self.phases.push_back({t, t + 1});
    self.comparators.emplace_back(xs[t]);
  }
  CHECK(switching_regret(xs, ls, self) == 0.0);
}

TEST_CASE("one-phase switching regret tracks the expected regret") {
  const std::size_t T = 2000;
  const auto inst = stationary(T, {0.3, 0.6, 0.8}, {-0.5, -0.5, -0.5});
  const auto opt = solve_opt(inst);
  SwitchBenchmark bench{{{0, T}}, {opt.strategy}};
  RunOptions options;
  options.record_loss_vectors = true;
  const double band = 4.0 * std::sqrt(T * std::log(T / 0.1));
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto run = run_conomd_fs(inst, {}, RngStream(seed), options);
    std::vector<std::vector<double>> xs;
    double expected = 0.0;
    for (const auto& row : run.rows) {
      xs.push_back(row.strategy);
      for (std::size_t a = 0; a < 3; ++a) expected += row.strategy[a] * inst.loss_mean(row.t, a);
    }
    const double sw = switching_regret(xs, run.loss_vectors, bench);
    CHECK(std::abs(sw - (expected - opt.value)) <= band);
  }
}

TEST_CASE("scaling fits") {
  std::vector<std::pair<double, double>> root, lin;
  for (double T : {1024.0, 2048.0, 4096.0, 8192.0}) {
    root.emplace_back(T, 3.0 * std::sqrt(T));
    lin.emplace_back(T, 0.7 * T);
  }
  const auto a = fit_scaling_exponent(root);
  CHECK(std::abs(a.slope - 0.5) <= 1e-9);
  CHECK(a.intercept == doctest::Approx(std::log(3.0)));
  CHECK(a.r2 == doctest::Approx(1.0));
  CHECK(a.n_points == 4);
  CHECK(fit_scaling_exponent(lin).slope == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(fit_scaling_exponent(std::vector<std::pair<double, double>>{{1, 1}, {2, 2}}), Error);
  CHECK_THROWS_AS(fit_scaling_exponent(std::vector<std::pair<double, double>>{{1, 1}, {2, 0}, {3, 1}}), Error);
}

TEST_CASE("refit drops the smallest horizon once") {
  std::vector<std::pair<double, double>> pts{{16, 500.0}, {64, 8.0}, {256, 16.0}, {1024, 32.0}};
  CHECK(fit_scaling_exponent(pts).r2 < 0.9);
  const auto fit = fit_scaling_with_refit(pts);
  CHECK(fit.n_points == 3);
  CHECK(fit.slope == doctest::Approx(0.5));

  std::vector<std::pair<double, double>> clean{{16, 4.0}, {64, 8.0}, {256, 16.0}};
  CHECK(fit_scaling_with_refit(clean).n_points == 3);
}

TEST_CASE("linear fit") {
  std::vector<std::pair<double, double>> pts{{0.0, 1.0}, {10.0, 21.0}, {20.0, 41.0}};
  const auto f = fit_linear(pts);
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.max_abs_residual <= 1e-9);
}
