#include <doctest.h>

#include <cmath>
#include <vector>

#include "conbandit/error.hpp"
#include "conbandit/omd.hpp"
#include "harness/oracles.hpp"

using namespace conbandit;

namespace {

std::vector<double> normalize(std::vector<double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  for (double& x : v) x /= s;
  return v;
}

}  // namespace

TEST_CASE("decision set rows") {
  ConstraintEstimator fresh(FeedbackMode::bandit, {100, 3, 2, 0.1});
  const auto open = build_decision_set(fresh);
  for (double r : open.rows()) CHECK(r == -2.0);
  CHECK(open.contains(Strategy::uniform(3).probs(), 0.0));

  ConstraintEstimator est(FeedbackMode::full, {100, 2, 1, 0.1});
  for (int k = 0; k < 4; ++k) est.update({FeedbackMode::full, ArmIndex{0}, {0, 0}, {0.5, -1.0}});
  const auto ds = build_decision_set(est);
  const double r = est.radius(ArmIndex{0});
  CHECK(ds.row(0)[0] == doctest::Approx(0.5 - r));
  CHECK(ds.row(0)[1] == doctest::Approx(-1.0 - r));
  CHECK(ds.row(0)[0] - ds.row(0)[1] == doctest::Approx(1.5));

  const auto known = build_decision_set_known_c(est, 0.0);
  CHECK(known.rows() == ds.rows());
}

TEST_CASE("decision set arithmetic with a 0.1 radius") {
  const std::uint64_t n = 2000;
  ConstraintEstimator est(FeedbackMode::bandit, {10, 1, 1, 0.1});
  for (std::uint64_t k = 0; k < n; ++k) est.update({FeedbackMode::bandit, ArmIndex{0}, {0.0}, {0.5}});
  // Rows are g_hat - radius; pick the count so the radius is what we want.
  const double r = est.radius(ArmIndex{0});
  CHECK(build_decision_set(est).row(0)[0] == doctest::Approx(0.5 - r));
  const DecisionSet hand(1, 1, {0.5 - 0.1});
  CHECK(hand.row(0)[0] == doctest::Approx(0.4));
}

TEST_CASE("unconstrained mirror step") {
  const Strategy x({0.5, 0.5});
  const std::vector<double> loss{1.0, 0.0};
  CHECK(unconstrained_md_point(x, loss, 0.0) == std::vector<double>{0.5, 0.5});
  const auto y = unconstrained_md_point(x, loss, std::log(2.0));
  CHECK(y[0] == doctest::Approx(0.25));
  CHECK(y[1] == 0.5);
  const std::vector<double> zero{0.0, 0.0};
  CHECK(unconstrained_md_point(x, zero, 3.0) == std::vector<double>{0.5, 0.5});
}

TEST_CASE("projection of an interior point") {
  const DecisionSet ds(3, 1, {-1.0, -0.5, -0.2});
  const std::vector<double> raw{2.0, 1.0, 1.0};
  const auto res = kl_project(raw, ds);
  CHECK(res.status == ProjectionStatus::interior);
  CHECK(res.multipliers == std::vector<double>{0.0});
  CHECK(res.point[0] == doctest::Approx(0.5));
  CHECK(res.point[1] == doctest::Approx(0.25));
}

TEST_CASE("closed-form boundary projection") {
  const DecisionSet ds(2, 1, {1.0, -1.0});
  const std::vector<double> raw{0.8, 0.2};
  const auto res = kl_project(raw, ds);
  CHECK(res.status == ProjectionStatus::boundary);
  CHECK(res.point[0] == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(res.multipliers[0] == doctest::Approx(std::log(2.0)).epsilon(1e-6));

  const auto grid = oracle::kl_grid(raw, ds, 1e-4, 0);
  REQUIRE(grid);
  CHECK(oracle::l1_distance(grid->point, res.point.probs()) <= 2e-4);
}

TEST_CASE("projection rejects non-positive raw entries") {
  const DecisionSet ds(2, 1, {1.0, -1.0});
  const std::vector<double> raw{0.8, 0.0};
  CHECK_THROWS_AS(kl_project(raw, ds), Error);
}

TEST_CASE("projection fallback on an empty set") {
  const DecisionSet ds(2, 1, {1.0, 1.0});
  const std::vector<double> raw{0.5, 0.5};
  const auto res = kl_project(raw, ds, {1e-7, 200, {}});
  CHECK(res.status == ProjectionStatus::fallback);
}

TEST_CASE("projection matches the lattice oracle") {
  RngStream rng(41);
  int compared = 0;
  for (int rep = 0; rep < 60; ++rep) {
    const std::size_t K = 2 + rep % 2;
    const std::size_t m = 1 + (rep / 2) % 2;
    const auto c = oracle::random_projection_case(rng, K, m);
    if (!feasibility_check(c.set).nonempty) continue;
    const auto res = kl_project(c.raw, c.set);
    REQUIRE(res.status != ProjectionStatus::fallback);
    CHECK(res.dual_monotone);
    CHECK(c.set.max_residual(res.point.probs()) <= 1e-6);
    for (std::size_t i = 0; i < m; ++i) {
      CHECK(res.multipliers[i] >= 0.0);
      CHECK(res.multipliers[i] * c.set.residual(i, res.point.probs()) >= -1e-5);
    }
    const auto grid = oracle::kl_grid(c.raw, c.set, 1e-2, 3);
    REQUIRE(grid);
    CHECK(oracle::l1_distance(grid->point, res.point.probs()) <= 1e-3);
    ++compared;
  }
  CHECK(compared >= 20);
}

TEST_CASE("projection is idempotent and satisfies the Pythagorean inequality") {
  RngStream rng(42);
  for (int rep = 0; rep < 30; ++rep) {
    const std::size_t K = 2 + rep % 3;
    const std::size_t m = 1 + rep % 2;
    const auto c = oracle::random_projection_case(rng, K, m);
    const auto feas = feasibility_check(c.set);
    if (!feas.nonempty) continue;
    const auto res = kl_project(c.raw, c.set);
    const auto again = kl_project(res.point.probs(), c.set);
    CHECK(oracle::l1_distance(again.point.probs(), res.point.probs()) <= 1e-6);

    const auto y = normalize(c.raw);
    const auto p = res.point.values();
    for (int k = 0; k < 50; ++k) {
      // Random feasible u: a convex mix of the witness and a random point,
      // shrunk toward the witness until it fits.
      std::vector<double> r(K);
      for (double& v : r) v = rng.uniform() + 1e-3;
      r = normalize(r);
      std::vector<double> u(K);
      double theta = 1.0;
      for (int s = 0; s < 60; ++s, theta *= 0.5) {
        for (std::size_t a = 0; a < K; ++a) u[a] = theta * r[a] + (1.0 - theta) * feas.witness[a];
        if (c.set.contains(u, 0.0)) break;
      }
      if (!c.set.contains(u, 0.0)) continue;
      CHECK(kl_divergence(u, y) >= kl_divergence(u, p) + kl_divergence(p, y) - 1e-6);
    }
  }
}

TEST_CASE("warm start reaches the same point") {
  RngStream rng(43);
  for (int rep = 0; rep < 20; ++rep) {
    const auto c = oracle::random_projection_case(rng, 4, 3);
    if (!feasibility_check(c.set).nonempty) continue;
    const auto cold = kl_project(c.raw, c.set);
    if (cold.status == ProjectionStatus::fallback) continue;
    std::vector<double> warm{0.3, 1.5, 0.0};
    const auto hot = kl_project(c.raw, c.set, {1e-7, 10'000, warm});
    CHECK(oracle::l1_distance(cold.point.probs(), hot.point.probs()) <= 1e-5);
  }
}

TEST_CASE("fixed share") {
  const auto y = fixed_share_mix(Strategy({1.0, 0.0}), 10);
  CHECK(y[0] == doctest::Approx(0.95));
  CHECK(y[1] == doctest::Approx(0.05));
  CHECK(fixed_share_mix(Strategy::uniform(4), 10) == Strategy::uniform(4));

  RngStream rng(44);
  for (std::size_t K : {2, 5}) {
    for (std::size_t T : {10, 10000}) {
      const double floor = 1.0 / static_cast<double>(T * K);
      for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> w(K);
        for (double& v : w) v = rng.uniform() < 0.3 ? 0.0 : rng.uniform();
        w[0] += 1e-3;
        const auto out = fixed_share_mix(Strategy::normalized(w), T);
        for (std::size_t a = 0; a < K; ++a) CHECK(out[a] >= floor);
      }
      std::vector<double> corner(K, 0.0);
      corner[K - 1] = 1.0;
      CHECK(fixed_share_mix(Strategy(corner), T)[0] >= floor);
    }
  }
}

TEST_CASE("feasibility check") {
  const auto open = feasibility_check(DecisionSet(2, 1, {-2.0, -2.0}));
  CHECK(open.nonempty);
  CHECK_FALSE(feasibility_check(DecisionSet(3, 2, {1, 1, 1, 1, 1, 1})).nonempty);
  const auto vertex = feasibility_check(DecisionSet(2, 1, {0.4, -0.6}));
  CHECK(vertex.nonempty);
  CHECK(vertex.witness[0] == doctest::Approx(0.0));
  CHECK(vertex.witness[1] == doctest::Approx(1.0));
}

TEST_CASE("kl divergence") {
  const std::vector<double> x{0.5, 0.5}, y{0.25, 0.75};
  CHECK(kl_divergence(x, x) == doctest::Approx(0.0));
  CHECK(kl_divergence(x, y) == doctest::Approx(0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0)));
}
