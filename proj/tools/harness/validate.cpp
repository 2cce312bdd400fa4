#include "harness/validate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "conbandit/algorithms.hpp"
#include "conbandit/diagnostics.hpp"
#include "conbandit/env.hpp"
#include "conbandit/estimators.hpp"
#include "conbandit/offline.hpp"
#include "conbandit/omd.hpp"
#include "harness/oracles.hpp"

namespace conbandit::harness {

namespace {

constexpr std::size_t kMaxListedFailures = 20;

double linear(std::span<const double> c, std::span<const double> x) {
  double s = 0.0;
  for (std::size_t a = 0; a < x.size(); ++a) s += c[a] * x[a];
  return s;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

template <class F>
SuiteReport timed(const char* name, F body) {
  SuiteReport rep;
  rep.name = name;
  const auto t0 = std::chrono::steady_clock::now();
  body(rep);
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

// Worst constraint value over every (i, t), as a function of x.
double worst_row(const ProblemInstance& inst, std::span<const double> x) {
  double w = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < inst.constraints(); ++i) {
    for (std::size_t t = 0; t < inst.horizon(); ++t) w = std::max(w, linear(inst.constraint_row(i, t), x));
  }
  return w;
}

}  // namespace

void SuiteReport::fail(std::string what) {
  passed = false;
  if (failures.size() < kMaxListedFailures) failures.push_back(std::move(what));
}

SuiteReport projection_suite(const ProjectionSuiteOptions& opt) {
  return timed("projection", [&](SuiteReport& rep) {
    RngStream rng(opt.seed);
    ProjectionOptions po;
    po.tol = opt.projection_tol;
    for (std::size_t rep_i = 0; rep_i < opt.cases; ++rep_i) {
      const std::size_t K = 2 + rep_i % 2;
      const std::size_t m = 1 + (rep_i / 2) % 2;
      const auto c = oracle::random_projection_case(rng, K, m);
      ++rep.cases;
      const auto grid = oracle::kl_grid(c.raw, c.set, opt.grid_step, opt.refinements);
      if (!grid) continue;  // empty up to the lattice resolution
      ++rep.compared;
      const auto res = kl_project(c.raw, c.set, po);
      const auto id = "case " + std::to_string(rep_i) + " (K=" + std::to_string(K) + ", m=" + std::to_string(m) + ")";
      if (res.status == ProjectionStatus::fallback) {
        rep.fail(id + ": projection fell back on a nonempty set");
        continue;
      }
      const double d = oracle::l1_distance(grid->point, res.point.probs());
      const double slack = c.set.max_residual(res.point.probs());
      rep.worst = std::max(rep.worst, d);
      if (d > 1e-3) rep.fail(id + ": l1 distance to the grid minimizer " + fmt(d));
      if (slack > 1e-6) rep.fail(id + ": projected point violates a row by " + fmt(slack));
    }
    if (rep.compared == 0) rep.fail("no case had a nonempty decision set");
  });
}

SuiteReport lp_suite(const LpSuiteOptions& opt) {
  return timed("lp", [&](SuiteReport& rep) {
    RngStream rng(opt.seed);
    for (std::size_t k = 0; k < opt.cases; ++k) {
      const std::size_t T = 1 + static_cast<std::size_t>(rng.uniform() * 20);
      const std::size_t K = 2 + static_cast<std::size_t>(rng.uniform() * 2);
      const std::size_t m = 1 + static_cast<std::size_t>(rng.uniform() * 2);
      const auto inst = oracle::random_small_instance(rng, T, K, m);
      ++rep.cases;
      const auto id = "instance " + std::to_string(k) + " (T=" + std::to_string(T) + ", K=" + std::to_string(K) +
                      ", m=" + std::to_string(m) + ")";

      // Per-round averaged program on the lattice.
      std::vector<double> loss(K, 0.0);
      std::vector<Halfspace> rows(m, Halfspace{std::vector<double>(K, 0.0), 0.0});
      const double Td = static_cast<double>(T);
      for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t a = 0; a < K; ++a) {
          loss[a] += inst.loss_mean(t, a) / Td;
          for (std::size_t i = 0; i < m; ++i) rows[i].coeffs[a] += inst.constraint_mean(i, t, a) / Td;
        }
      }
      const auto grid = oracle::face_lattice_search(
          K, [&](std::span<const double> x) { return linear(loss, x); }, rows, opt.grid_step, opt.refinements);
      if (!grid) {
        rep.fail(id + ": grid found no feasible point");
        continue;
      }
      ++rep.compared;
      const auto sol = solve_opt(inst);
      const double d_opt = std::abs(sol.value / Td - grid->value);

      const auto worst = [&](std::span<const double> x) { return worst_row(inst, x); };
      const double grid_mixed = -grid_oracle(K, worst, {}, opt.grid_step, opt.refinements)->value;
      double grid_arm = -std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < K; ++a) {
        std::vector<double> e(K, 0.0);
        e[a] = 1.0;
        grid_arm = std::max(grid_arm, -worst_row(inst, e));
      }
      const double d_mixed = std::abs(compute_rho(inst, RhoMode::mixed).rho - grid_mixed);
      const double d_arm = std::abs(compute_rho(inst, RhoMode::arm).rho - grid_arm);
      rep.worst = std::max({rep.worst, d_opt, d_mixed, d_arm});
      if (d_opt > 1e-3) rep.fail(id + ": OPT/T differs from the grid by " + fmt(d_opt));
      if (d_mixed > 1e-3) rep.fail(id + ": mixed rho differs from the grid by " + fmt(d_mixed));
      if (d_arm > 1e-3) rep.fail(id + ": arm rho differs from the vertex search by " + fmt(d_arm));
    }
  });
}

SuiteReport corruption_suite(const CorruptionSuiteOptions& opt) {
  return timed("corruption", [&](SuiteReport& rep) {
    RngStream rng(opt.seed);
    for (std::size_t k = 0; k < opt.cases; ++k) {
      const std::size_t T = 1 + static_cast<std::size_t>(rng.uniform() * 20);
      const std::size_t K = 1 + static_cast<std::size_t>(rng.uniform() * 3);
      const std::size_t m = 1 + static_cast<std::size_t>(rng.uniform() * 2);
      const auto inst = oracle::random_small_instance(rng, T, K, m);
      ++rep.cases;
      ++rep.compared;
      const auto id = "instance " + std::to_string(k);
      const auto r = compute_corruption(inst);
      const double d = std::abs(r.total - oracle::corruption_grid(inst, opt.grid_step).total);
      rep.worst = std::max(rep.worst, d);
      if (d > 1e-2) rep.fail(id + ": C differs from the anchor grid by " + fmt(d));

      const auto avg = inst.average_constraints();
      for (std::size_t i = 0; i < m; ++i) {
        double dev = 0.0;
        for (std::size_t a = 0; a < K; ++a) dev += std::abs(r.anchors[i * K + a] - avg[i * K + a]);
        if (dev > r.total / static_cast<double>(T) + 1e-12) {
          rep.fail(id + ": anchor-to-average deviation " + fmt(dev) + " exceeds C/T " +
                   fmt(r.total / static_cast<double>(T)));
        }
      }
    }
  });
}

SuiteReport concentration_suite(const ConcentrationSuiteOptions& opt) {
  return timed("concentration", [&](SuiteReport& rep) {
    // Radii against the closed form, in both modes.
    for (auto mode : {FeedbackMode::full, FeedbackMode::bandit}) {
      const EstimatorParams params{opt.horizon, 3, 2, opt.delta};
      ConstraintEstimator est(mode, params);
      const double log_term = std::log(static_cast<double>(params.horizon * params.arms * params.constraints) /
                                       params.delta);
      for (std::uint64_t n = 1; n <= 2000; ++n) {
        RoundFeedback fb;
        fb.mode = mode;
        fb.chosen = ArmIndex{1};
        if (mode == FeedbackMode::full) {
          fb.losses.assign(3, 0.0);
          fb.violations.assign(6, -1.0);
        } else {
          fb.losses.assign(1, 0.0);
          fb.violations.assign(2, -1.0);
        }
        est.update(fb);
        ++rep.cases;
        const double expect = std::min(4.0 * std::sqrt(log_term / static_cast<double>(n)), 2.0);
        const double got = opt.radius_scale * est.radius(ArmIndex{1});
        if (std::abs(got - expect) > 1e-12 * expect) {
          rep.fail(std::string(mode == FeedbackMode::full ? "full" : "bandit") + " radius at n=" +
                   std::to_string(n) + " is " + fmt(got) + ", expected " + fmt(expect));
          break;
        }
      }
    }

    // Coverage over seeded runs.
    double worst_coverage = 1.0;
    for (auto id : {AlgorithmId::conomd_fs, AlgorithmId::expopt}) {
      std::vector<CoverageMonitor> averaged, anchored;
      for (std::size_t s = 0; s < opt.seeds; ++s) {
        EnvConfig cfg;
        cfg.horizon = opt.horizon;
        cfg.arms = 3;
        cfg.constraints = 2;
        cfg.pattern = LossPattern::sinusoidal;
        cfg.corruption.base_constraint_means = {{-0.4, -0.6, 0.3}, {0.1, -0.5, -0.2}};
        for (std::size_t r = 0; r < opt.horizon / 5; ++r) cfg.corruption.perturbations.push_back({r, 0, {1.0, 0.0, 0.0}});
        RngStream env_rng = RngStream(opt.seed).split(s);
        const auto inst = build_instance(cfg, env_rng);
        const double C = compute_corruption(inst).total;
        averaged.emplace_back(inst, C, CoverageBound::time_average, opt.radius_scale);
        anchored.emplace_back(inst, C, CoverageBound::anchor, opt.radius_scale);
        RunOptions ro;
        ro.record_rows = false;
        ro.estimator_observer = [&](std::size_t t, const ConstraintEstimator& est) {
          averaged.back().observe(t, est);
          anchored.back().observe(t, est);
        };
        AlgoParams params;
        params.delta = opt.delta;
        (void)run_algorithm(id, inst, params, RngStream(opt.seed + 1 + s), ro);
        ++rep.compared;
      }
      const auto mode = id == AlgorithmId::conomd_fs ? "full" : "bandit";
      for (const auto& [label, runs] : {std::pair{"time-average", &averaged}, std::pair{"anchor", &anchored}}) {
        const double cov = coverage_count(*runs);
        worst_coverage = std::min(worst_coverage, cov);
        if (cov < 1.0 - opt.delta) {
          rep.fail(std::string(mode) + " mode, " + label + " bound: coverage " + fmt(cov) + " below " +
                   fmt(1.0 - opt.delta));
        }
      }
    }
    rep.worst = 1.0 - worst_coverage;
  });
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"projection", "lp", "corruption", "concentration"};
  return names;
}

int cmd_validate(const ValidateOptions& options, std::ostream& report) {
  const auto& names = suite_names();
  if (options.suite && std::find(names.begin(), names.end(), *options.suite) == names.end()) {
    nlohmann::json j{{"passed", false}, {"error", "unknown suite '" + *options.suite + "'"}, {"suites", names}};
    report << j.dump(2) << '\n';
    return 2;
  }
  std::vector<SuiteReport> reports;
  auto wanted = [&](const std::string& n) { return !options.suite || *options.suite == n; };
  if (wanted("projection")) {
    ProjectionSuiteOptions o;
    o.projection_tol = options.projection_tol;
    reports.push_back(projection_suite(o));
  }
  if (wanted("lp")) reports.push_back(lp_suite({}));
  if (wanted("corruption")) reports.push_back(corruption_suite({}));
  if (wanted("concentration")) {
    ConcentrationSuiteOptions o;
    o.radius_scale = options.radius_scale;
    reports.push_back(concentration_suite(o));
  }

  bool all = true;
  nlohmann::json suites = nlohmann::json::array();
  for (const auto& r : reports) {
    all = all && r.passed;
    suites.push_back({{"name", r.name},
                      {"passed", r.passed},
                      {"cases", r.cases},
                      {"compared", r.compared},
                      {"worst", r.worst},
                      {"seconds", r.seconds},
                      {"failures", r.failures}});
  }
  report << nlohmann::json{{"passed", all}, {"suites", suites}}.dump(2) << '\n';
  return all ? 0 : 1;
}

}  // namespace conbandit::harness
