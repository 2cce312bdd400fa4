#include "conbandit/offline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "conbandit/error.hpp"

namespace conbandit {

OptResult solve_opt(const ProblemInstance& inst) {
  const std::size_t T = inst.horizon(), K = inst.arms(), m = inst.constraints();
  // Per-round averages keep the program O(1)-scaled for any horizon.
  LinearProgram lp;
  lp.objective.assign(K, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    auto row = inst.loss_row(t);
    for (std::size_t a = 0; a < K; ++a) lp.objective[a] += row[a];
  }
  for (double& c : lp.objective) c /= static_cast<double>(T);
  const auto avg = inst.average_constraints();
  for (std::size_t i = 0; i < m; ++i) {
    lp.rows.push_back({std::vector<double>(avg.begin() + static_cast<std::ptrdiff_t>(i * K),
                                           avg.begin() + static_cast<std::ptrdiff_t>((i + 1) * K)),
                       0.0});
  }
  LpSolution sol;
  try {
    sol = solve_lp(lp);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::infeasible_lp) {
      throw Error(ErrorCode::infeasible_instance, "aggregated constraints admit no strategy");
    }
    throw;
  }
  OptResult out;
  out.strategy = Strategy::normalized(sol.point);
  out.value = 0.0;
  for (std::size_t t = 0; t < T; ++t) out.value += out.strategy.dot(inst.loss_row(t));
  out.certificate = sol.certificate;
  return out;
}

RhoResult compute_rho(const ProblemInstance& inst, RhoMode mode, bool deduplicate) {
  const std::size_t T = inst.horizon(), K = inst.arms(), m = inst.constraints();
  RhoResult out;
  if (mode == RhoMode::arm) {
    double best = -std::numeric_limits<double>::infinity();
    std::size_t best_arm = 0;
    for (std::size_t a = 0; a < K; ++a) {
      double worst = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t t = 0; t < T; ++t) worst = std::min(worst, -inst.constraint_mean(i, t, a));
      }
      if (worst > best) {
        best = worst;
        best_arm = a;
      }
    }
    out.rho = best;
    out.arm = ArmIndex{best_arm};
    out.witness = Strategy::point_mass(K, ArmIndex{best_arm});
    return out;
  }

  std::vector<std::vector<double>> rows;
  rows.reserve(T * m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t t = 0; t < T; ++t) {
      auto g = inst.constraint_row(i, t);
      rows.emplace_back(g.begin(), g.end());
    }
  }
  if (deduplicate) {
    std::sort(rows.begin(), rows.end());
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  }
  // Variables (x, s) with s = r + 1 >= 0: min -s  s.t.  g^T x + s <= 1.
  StandardFormLp lp;
  lp.cost.assign(K + 1, 0.0);
  lp.cost[K] = -1.0;
  for (const auto& g : rows) {
    std::vector<double> row(g);
    row.push_back(1.0);
    lp.ub_rows.push_back(std::move(row));
    lp.ub_rhs.push_back(1.0);
  }
  std::vector<double> simplex_row(K + 1, 1.0);
  simplex_row[K] = 0.0;
  lp.eq_rows.push_back(std::move(simplex_row));
  lp.eq_rhs.push_back(1.0);
  const auto sol = solve_standard_form(lp);
  out.rho = sol.x[K] - 1.0;
  out.witness = Strategy::normalized(std::vector<double>(sol.x.begin(), sol.x.begin() + static_cast<std::ptrdiff_t>(K)));
  return out;
}

OfflineSolution solve_offline(const ProblemInstance& inst) {
  OfflineSolution out;
  const auto opt = solve_opt(inst);
  out.opt_value = opt.value;
  out.opt_strategy = opt.strategy;
  const auto mixed = compute_rho(inst, RhoMode::mixed);
  out.rho = mixed.rho;
  out.rho_strategy = mixed.witness;
  const auto arm = compute_rho(inst, RhoMode::arm);
  out.rho_arm_value = arm.rho;
  out.rho_arm = *arm.arm;
  return out;
}

namespace {

bool feasible(std::span<const double> x, const std::vector<Halfspace>& rows) {
  for (const auto& h : rows) {
    double s = 0.0;
    for (std::size_t a = 0; a < x.size(); ++a) s += h.coeffs[a] * x[a];
    if (s > h.rhs + 1e-12) return false;
  }
  return true;
}

struct Search {
  std::size_t arms;
  const SimplexObjective& objective;
  const std::vector<Halfspace>& rows;
  std::optional<GridResult> best;

  void consider(const std::vector<double>& x) {
    if (!feasible(x, rows)) return;
    const double v = objective(x);
    if (!best || v < best->value) best = GridResult{v, x};
  }

  // Full lattice: integer compositions of n into `arms` parts.
  void full(std::size_t n) {
    std::vector<std::size_t> counts(arms, 0);
    std::vector<double> x(arms, 0.0);
    const double h = 1.0 / static_cast<double>(n);
    recurse_full(0, n, counts, x, h);
  }

  void recurse_full(std::size_t a, std::size_t remaining, std::vector<std::size_t>& counts,
                    std::vector<double>& x, double h) {
    if (a + 1 == arms) {
      counts[a] = remaining;
      x[a] = static_cast<double>(remaining) * h;
      consider(x);
      return;
    }
    for (std::size_t c = 0; c <= remaining; ++c) {
      counts[a] = c;
      x[a] = static_cast<double>(c) * h;
      recurse_full(a + 1, remaining - c, counts, x, h);
    }
  }

  // Local lattice around `center` with spacing h, radius 2*coarse.
  void local(const std::vector<double>& center, double h, double radius) {
    std::vector<double> x(arms, 0.0);
    const auto span = static_cast<long>(std::llround(radius / h));
    recurse_local(0, center, h, span, x, 0.0);
  }

  void recurse_local(std::size_t a, const std::vector<double>& center, double h, long span,
                     std::vector<double>& x, double partial) {
    if (a + 1 == arms) {
      const double last = 1.0 - partial;
      if (last < -1e-12) return;
      x[a] = std::max(0.0, last);
      consider(x);
      return;
    }
    for (long k = -span; k <= span; ++k) {
      const double v = center[a] + static_cast<double>(k) * h;
      if (v < -1e-12 || v > 1.0 + 1e-12) continue;
      x[a] = std::clamp(v, 0.0, 1.0);
      recurse_local(a + 1, center, h, span, x, partial + x[a]);
    }
  }
};

}  // namespace

std::optional<GridResult> grid_oracle(std::size_t arms, const SimplexObjective& objective,
                                      const std::vector<Halfspace>& rows, double step,
                                      std::size_t refinements) {
  if (arms == 0) throw Error(ErrorCode::invalid_dimension, "K must be at least 1");
  if (arms > 4) throw Error(ErrorCode::oracle_scope, "grid oracle supports K <= 4");
  if (!(step > 0.0 && step <= 1.0)) throw Error(ErrorCode::invalid_argument, "step must be in (0,1]");
  for (const auto& h : rows) {
    if (h.coeffs.size() != arms) throw Error(ErrorCode::invalid_dimension, "row length differs from K");
  }
  const auto n = static_cast<std::size_t>(std::llround(1.0 / step));
  Search search{arms, objective, rows, std::nullopt};
  search.full(n);
  double h = 1.0 / static_cast<double>(n);
  for (std::size_t level = 0; level < refinements && search.best; ++level) {
    // Walk the finer lattice until the incumbent stops moving.
    for (int pass = 0; pass < 100; ++pass) {
      const auto center = search.best->point;
      search.local(center, h / 10.0, 2.0 * h);
      if (search.best->point == center) break;
    }
    h /= 10.0;
  }
  return search.best;
}

}  // namespace conbandit
