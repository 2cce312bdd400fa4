#include "conbandit/omd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "conbandit/error.hpp"
#include "conbandit/lp.hpp"

namespace conbandit {

DecisionSet::DecisionSet(std::size_t arms, std::size_t constraints, std::vector<double> rows)
    : arms_(arms), constraints_(constraints), rows_(std::move(rows)) {
  if (arms_ == 0) throw Error(ErrorCode::invalid_dimension, "decision set over zero arms");
  if (rows_.size() != arms_ * constraints_) {
    throw Error(ErrorCode::invalid_dimension, "decision set needs m*K coefficients");
  }
}

double DecisionSet::residual(std::size_t i, std::span<const double> x) const {
  auto r = row(i);
  double s = 0.0;
  for (std::size_t a = 0; a < arms_; ++a) s += r[a] * x[a];
  return s;
}

double DecisionSet::max_residual(std::span<const double> x) const {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < constraints_; ++i) worst = std::max(worst, residual(i, x));
  return worst;
}

DecisionSet build_decision_set(const ConstraintEstimator& est) {
  const auto& p = est.params();
  std::vector<double> rows(p.constraints * p.arms);
  for (std::size_t a = 0; a < p.arms; ++a) {
    const double radius = est.radius(ArmIndex{a});
    for (std::size_t i = 0; i < p.constraints; ++i) {
      rows[i * p.arms + a] = est.mean(i, ArmIndex{a}) - radius;
    }
  }
  return DecisionSet(p.arms, p.constraints, std::move(rows));
}

DecisionSet build_decision_set_known_c(const ConstraintEstimator& est, double corruption) {
  const auto& p = est.params();
  std::vector<double> rows(p.constraints * p.arms);
  for (std::size_t a = 0; a < p.arms; ++a) {
    const double radius = est.radius_known_c(ArmIndex{a}, corruption);
    for (std::size_t i = 0; i < p.constraints; ++i) {
      rows[i * p.arms + a] = est.mean(i, ArmIndex{a}) - radius;
    }
  }
  return DecisionSet(p.arms, p.constraints, std::move(rows));
}

std::vector<double> unconstrained_md_point(const Strategy& x, std::span<const double> loss,
                                           double eta) {
  if (loss.size() != x.size()) throw Error(ErrorCode::invalid_dimension, "loss length differs from K");
  std::vector<double> out(x.size());
  for (std::size_t a = 0; a < x.size(); ++a) out[a] = x[a] * std::exp(-eta * loss[a]);
  return out;
}

const char* to_string(ProjectionStatus status) {
  switch (status) {
    case ProjectionStatus::interior: return "interior";
    case ProjectionStatus::boundary: return "boundary";
    case ProjectionStatus::fallback: return "fallback";
  }
  return "interior";
}

namespace {

constexpr double kExponentClamp = 500.0;
constexpr double kArmijo = 1e-4;
constexpr double kBacktrack = 0.5;
constexpr double kDivergedMultiplier = 1e12;

struct DualPoint {
  std::vector<double> x;
  std::vector<double> grad;  // rows_i^T x(lambda)
  double phi = 0.0;
};

class Dual {
 public:
  Dual(std::span<const double> raw, const DecisionSet& ds) : ds_(ds), log_raw_(raw.size()) {
    for (std::size_t a = 0; a < raw.size(); ++a) log_raw_[a] = std::log(raw[a]);
  }

  DualPoint eval(std::span<const double> lambda) const {
    const std::size_t K = ds_.arms(), m = ds_.constraints();
    DualPoint p;
    p.x.resize(K);
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < K; ++a) {
      double s = 0.0;
      for (std::size_t i = 0; i < m; ++i) s += lambda[i] * ds_.row(i)[a];
      s = std::clamp(s, -kExponentClamp, kExponentClamp);
      p.x[a] = log_raw_[a] - s;
      top = std::max(top, p.x[a]);
    }
    double total = 0.0;
    for (double& z : p.x) {
      z = std::exp(z - top);
      total += z;
    }
    for (double& z : p.x) z /= total;
    p.phi = -(top + std::log(total));
    p.grad.resize(m);
    for (std::size_t i = 0; i < m; ++i) p.grad[i] = ds_.residual(i, p.x);
    return p;
  }

 private:
  const DecisionSet& ds_;
  std::vector<double> log_raw_;
};

bool converged(const DualPoint& p, std::span<const double> lambda, double tol) {
  double worst = -std::numeric_limits<double>::infinity();
  double slack = 0.0;
  for (std::size_t i = 0; i < p.grad.size(); ++i) {
    worst = std::max(worst, p.grad[i]);
    slack += lambda[i] * std::abs(p.grad[i]);
  }
  return worst <= tol && slack <= tol;
}

bool all_zero(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

ProjectionResult finish(DualPoint p, std::vector<double> lambda, std::size_t iterations,
                        bool monotone) {
  ProjectionResult r;
  r.status = all_zero(lambda) ? ProjectionStatus::interior : ProjectionStatus::boundary;
  r.point = Strategy::normalized(std::move(p.x));
  r.multipliers = std::move(lambda);
  r.iterations = iterations;
  r.dual_monotone = monotone;
  return r;
}

ProjectionResult fall_back(const DecisionSet& ds, std::vector<double> lambda,
                           std::size_t iterations, bool monotone) {
  ProjectionResult r;
  r.status = ProjectionStatus::fallback;
  r.point = feasibility_check(ds).witness;
  r.multipliers = std::move(lambda);
  r.iterations = iterations;
  r.dual_monotone = monotone;
  return r;
}

ProjectionResult bisect(const Dual& dual, const DecisionSet& ds, const ProjectionOptions& opt) {
  std::vector<double> lambda{0.0};
  auto p = dual.eval(lambda);
  if (p.grad[0] <= opt.tol) return finish(std::move(p), {0.0}, 0, true);

  // g(lambda) = row^T x(lambda) decreases toward the smallest row entry.
  const auto r = ds.row(0);
  if (*std::min_element(r.begin(), r.end()) > 0.0) return fall_back(ds, {0.0}, 0, true);

  double lo = 0.0;
  double hi = opt.warm_start.size() == 1 ? std::max(opt.warm_start[0], 1.0) : 1.0;
  std::size_t iter = 0;
  DualPoint at_hi = dual.eval(std::span<const double>(&hi, 1));
  while (at_hi.grad[0] > 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > kDivergedMultiplier || ++iter >= opt.max_iter) return fall_back(ds, {lo}, iter, true);
    at_hi = dual.eval(std::span<const double>(&hi, 1));
  }
  while (iter < opt.max_iter) {
    if (at_hi.grad[0] <= opt.tol && hi * std::abs(at_hi.grad[0]) <= opt.tol) break;
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
    double mid = 0.5 * (lo + hi);
    auto at_mid = dual.eval(std::span<const double>(&mid, 1));
    ++iter;
    if (at_mid.grad[0] > 0.0) {
      lo = mid;
    } else {
      hi = mid;
      at_hi = std::move(at_mid);
    }
  }
  return finish(std::move(at_hi), {hi}, iter, true);
}

ProjectionResult ascend(const Dual& dual, const DecisionSet& ds, const ProjectionOptions& opt) {
  const std::size_t m = ds.constraints();
  std::vector<double> lambda(m, 0.0);
  if (opt.warm_start.size() == m) {
    for (std::size_t i = 0; i < m; ++i) lambda[i] = std::max(0.0, opt.warm_start[i]);
  }
  // The warm start only helps when the set actually binds; cold-check first.
  auto p = dual.eval(std::vector<double>(m, 0.0));
  if (p.grad.size() && *std::max_element(p.grad.begin(), p.grad.end()) <= opt.tol) {
    return finish(std::move(p), std::vector<double>(m, 0.0), 0, true);
  }
  if (!all_zero(lambda)) p = dual.eval(lambda);

  bool monotone = true;
  double step = 1.0;
  std::vector<double> next(m);
  for (std::size_t iter = 0; iter < opt.max_iter; ++iter) {
    if (converged(p, lambda, opt.tol)) return finish(std::move(p), std::move(lambda), iter, monotone);

    bool accepted = false;
    DualPoint q;
    double trial = step;
    for (int k = 0; k < 80; ++k) {
      double ascent = 0.0;
      bool moved = false;
      for (std::size_t i = 0; i < m; ++i) {
        next[i] = std::max(0.0, lambda[i] + trial * p.grad[i]);
        ascent += p.grad[i] * (next[i] - lambda[i]);
        moved = moved || next[i] != lambda[i];
      }
      if (!moved) break;
      q = dual.eval(next);
      if (q.phi >= p.phi + kArmijo * ascent) {
        accepted = true;
        break;
      }
      trial *= kBacktrack;
    }
    if (!accepted) break;
    if (q.phi < p.phi - 1e-12) monotone = false;

    // Barzilai-Borwein trial step for the next iteration.
    double ss = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double s = next[i] - lambda[i];
      ss += s * s;
      sy -= s * (q.grad[i] - p.grad[i]);
    }
    step = sy > 0.0 ? std::clamp(ss / sy, 1e-8, 1e8) : 2.0 * trial;

    lambda = next;
    p = std::move(q);
    if (*std::max_element(lambda.begin(), lambda.end()) > kDivergedMultiplier) break;
  }
  if (converged(p, lambda, opt.tol)) return finish(std::move(p), std::move(lambda), opt.max_iter, monotone);
  // Feasible but slackness not reached: still a valid point of X_t.
  if (*std::max_element(p.grad.begin(), p.grad.end()) <= opt.tol) {
    return finish(std::move(p), std::move(lambda), opt.max_iter, monotone);
  }
  return fall_back(ds, std::move(lambda), opt.max_iter, monotone);
}

}  // namespace

ProjectionResult kl_project(std::span<const double> raw, const DecisionSet& ds,
                            const ProjectionOptions& options) {
  if (raw.size() != ds.arms()) throw Error(ErrorCode::invalid_dimension, "raw length differs from K");
  for (double v : raw) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::invalid_argument, "raw point must be entrywise positive");
    }
  }
  const Dual dual(raw, ds);
  if (ds.constraints() == 0) return finish(dual.eval({}), {}, 0, true);
  if (ds.constraints() == 1) return bisect(dual, ds, options);
  return ascend(dual, ds, options);
}

Strategy fixed_share_mix(const Strategy& x, std::size_t horizon) {
  if (horizon == 0) throw Error(ErrorCode::invalid_argument, "horizon must be positive");
  const double T = static_cast<double>(horizon);
  const double K = static_cast<double>(x.size());
  const double floor = 1.0 / (T * K);
  std::vector<double> out(x.size());
  for (std::size_t a = 0; a < x.size(); ++a) out[a] = (1.0 - 1.0 / T) * x[a] + floor;
  return Strategy(std::move(out));
}

FeasibilityResult feasibility_check(const DecisionSet& ds) {
  const std::size_t K = ds.arms(), m = ds.constraints();
  FeasibilityResult out;
  if (m == 0) {
    out.nonempty = true;
    out.witness = Strategy::uniform(K);
    out.worst_residual = -std::numeric_limits<double>::infinity();
    return out;
  }
  double shift = 1.0;
  for (double v : ds.rows()) shift = std::max(shift, std::abs(v) + 1.0);
  // Variables (x, s') with s = s' - shift >= -max|row|:
  // min s'  s.t.  rows_i^T x - s' <= -shift,  sum x = 1.
  StandardFormLp lp;
  lp.cost.assign(K + 1, 0.0);
  lp.cost[K] = 1.0;
  for (std::size_t i = 0; i < m; ++i) {
    auto r = ds.row(i);
    std::vector<double> row(r.begin(), r.end());
    row.push_back(-1.0);
    lp.ub_rows.push_back(std::move(row));
    lp.ub_rhs.push_back(-shift);
  }
  std::vector<double> simplex_row(K + 1, 1.0);
  simplex_row[K] = 0.0;
  lp.eq_rows.push_back(std::move(simplex_row));
  lp.eq_rhs.push_back(1.0);
  const auto sol = solve_standard_form(lp);
  out.witness = Strategy::normalized(
      std::vector<double>(sol.x.begin(), sol.x.begin() + static_cast<std::ptrdiff_t>(K)));
  out.worst_residual = ds.max_residual(out.witness.probs());
  out.nonempty = out.worst_residual <= 1e-7;
  return out;
}

double kl_divergence(std::span<const double> x, std::span<const double> y) {
  double d = 0.0;
  for (std::size_t a = 0; a < x.size(); ++a) {
    if (x[a] > 0.0) d += x[a] * std::log(x[a] / y[a]);
    d -= x[a] - y[a];
  }
  return d;
}

}  // namespace conbandit
