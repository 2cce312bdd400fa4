#pragma once

#include <cstddef>
#include <vector>

namespace conbandit {

struct Halfspace {
  std::vector<double> coeffs;
  double rhs = 0.0;
};

// Optimality certificate recomputed from the original data after a solve:
// primal and dual residuals, duality gap, complementary slackness. All are
// absolute and non-negative.
struct LpCertificate {
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  double duality_gap = 0.0;
  double complementary_slackness = 0.0;

  bool certified(double tol = 1e-8) const {
    return primal_infeasibility <= tol && dual_infeasibility <= tol && duality_gap <= tol &&
           complementary_slackness <= tol;
  }
};

// min cost^T x  s.t.  ub_rows x <= ub_rhs,  eq_rows x = eq_rhs,  x >= 0.
struct StandardFormLp {
  std::vector<double> cost;
  std::vector<std::vector<double>> ub_rows;
  std::vector<double> ub_rhs;
  std::vector<std::vector<double>> eq_rows;
  std::vector<double> eq_rhs;
};

struct StandardFormSolution {
  double value = 0.0;
  std::vector<double> x;
  std::vector<double> ub_duals;  // <= 0 at optimality
  std::vector<double> eq_duals;
  LpCertificate certificate;
  std::size_t pivots = 0;
};

// Dense two-phase tableau simplex with Bland's rule. Throws infeasible-lp when
// phase one cannot zero the artificials, invalid-argument when unbounded.
StandardFormSolution solve_standard_form(const StandardFormLp& lp);

// min objective^T x over {x >= 0 : rows} intersected with the simplex when
// `simplex` is set.
struct LinearProgram {
  std::vector<double> objective;
  std::vector<Halfspace> rows;
  bool simplex = true;
};

struct LpSolution {
  double value = 0.0;
  std::vector<double> point;
  std::vector<double> duals;  // one per row
  LpCertificate certificate;
};

LpSolution solve_lp(const LinearProgram& lp);

}  // namespace conbandit
