#include "conbandit/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "conbandit/error.hpp"

namespace conbandit {

namespace {

constexpr double kPivotEps = 1e-11;
constexpr double kReducedCostEps = 1e-11;
constexpr double kPhaseOneTol = 1e-9;

// Canonical tableau: rows_ x (cols_ + 1); the last column holds the rhs.
class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * (cols + 1), 0.0), basis_(rows, 0) {}

  double& at(std::size_t r, std::size_t c) { return data_[r * (cols_ + 1) + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * (cols_ + 1) + c]; }
  double& rhs(std::size_t r) { return at(r, cols_); }
  double rhs(std::size_t r) const { return at(r, cols_); }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::vector<std::size_t>& basis() { return basis_; }
  const std::vector<std::size_t>& basis() const { return basis_; }

  void pivot(std::size_t pr, std::size_t pc) {
    const double p = at(pr, pc);
    for (std::size_t c = 0; c <= cols_; ++c) at(pr, c) /= p;
    at(pr, pc) = 1.0;
    for (std::size_t r = 0; r < rows_; ++r) {
      if (r == pr) continue;
      const double f = at(r, pc);
      if (f == 0.0) continue;
      for (std::size_t c = 0; c <= cols_; ++c) at(r, c) -= f * at(pr, c);
      at(r, pc) = 0.0;
    }
    basis_[pr] = pc;
  }

  // Reduced costs d_j = c_j - c_B^T (B^-1 A)_j.
  std::vector<double> reduced_costs(const std::vector<double>& cost) const {
    std::vector<double> d(cost);
    for (std::size_t r = 0; r < rows_; ++r) {
      const double cb = cost[basis_[r]];
      if (cb == 0.0) continue;
      for (std::size_t c = 0; c < cols_; ++c) d[c] -= cb * at(r, c);
    }
    return d;
  }

  // Bland's rule: lowest-index improving column, then min ratio with ties
  // broken on the lowest basic index. Returns false at optimality.
  bool iterate(const std::vector<double>& cost, const std::vector<bool>& may_enter,
               std::size_t& pivots) {
    const auto d = reduced_costs(cost);
    std::size_t enter = cols_;
    for (std::size_t c = 0; c < cols_; ++c) {
      if (may_enter[c] && d[c] < -kReducedCostEps) {
        enter = c;
        break;
      }
    }
    if (enter == cols_) return false;
    std::size_t leave = rows_;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < rows_; ++r) {
      const double a = at(r, enter);
      if (a <= kPivotEps) continue;
      const double ratio = rhs(r) / a;
      if (ratio < best - 1e-14 ||
          (std::abs(ratio - best) <= 1e-14 && leave < rows_ && basis_[r] < basis_[leave])) {
        best = ratio;
        leave = r;
      }
    }
    if (leave == rows_) throw Error(ErrorCode::invalid_argument, "linear program is unbounded");
    pivot(leave, enter);
    ++pivots;
    return true;
  }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
  std::vector<std::size_t> basis_;
};

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

LpCertificate certify(const StandardFormLp& lp, const StandardFormSolution& sol) {
  LpCertificate cert;
  const std::size_t n = lp.cost.size();
  for (double v : sol.x) cert.primal_infeasibility = std::max(cert.primal_infeasibility, -v);
  for (std::size_t r = 0; r < lp.ub_rows.size(); ++r) {
    const double slack = lp.ub_rhs[r] - dot(lp.ub_rows[r], sol.x);
    cert.primal_infeasibility = std::max(cert.primal_infeasibility, -slack);
    cert.dual_infeasibility = std::max(cert.dual_infeasibility, sol.ub_duals[r]);
    cert.complementary_slackness =
        std::max(cert.complementary_slackness, std::abs(sol.ub_duals[r] * slack));
  }
  for (std::size_t r = 0; r < lp.eq_rows.size(); ++r) {
    cert.primal_infeasibility =
        std::max(cert.primal_infeasibility, std::abs(dot(lp.eq_rows[r], sol.x) - lp.eq_rhs[r]));
  }
  double dual_value = dot(lp.ub_rhs, sol.ub_duals) + dot(lp.eq_rhs, sol.eq_duals);
  for (std::size_t j = 0; j < n; ++j) {
    double reduced = lp.cost[j];
    for (std::size_t r = 0; r < lp.ub_rows.size(); ++r) reduced -= sol.ub_duals[r] * lp.ub_rows[r][j];
    for (std::size_t r = 0; r < lp.eq_rows.size(); ++r) reduced -= sol.eq_duals[r] * lp.eq_rows[r][j];
    cert.dual_infeasibility = std::max(cert.dual_infeasibility, -reduced);
    cert.complementary_slackness = std::max(cert.complementary_slackness, std::abs(sol.x[j] * reduced));
  }
  cert.duality_gap = std::abs(sol.value - dual_value);
  return cert;
}

}  // namespace

StandardFormSolution solve_standard_form(const StandardFormLp& lp) {
  const std::size_t n = lp.cost.size();
  const std::size_t n_ub = lp.ub_rows.size();
  const std::size_t n_eq = lp.eq_rows.size();
  if (lp.ub_rhs.size() != n_ub || lp.eq_rhs.size() != n_eq) {
    throw Error(ErrorCode::invalid_dimension, "row and rhs counts differ");
  }
  for (const auto& row : lp.ub_rows) {
    if (row.size() != n) throw Error(ErrorCode::invalid_dimension, "row length differs from cost");
  }
  for (const auto& row : lp.eq_rows) {
    if (row.size() != n) throw Error(ErrorCode::invalid_dimension, "row length differs from cost");
  }

  const std::size_t m = n_ub + n_eq;
  // Row r gets an artificial when its (sign-normalized) slack cannot start
  // basic: every equality row and every <= row with negative rhs.
  std::vector<double> sign(m, 1.0);
  std::vector<bool> needs_artificial(m, false);
  for (std::size_t r = 0; r < n_ub; ++r) {
    if (lp.ub_rhs[r] < 0.0) {
      sign[r] = -1.0;
      needs_artificial[r] = true;
    }
  }
  for (std::size_t r = 0; r < n_eq; ++r) {
    needs_artificial[n_ub + r] = true;
    if (lp.eq_rhs[r] < 0.0) sign[n_ub + r] = -1.0;
  }
  const std::size_t n_art =
      static_cast<std::size_t>(std::count(needs_artificial.begin(), needs_artificial.end(), true));
  const std::size_t slack0 = n, art0 = n + n_ub, cols = n + n_ub + n_art;

  Tableau tab(m, cols);
  std::vector<std::size_t> artificial_of(m, cols);
  std::size_t next_art = art0;
  for (std::size_t r = 0; r < m; ++r) {
    const bool is_ub = r < n_ub;
    const auto& row = is_ub ? lp.ub_rows[r] : lp.eq_rows[r - n_ub];
    const double b = is_ub ? lp.ub_rhs[r] : lp.eq_rhs[r - n_ub];
    for (std::size_t j = 0; j < n; ++j) tab.at(r, j) = sign[r] * row[j];
    if (is_ub) tab.at(r, slack0 + r) = sign[r];
    tab.rhs(r) = sign[r] * b;
    if (needs_artificial[r]) {
      artificial_of[r] = next_art;
      tab.at(r, next_art) = 1.0;
      tab.basis()[r] = next_art++;
    } else {
      tab.basis()[r] = slack0 + r;
    }
  }

  StandardFormSolution sol;
  std::vector<bool> may_enter(cols, true);

  if (n_art > 0) {
    std::vector<double> phase_one(cols, 0.0);
    for (std::size_t c = art0; c < cols; ++c) phase_one[c] = 1.0;
    while (tab.iterate(phase_one, may_enter, sol.pivots)) {}
    double infeasibility = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
      if (tab.basis()[r] >= art0) infeasibility += tab.rhs(r);
    }
    double scale = 1.0;
    for (std::size_t r = 0; r < m; ++r) scale = std::max(scale, std::abs(tab.rhs(r)));
    if (infeasibility > kPhaseOneTol * scale) {
      throw Error(ErrorCode::infeasible_lp, "phase one ended with infeasibility " +
                                                std::to_string(infeasibility));
    }
    // Drive zero-level artificials out of the basis where possible.
    for (std::size_t r = 0; r < m; ++r) {
      if (tab.basis()[r] < art0) continue;
      for (std::size_t c = 0; c < art0; ++c) {
        if (std::abs(tab.at(r, c)) > 1e-9) {
          tab.pivot(r, c);
          ++sol.pivots;
          break;
        }
      }
    }
    for (std::size_t c = art0; c < cols; ++c) may_enter[c] = false;
  }

  std::vector<double> cost(cols, 0.0);
  std::copy(lp.cost.begin(), lp.cost.end(), cost.begin());
  while (tab.iterate(cost, may_enter, sol.pivots)) {}

  sol.x.assign(n, 0.0);
  for (std::size_t r = 0; r < m; ++r) {
    const std::size_t b = tab.basis()[r];
    if (b < n) sol.x[b] = std::max(0.0, tab.rhs(r));
  }
  sol.value = dot(lp.cost, sol.x);

  // Duals of the sign-normalized rows are read off the reduced costs of each
  // row's unit column (slack or artificial), then mapped back to the original
  // row orientation.
  const auto d = tab.reduced_costs(cost);
  sol.ub_duals.assign(n_ub, 0.0);
  sol.eq_duals.assign(n_eq, 0.0);
  for (std::size_t r = 0; r < m; ++r) {
    double y_normalized;
    if (needs_artificial[r]) {
      y_normalized = -d[artificial_of[r]];
    } else {
      y_normalized = -d[slack0 + r];
    }
    const double y = sign[r] * y_normalized;
    if (r < n_ub) {
      sol.ub_duals[r] = y;
    } else {
      sol.eq_duals[r - n_ub] = y;
    }
  }
  sol.certificate = certify(lp, sol);
  return sol;
}

LpSolution solve_lp(const LinearProgram& lp) {
  const std::size_t k = lp.objective.size();
  if (k == 0) throw Error(ErrorCode::invalid_dimension, "empty objective");
  StandardFormLp sf;
  sf.cost = lp.objective;
  for (const auto& row : lp.rows) {
    if (row.coeffs.size() != k) throw Error(ErrorCode::invalid_dimension, "row length differs from K");
    sf.ub_rows.push_back(row.coeffs);
    sf.ub_rhs.push_back(row.rhs);
  }
  if (lp.simplex) {
    sf.eq_rows.emplace_back(k, 1.0);
    sf.eq_rhs.push_back(1.0);
  }
  const auto sol = solve_standard_form(sf);
  LpSolution out;
  out.value = sol.value;
  out.point = sol.x;
  if (lp.simplex) {
    double sum = 0.0;
    for (double v : out.point) sum += v;
    for (double& v : out.point) v /= sum;
  }
  out.duals = sol.ub_duals;
  out.certificate = sol.certificate;
  return out;
}

}  // namespace conbandit
