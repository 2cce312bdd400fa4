#include "harness/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace conbandit::oracle {

GridCorruption corruption_grid(const ProblemInstance& inst, double step) {
  const std::size_t T = inst.horizon(), K = inst.arms(), m = inst.constraints();
  const auto n = static_cast<long>(std::llround(2.0 / step));
  GridCorruption out;
  for (std::size_t i = 0; i < m; ++i) {
    double c_i = 0.0;
    for (std::size_t a = 0; a < K; ++a) {
      double best = std::numeric_limits<double>::infinity();
      for (long k = 0; k <= n; ++k) {
        const double h = -1.0 + static_cast<double>(k) * step;
        double cost = 0.0;
        for (std::size_t t = 0; t < T; ++t) cost += std::abs(inst.constraint_mean(i, t, a) - h);
        best = std::min(best, cost);
      }
      c_i += best;
    }
    out.per_constraint.push_back(c_i);
    out.total = std::max(out.total, c_i);
  }
  return out;
}

double anchor_cost(const ProblemInstance& inst, std::size_t constraint, const std::vector<double>& h) {
  double cost = 0.0;
  for (std::size_t t = 0; t < inst.horizon(); ++t) {
    for (std::size_t a = 0; a < inst.arms(); ++a) {
      cost += std::abs(inst.constraint_mean(constraint, t, a) - h[a]);
    }
  }
  return cost;
}

namespace {

constexpr double kFaceTol = 1e-12;

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

struct FaceSearch {
  const SimplexObjective& objective;
  const std::vector<Halfspace>& rows;
  std::optional<GridResult> best;

  bool admissible(const std::vector<double>& x) const {
    for (double v : x) {
      if (v < -kFaceTol) return false;
    }
    for (const auto& h : rows) {
      if (dot(h.coeffs, x) > h.rhs + kFaceTol) return false;
    }
    return true;
  }

  void consider(std::vector<double> x) {
    for (double& v : x) v = std::max(v, 0.0);
    if (!admissible(x)) return;
    const double v = objective(x);
    if (!best || v < best->value) best = GridResult{v, std::move(x)};
  }

  // Lattice on the segment p -> q, then recentring refinements.
  void segment(const std::vector<double>& p, const std::vector<double>& q, double step,
               std::size_t refinements) {
    const double len = l1_distance(p, q);
    const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(len / step)));
    auto at = [&](double s) {
      std::vector<double> x(p.size());
      for (std::size_t a = 0; a < p.size(); ++a) x[a] = p[a] + s * (q[a] - p[a]);
      return x;
    };
    double best_s = -1.0, best_v = std::numeric_limits<double>::infinity();
    auto probe = [&](double s) {
      if (s < 0.0 || s > 1.0) return;
      auto x = at(s);
      for (double& v : x) v = std::max(v, 0.0);
      if (!admissible(x)) return;
      const double v = objective(x);
      if (v < best_v) {
        best_v = v;
        best_s = s;
      }
    };
    for (std::size_t k = 0; k <= n; ++k) probe(static_cast<double>(k) / static_cast<double>(n));
    if (best_s < 0.0) return;
    double h = 1.0 / static_cast<double>(n);
    for (std::size_t level = 0; level < refinements + 2; ++level) {
      for (int pass = 0; pass < 100; ++pass) {
        const double center = best_s;
        for (int k = -20; k <= 20; ++k) probe(center + k * h / 10.0);
        if (best_s == center) break;
      }
      h /= 10.0;
    }
    consider(at(best_s));
  }
};

// Points where row.x = rhs meets the edges of the 3-simplex.
std::vector<std::vector<double>> facet_endpoints(const Halfspace& h) {
  std::vector<std::vector<double>> pts;
  for (std::size_t b = 0; b < 3; ++b) {
    for (std::size_t c = b + 1; c < 3; ++c) {
      const double cb = h.coeffs[b], cc = h.coeffs[c];
      if (cb == cc) continue;
      const double theta = (h.rhs - cc) / (cb - cc);
      if (theta < 0.0 || theta > 1.0) continue;
      std::vector<double> x(3, 0.0);
      x[b] = theta;
      x[c] = 1.0 - theta;
      bool dup = false;
      for (const auto& p : pts) dup = dup || l1_distance(p, x) < 1e-15;
      if (!dup) pts.push_back(std::move(x));
    }
  }
  return pts;
}

}  // namespace

std::optional<GridResult> face_lattice_search(std::size_t arms, const SimplexObjective& objective,
                                              const std::vector<Halfspace>& rows, double step,
                                              std::size_t refinements) {
  FaceSearch search{objective, rows, grid_oracle(arms, objective, rows, step, refinements)};
  if (arms == 2) {
    for (const auto& h : rows) {
      const double c0 = h.coeffs[0], c1 = h.coeffs[1];
      if (c0 == c1) continue;
      const double x0 = (h.rhs - c1) / (c0 - c1);
      if (x0 >= 0.0 && x0 <= 1.0) search.consider({x0, 1.0 - x0});
    }
  } else if (arms == 3) {
    for (const auto& h : rows) {
      const auto pts = facet_endpoints(h);
      if (pts.size() == 2) search.segment(pts[0], pts[1], step, refinements);
      if (pts.size() == 1) search.consider(pts[0]);
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (std::size_t j = i + 1; j < rows.size(); ++j) {
        // Cramer's rule on rows i, j and the simplex equation.
        const double A[3][3] = {{rows[i].coeffs[0], rows[i].coeffs[1], rows[i].coeffs[2]},
                                {rows[j].coeffs[0], rows[j].coeffs[1], rows[j].coeffs[2]},
                                {1.0, 1.0, 1.0}};
        const double rhs[3] = {rows[i].rhs, rows[j].rhs, 1.0};
        auto det = [](const double M[3][3]) {
          return M[0][0] * (M[1][1] * M[2][2] - M[1][2] * M[2][1]) -
                 M[0][1] * (M[1][0] * M[2][2] - M[1][2] * M[2][0]) +
                 M[0][2] * (M[1][0] * M[2][1] - M[1][1] * M[2][0]);
        };
        const double d = det(A);
        if (std::abs(d) < 1e-14) continue;
        std::vector<double> x(3);
        for (std::size_t col = 0; col < 3; ++col) {
          double M[3][3];
          for (std::size_t r = 0; r < 3; ++r)
            for (std::size_t c = 0; c < 3; ++c) M[r][c] = c == col ? rhs[r] : A[r][c];
          x[col] = det(M) / d;
        }
        search.consider(x);
      }
    }
  }
  return search.best;
}

std::optional<GridResult> kl_grid(const std::vector<double>& raw, const DecisionSet& ds,
                                  double step, std::size_t refinements) {
  std::vector<Halfspace> rows;
  for (std::size_t i = 0; i < ds.constraints(); ++i) {
    auto r = ds.row(i);
    rows.push_back({std::vector<double>(r.begin(), r.end()), 0.0});
  }
  auto objective = [&raw](std::span<const double> x) {
    double d = 0.0;
    for (std::size_t a = 0; a < x.size(); ++a) {
      if (x[a] > 0.0) d += x[a] * std::log(x[a] / raw[a]);
      d -= x[a] - raw[a];
    }
    return d;
  };
  return face_lattice_search(raw.size(), objective, rows, step, refinements);
}

ProblemInstance random_small_instance(RngStream& rng, std::size_t T, std::size_t K, std::size_t m,
                                      double margin) {
  std::vector<double> losses(T * K);
  for (double& v : losses) v = rng.uniform();
  const auto safe = std::min(K - 1, static_cast<std::size_t>(rng.uniform() * K));
  std::vector<double> constraints(m * T * K);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t a = 0; a < K; ++a) {
        double g = -1.0 + 2.0 * rng.uniform();
        if (a == safe) g = -margin - (1.0 - margin) * rng.uniform();
        constraints[(i * T + t) * K + a] = g;
      }
    }
  }
  return ProblemInstance(T, K, m, std::move(losses), std::move(constraints));
}

double l1_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d += std::abs(a[k] - b[k]);
  return d;
}

}  // namespace conbandit::oracle

namespace conbandit::oracle {

ProjectionCase random_projection_case(RngStream& rng, std::size_t K, std::size_t m, double lo,
                                      double hi) {
  std::vector<double> raw(K);
  for (double& v : raw) v = 0.02 + 0.98 * rng.uniform();
  std::vector<double> rows(m * K);
  for (double& v : rows) v = lo + (hi - lo) * rng.uniform();
  return {std::move(raw), DecisionSet(K, m, std::move(rows))};
}

}  // namespace conbandit::oracle
