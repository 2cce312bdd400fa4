#pragma once

// Independent reference computations for the test suites and `validate`.
// Nothing here calls the routine it is used to check.

#include <cstddef>
#include <optional>
#include <vector>

#include "conbandit/env.hpp"
#include "conbandit/offline.hpp"
#include "conbandit/omd.hpp"
#include "conbandit/rng.hpp"

namespace conbandit::oracle {

// Grid search of each anchor coordinate over {-1, -1+step, ..., 1}; returns
// (C, per-constraint C_i).
struct GridCorruption {
  double total = 0.0;
  std::vector<double> per_constraint;
};
GridCorruption corruption_grid(const ProblemInstance& inst, double step);

// sum_t ||g_{t,i} - h||_1 for an arbitrary anchor h.
double anchor_cost(const ProblemInstance& inst, std::size_t constraint, const std::vector<double>& h);

// Lattice search over the simplex plus, for K <= 3, 1-D lattices along every
// constraint facet and the facet intersection points. A plain simplex lattice
// misses optima pinned to a tilted facet by far more than its spacing.
std::optional<GridResult> face_lattice_search(std::size_t arms, const SimplexObjective& objective,
                                              const std::vector<Halfspace>& rows, double step,
                                              std::size_t refinements);

// Exhaustive minimization of D(x || raw) over the decision set, via the face
// lattice search.
std::optional<GridResult> kl_grid(const std::vector<double>& raw, const DecisionSet& ds,
                                  double step, std::size_t refinements);

// Random small instance with uniform means, loss in [0,1], constraints in
// [-1,1], and one arm pinned strictly feasible by `margin` in every round.
ProblemInstance random_small_instance(RngStream& rng, std::size_t T, std::size_t K, std::size_t m,
                                      double margin = 0.1);

double l1_distance(std::span<const double> a, std::span<const double> b);

}  // namespace conbandit::oracle

namespace conbandit::oracle {

struct ProjectionCase {
  std::vector<double> raw;
  DecisionSet set;
};

// Positive raw weights in [0.02, 1] and row entries uniform in [lo, hi].
ProjectionCase random_projection_case(RngStream& rng, std::size_t K, std::size_t m,
                                      double lo = -1.5, double hi = 1.0);

}  // namespace conbandit::oracle
