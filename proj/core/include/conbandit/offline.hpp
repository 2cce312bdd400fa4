#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "conbandit/env.hpp"
#include "conbandit/lp.hpp"
#include "conbandit/strategy.hpp"

namespace conbandit {

inline constexpr double kOfflineFeasibilityTol = 1e-7;

struct OptResult {
  double value = 0.0;  // cumulative expected loss of the optimum
  Strategy strategy = Strategy::uniform(1);
  LpCertificate certificate;  // of the per-round normalized program
};

// Best fixed strategy in hindsight: min sum_t l_t^T x subject to
// sum_t g_{t,i}^T x <= 0 for every constraint. Throws infeasible-instance.
OptResult solve_opt(const ProblemInstance& inst);

enum class RhoMode { mixed, arm };

struct RhoResult {
  double rho = 0.0;
  Strategy witness = Strategy::uniform(1);
  std::optional<ArmIndex> arm;  // set in arm mode
};

// Largest uniform margin -g_{t,i}^T x over all rounds and constraints, over
// the simplex (mixed) or over the vertices (arm). In mixed mode the T*m rows
// are deduplicated by exact equality unless told otherwise.
RhoResult compute_rho(const ProblemInstance& inst, RhoMode mode, bool deduplicate = true);

struct OfflineSolution {
  double opt_value = 0.0;
  Strategy opt_strategy = Strategy::uniform(1);
  double rho = 0.0;  // mixed
  Strategy rho_strategy = Strategy::uniform(1);
  double rho_arm_value = 0.0;
  ArmIndex rho_arm;
};

OfflineSolution solve_offline(const ProblemInstance& inst);

// Exhaustive search over the simplex lattice with spacing `step` (1/step must
// be an integer), keeping points with rows^T x <= rhs. Each refinement
// re-searches +-2 coarse steps around the incumbent at a tenth of the
// spacing, recentering until the incumbent stays put.
// Returns nullopt when no lattice point is feasible. K above 4 is out of
// scope.
struct GridResult {
  double value = 0.0;
  std::vector<double> point;
};

using SimplexObjective = std::function<double(std::span<const double>)>;

std::optional<GridResult> grid_oracle(std::size_t arms, const SimplexObjective& objective,
                                      const std::vector<Halfspace>& rows, double step,
                                      std::size_t refinements = 0);

}  // namespace conbandit
