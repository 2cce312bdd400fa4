#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "conbandit/algorithms.hpp"
#include "conbandit/diagnostics.hpp"
#include "conbandit/env.hpp"
#include "conbandit/offline.hpp"
#include "harness/config.hpp"

namespace conbandit::harness {

inline constexpr const char* kSummaryHeader =
    "algorithm,T,seed,C_realized,rho,opt,regret,violation,fallbacks,wall_ms";
inline constexpr const char* kFitsHeader = "algorithm,C_target,metric,slope,intercept,r2,n_points";
inline constexpr const char* kDiagnosticsHeader = "seed,t,alpha,member,worst_row_slack";
inline constexpr const char* kAdditiveHeader =
    "algorithm,T,C_target,C_realized,n_seeds,mean_regret,mean_violation";

struct RunnerOptions {
  bool traces = false;
  bool wall_time = false;     // otherwise wall_ms is written as 0 so reruns are byte-identical
  std::size_t jobs = 0;       // 0 means hardware concurrency
  std::uint64_t seed_offset = 0;
};

// One (algorithm, C_target, beta) combination of a sweep; `run` has exactly one.
struct Cell {
  AlgorithmId algorithm = AlgorithmId::conomd_fs;
  BudgetSpec target;
  double beta = 0.5;
};

struct RunResult {
  AlgorithmId algorithm = AlgorithmId::conomd_fs;
  std::size_t horizon = 0;
  std::uint64_t seed = 0;  // after the offset
  double corruption = 0.0;
  double rho = 0.0;
  double opt = 0.0;
  double regret = 0.0;
  double violation = 0.0;
  std::size_t fallbacks = 0;
  double wall_ms = 0.0;
  std::string trace_csv;  // filled with --traces
  bool alpha_member = false;
  std::vector<std::string> diagnostic_rows;  // filled when diagnostics are on
};

struct CellResult {
  Cell cell;
  std::vector<RunResult> runs;  // sorted by (T, seed)
};

// Ground truth for one (C_target, T).
struct PreparedInstance {
  ProblemInstance instance;
  OfflineSolution offline;
  CorruptionReport corruption;
};

// Thrown when an instance cannot be built or has no feasible optimum.
class InfeasibleInstance : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<Cell> expand_cells(const ExperimentConfig& cfg);

// Builds every instance and runs every (cell, T, seed) across a worker pool.
// Output order does not depend on completion order.
std::vector<CellResult> execute(const ExperimentConfig& cfg, const std::vector<Cell>& cells,
                                const RunnerOptions& options);

std::string format_summary_row(const RunResult& r);

// Writes header + rows, replacing rows that share (algorithm, T, seed) with an
// existing file at `path` and keeping the others. Rows are sorted by key.
void merge_summary(const std::filesystem::path& path, const std::vector<RunResult>& runs);

// Mean regret and violation per T, fitted on log-log axes. Empty with fewer
// than three horizons; nan fields when a mean is not positive.
struct CellFits {
  std::vector<std::string> rows;  // fits CSV rows without header
};
CellFits fit_cell(const CellResult& cell);

// Directory of a sweep cell under the output root.
std::filesystem::path cell_directory(const std::filesystem::path& root, const Cell& cell);

void write_run_outputs(const ExperimentConfig& cfg, const CellResult& result, const RunnerOptions& options);
void write_sweep_outputs(const ExperimentConfig& cfg, const std::vector<CellResult>& results,
                         const RunnerOptions& options);

// Seed offset from CONBANDIT_SEED_OFFSET; throws ConfigError when malformed.
std::uint64_t seed_offset_from_env();

// Exit codes: 0 ok, 2 invalid config, 3 infeasible instance, 1 anything else.
int cmd_run(const std::string& config_path, const RunnerOptions& options);
int cmd_sweep(const std::string& config_path, const RunnerOptions& options);

}  // namespace conbandit::harness
