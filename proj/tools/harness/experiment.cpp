#include "harness/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "conbandit/error.hpp"
#include "conbandit/instance_io.hpp"
#include "conbandit/metrics.hpp"

namespace conbandit::harness {

namespace fs = std::filesystem;

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// Runs body(i) for i in [0, n) on `jobs` threads; rethrows the first failure
// by index once every worker has joined.
template <class F>
void parallel_for(std::size_t n, std::size_t jobs, F body) {
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min(jobs, std::max<std::size_t>(n, 1));
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string beta_label(double beta) { return num(beta); }

AlphaMode alpha_mode(AlgorithmId id) {
  return id == AlgorithmId::conomd_fs || id == AlgorithmId::conomd_fs_ix ? AlphaMode::full
                                                                          : AlphaMode::bandit;
}

std::string trace_csv(const ProblemInstance& inst, const OfflineSolution& off, const RunRecord& rec) {
  const std::size_t K = inst.arms();
  std::ostringstream out;
  out << "t,arm,loss,cum_regret,cum_violation,projected,status";
  for (std::size_t a = 0; a < K; ++a) out << ",x_" << a;
  out << '\n';
  double loss = 0.0, opt = 0.0;
  std::vector<double> pos(inst.constraints(), 0.0);
  for (const auto& row : rec.rows) {
    loss += row.loss;
    for (std::size_t a = 0; a < K; ++a) opt += inst.loss_mean(row.t, a) * off.opt_strategy[a];
    for (std::size_t i = 0; i < pos.size(); ++i) pos[i] += std::max(row.expected_violation[i], 0.0);
    out << row.t << ',' << row.arm.value << ',' << num(row.loss) << ',' << num(loss - opt) << ','
        << num(*std::max_element(pos.begin(), pos.end())) << ',' << (row.projected ? 1 : 0) << ','
        << to_string(row.status);
    for (double x : row.strategy) out << ',' << num(x);
    out << '\n';
  }
  return out.str();
}

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  const auto tmp = fs::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string trace_name(const RunResult& r) {
  return std::string(to_string(r.algorithm)) + "_T" + std::to_string(r.horizon) + "_seed" +
         std::to_string(r.seed) + ".csv";
}

void write_cell_files(const fs::path& dir, const CellResult& result, bool diagnostics) {
  merge_summary(dir / "summary.csv", result.runs);
  for (const auto& r : result.runs) {
    if (!r.trace_csv.empty()) write_file(dir / "traces" / trace_name(r), r.trace_csv);
  }
  if (diagnostics) {
    std::string out = std::string(kDiagnosticsHeader) + "\n";
    for (const auto& r : result.runs) {
      for (const auto& line : r.diagnostic_rows) out += line + "\n";
    }
    write_file(dir / "diagnostics.csv", out);
  }
}

std::string cell_key(const BudgetSpec& target, std::size_t T) { return target.label + "@" + std::to_string(T); }

}  // namespace

std::vector<Cell> expand_cells(const ExperimentConfig& cfg) {
  std::vector<Cell> cells;
  if (!cfg.sweep) {
    cells.push_back({cfg.algorithm.id, cfg.env.corruption.target, cfg.algorithm.params.beta});
    return cells;
  }
  for (double beta : cfg.sweep->betas) {
    for (const auto& target : cfg.sweep->targets) {
      for (auto id : cfg.sweep->algorithms) cells.push_back({id, target, beta});
    }
  }
  return cells;
}

std::vector<CellResult> execute(const ExperimentConfig& cfg, const std::vector<Cell>& cells,
                                const RunnerOptions& options) {
  // Instances depend only on (C_target, T).
  std::vector<std::pair<BudgetSpec, std::size_t>> keys;
  std::map<std::string, std::size_t> index;
  for (const auto& c : cells) {
    for (auto T : cfg.horizons) {
      if (index.emplace(cell_key(c.target, T), keys.size()).second) keys.emplace_back(c.target, T);
    }
  }
  std::vector<std::optional<PreparedInstance>> prepared(keys.size());
  parallel_for(keys.size(), options.jobs, [&](std::size_t k) {
    const auto& [target, T] = keys[k];
    try {
      RngStream rng(cfg.env.instance_seed);
      auto inst = build_instance(cfg.env.materialize(T, target), rng);
      auto offline = solve_offline(inst);
      auto corruption = compute_corruption(inst);
      prepared[k] = PreparedInstance{std::move(inst), std::move(offline), std::move(corruption)};
    } catch (const Error& e) {
      if (e.code() == ErrorCode::infeasible_instance || e.code() == ErrorCode::infeasible_lp) {
        throw InfeasibleInstance("T=" + std::to_string(T) + ", C_target=" + target.label + ": " + e.what());
      }
      throw;
    }
  });

  struct Job {
    std::size_t cell;
    std::size_t horizon;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (auto T : cfg.horizons) {
      for (auto s : cfg.seeds) jobs.push_back({c, T, s + options.seed_offset});
    }
  }
  std::vector<RunResult> results(jobs.size());
  parallel_for(jobs.size(), options.jobs, [&](std::size_t j) {
    const auto& job = jobs[j];
    const auto& cell = cells[job.cell];
    const auto& prep = *prepared[index.at(cell_key(cell.target, job.horizon))];
    AlgoParams params = cfg.algorithm.params;
    params.beta = cell.beta;
    if (cell.algorithm == AlgorithmId::known_c && !params.known_c) params.known_c = prep.corruption.total;
    RunOptions ro;
    ro.opt_value = prep.offline.opt_value;
    ro.record_rows = options.traces;
    ro.record_decision_sets = cfg.diagnostics;

    const auto t0 = std::chrono::steady_clock::now();
    const auto rec = run_algorithm(cell.algorithm, prep.instance, params, RngStream(job.seed), ro);
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

    RunResult r;
    r.algorithm = cell.algorithm;
    r.horizon = job.horizon;
    r.seed = job.seed;
    r.corruption = prep.corruption.total;
    r.rho = prep.offline.rho;
    r.opt = prep.offline.opt_value;
    r.regret = rec.summary.regret;
    r.violation = rec.summary.violation;
    r.fallbacks = rec.summary.fallback_rounds;
    r.wall_ms = options.wall_time ? std::round(ms * 1000.0) / 1000.0 : 0.0;
    if (options.traces) r.trace_csv = trace_csv(prep.instance, prep.offline, rec);
    if (cfg.diagnostics) {
      auto diag = build_alpha_benchmark(prep.offline, prep.corruption.total, alpha_mode(cell.algorithm),
                                        job.horizon, cell.beta);
      r.alpha_member = check_alpha_membership(diag, rec.decision_sets);
      for (std::size_t k = 0; k < rec.decision_sets.size(); ++k) {
        const auto t = rec.decision_sets[k].round;
        r.diagnostic_rows.push_back(std::to_string(job.seed) + "," + std::to_string(t) + "," +
                                    num(diag.alpha[t]) + "," + (diag.member[k] ? "1" : "0") + "," +
                                    num(diag.worst_slack[k]));
      }
    }
    results[j] = std::move(r);
  });

  std::vector<CellResult> out;
  for (const auto& c : cells) out.push_back({c, {}});
  for (std::size_t j = 0; j < jobs.size(); ++j) out[jobs[j].cell].runs.push_back(std::move(results[j]));
  for (auto& c : out) {
    std::stable_sort(c.runs.begin(), c.runs.end(), [](const RunResult& a, const RunResult& b) {
      return std::tie(a.horizon, a.seed) < std::tie(b.horizon, b.seed);
    });
  }
  return out;
}

std::string format_summary_row(const RunResult& r) {
  return std::string(to_string(r.algorithm)) + "," + std::to_string(r.horizon) + "," + std::to_string(r.seed) +
         "," + num(r.corruption) + "," + num(r.rho) + "," + num(r.opt) + "," + num(r.regret) + "," +
         num(r.violation) + "," + std::to_string(r.fallbacks) + "," + num(r.wall_ms);
}

void merge_summary(const fs::path& path, const std::vector<RunResult>& runs) {
  using Key = std::tuple<std::string, unsigned long long, unsigned long long>;
  std::map<Key, std::string> rows;
  auto key_of = [](const std::string& line) -> std::optional<Key> {
    std::istringstream in(line);
    std::string algo, T, seed;
    if (!std::getline(in, algo, ',') || !std::getline(in, T, ',') || !std::getline(in, seed, ',')) {
      return std::nullopt;
    }
    try {
      return Key{algo, std::stoull(T), std::stoull(seed)};
    } catch (const std::exception&) {
      return std::nullopt;
    }
  };
  if (std::ifstream in(path, std::ios::binary); in) {
    std::string line;
    if (std::getline(in, line) && line != kSummaryHeader) {
      throw std::runtime_error(path.string() + " has an unexpected header; refusing to merge");
    }
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto key = key_of(line);
      if (!key) throw std::runtime_error(path.string() + " has a malformed row: " + line);
      rows[*key] = line;
    }
  }
  for (const auto& r : runs) {
    rows[Key{std::string(to_string(r.algorithm)), r.horizon, r.seed}] = format_summary_row(r);
  }
  std::string out = std::string(kSummaryHeader) + "\n";
  for (const auto& [k, line] : rows) out += line + "\n";
  write_file(path, out);
}

CellFits fit_cell(const CellResult& cell) {
  std::map<std::size_t, std::pair<double, double>> sums;
  std::map<std::size_t, std::size_t> counts;
  for (const auto& r : cell.runs) {
    sums[r.horizon].first += r.regret;
    sums[r.horizon].second += r.violation;
    ++counts[r.horizon];
  }
  std::vector<std::pair<double, double>> regret, violation;
  for (const auto& [T, s] : sums) {
    const double n = static_cast<double>(counts[T]);
    regret.emplace_back(static_cast<double>(T), s.first / n);
    violation.emplace_back(static_cast<double>(T), s.second / n);
  }
  CellFits fits;
  if (regret.size() < 3) return fits;  // a slope needs at least three horizons
  const auto prefix = std::string(to_string(cell.cell.algorithm)) + "," + cell.cell.target.label + ",";
  for (const auto& [metric, points] : {std::pair{"regret", regret}, std::pair{"violation", violation}}) {
    try {
      const auto f = fit_scaling_with_refit(points);
      fits.rows.push_back(prefix + metric + "," + num(f.slope) + "," + num(f.intercept) + "," + num(f.r2) +
                          "," + std::to_string(f.n_points));
    } catch (const Error&) {
      // A non-positive mean has no logarithm.
      fits.rows.push_back(prefix + metric + ",nan,nan,nan,0");
    }
  }
  return fits;
}

fs::path cell_directory(const fs::path& root, const Cell& cell) {
  return root / ("beta_" + beta_label(cell.beta)) / ("C_" + cell.target.label);
}

void write_run_outputs(const ExperimentConfig& cfg, const CellResult& result, const RunnerOptions& options) {
  const fs::path root(cfg.output_dir);
  write_cell_files(root, result, cfg.diagnostics);
  if (options.traces) {
    // Ground truth next to the traces, one instance per horizon.
    std::set<std::size_t> done;
    for (const auto& r : result.runs) {
      if (!done.insert(r.horizon).second) continue;
      RngStream rng(cfg.env.instance_seed);
      const auto inst = build_instance(cfg.env.materialize(r.horizon, result.cell.target), rng);
      write_file(root / "traces" / ("instance_T" + std::to_string(r.horizon) + ".json"), instance_to_json(inst));
    }
  }
}

void write_sweep_outputs(const ExperimentConfig& cfg, const std::vector<CellResult>& results,
                         const RunnerOptions&) {
  const fs::path root(cfg.output_dir);
  std::map<std::string, std::pair<std::string, std::string>> per_beta;  // fits, additive
  for (const auto& res : results) {
    write_cell_files(cell_directory(root, res.cell), res, cfg.diagnostics);
    auto& [fits, additive] = per_beta[beta_label(res.cell.beta)];
    for (const auto& row : fit_cell(res).rows) fits += row + "\n";

    std::map<std::size_t, std::tuple<double, double, double, std::size_t>> by_t;
    for (const auto& r : res.runs) {
      auto& [c, reg, vio, n] = by_t[r.horizon];
      c = r.corruption;
      reg += r.regret;
      vio += r.violation;
      ++n;
    }
    for (const auto& [T, v] : by_t) {
      const auto& [c, reg, vio, n] = v;
      additive += std::string(to_string(res.cell.algorithm)) + "," + std::to_string(T) + "," +
                  res.cell.target.label + "," + num(c) + "," + std::to_string(n) + "," +
                  num(reg / static_cast<double>(n)) + "," + num(vio / static_cast<double>(n)) + "\n";
    }
  }
  for (const auto& [beta, files] : per_beta) {
    write_file(root / ("beta_" + beta) / "fits.csv", std::string(kFitsHeader) + "\n" + files.first);
    write_file(root / ("beta_" + beta) / "additive_c.csv", std::string(kAdditiveHeader) + "\n" + files.second);
  }
}

std::uint64_t seed_offset_from_env() {
  const char* raw = std::getenv("CONBANDIT_SEED_OFFSET");
  if (raw == nullptr || *raw == '\0') return 0;
  const std::string s(raw);
  if (!std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); })) {
    throw ConfigError(0, "CONBANDIT_SEED_OFFSET must be an unsigned integer, got '" + s + "'");
  }
  try {
    return std::stoull(s);
  } catch (const std::exception&) {
    throw ConfigError(0, "CONBANDIT_SEED_OFFSET out of range: '" + s + "'");
  }
}

namespace {

int guarded(const std::string& config_path, RunnerOptions options, bool sweep) {
  try {
    options.seed_offset = seed_offset_from_env();
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  try {
    auto cfg = load_config(config_path);
    if (sweep && !cfg.sweep) throw ConfigError(1, "config: sweep needs a 'sweep' grid");
    if (!sweep && cfg.sweep) throw ConfigError(1, "config: 'sweep' grids are only accepted by `conbandit sweep`");
    const auto cells = expand_cells(cfg);
    const auto results = execute(cfg, cells, options);
    if (sweep) {
      write_sweep_outputs(cfg, results, options);
    } else {
      write_run_outputs(cfg, results.front(), options);
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << config_path << ": " << e.what() << '\n';
    return 2;
  } catch (const InfeasibleInstance& e) {
    std::cerr << "infeasible instance: " << e.what() << '\n';
    return 3;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::invalid_config) {
      std::cerr << config_path << ": " << e.what() << '\n';
      return 2;
    }
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace

int cmd_run(const std::string& config_path, const RunnerOptions& options) {
  return guarded(config_path, options, false);
}

int cmd_sweep(const std::string& config_path, const RunnerOptions& options) {
  return guarded(config_path, options, true);
}

}  // namespace conbandit::harness
