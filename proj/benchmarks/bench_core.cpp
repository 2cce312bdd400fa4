#include <benchmark/benchmark.h>

#include <vector>

#include "conbandit/algorithms.hpp"
#include "conbandit/env.hpp"
#include "conbandit/lp.hpp"
#include "conbandit/offline.hpp"
#include "conbandit/omd.hpp"
#include "conbandit/rng.hpp"

using namespace conbandit;

namespace {

// Rows with a strictly feasible arm 0 so the set is never empty.
DecisionSet random_set(RngStream& rng, std::size_t K, std::size_t m) {
  std::vector<double> rows(K * m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t a = 0; a < K; ++a) rows[i * K + a] = a == 0 ? -0.5 : -0.6 + 1.4 * rng.uniform();
  }
  return DecisionSet(K, m, std::move(rows));
}

void BM_KlProject(benchmark::State& state) {
  const auto K = static_cast<std::size_t>(state.range(0));
  const auto m = static_cast<std::size_t>(state.range(1));
  RngStream rng(1);
  std::vector<DecisionSet> sets;
  std::vector<std::vector<double>> raws;
  for (int k = 0; k < 64; ++k) {
    sets.push_back(random_set(rng, K, m));
    std::vector<double> raw(K);
    for (double& v : raw) v = 0.02 + rng.uniform();
    raws.push_back(std::move(raw));
  }
  std::size_t k = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(kl_project(raws[k % 64], sets[k % 64]));
    ++k;
  }
}
BENCHMARK(BM_KlProject)->Args({3, 1})->Args({3, 2})->Args({5, 2})->Args({10, 5})->Args({20, 10});

void BM_SolveLp(benchmark::State& state) {
  const auto K = static_cast<std::size_t>(state.range(0));
  const auto rows = static_cast<std::size_t>(state.range(1));
  RngStream rng(2);
  LinearProgram lp;
  lp.objective.resize(K);
  for (double& c : lp.objective) c = rng.uniform();
  for (std::size_t r = 0; r < rows; ++r) {
    Halfspace h{std::vector<double>(K), 0.0};
    for (std::size_t a = 0; a < K; ++a) h.coeffs[a] = a == 0 ? -0.3 : -1.0 + 2.0 * rng.uniform();
    lp.rows.push_back(std::move(h));
  }
  for (auto _ : state) benchmark::DoNotOptimize(solve_lp(lp));
}
BENCHMARK(BM_SolveLp)->Args({3, 2})->Args({5, 20})->Args({10, 100})->Args({20, 400});

EnvConfig switching_env(std::size_t T) {
  EnvConfig cfg;
  cfg.horizon = T;
  cfg.arms = 5;
  cfg.constraints = 2;
  cfg.pattern = LossPattern::switching;
  cfg.loss_base = {0.3, 0.45, 0.7, 0.8, 0.9};
  cfg.corruption.base_constraint_means = {{-0.5, 0.5, 0.4, 0.6, 0.3}, {-0.4, 0.3, 0.6, 0.2, 0.5}};
  cfg.corruption.preset = CorruptionPreset::burst;
  cfg.corruption.target_budget = 64.0;
  cfg.corruption.amplitude = 0.5;
  return cfg;
}

void BM_SolveOffline(benchmark::State& state) {
  RngStream rng(3);
  const auto inst = build_instance(switching_env(static_cast<std::size_t>(state.range(0))), rng);
  for (auto _ : state) benchmark::DoNotOptimize(solve_offline(inst));
}
BENCHMARK(BM_SolveOffline)->Arg(1 << 10)->Arg(1 << 14)->Unit(benchmark::kMillisecond);

void BM_ComputeCorruption(benchmark::State& state) {
  RngStream rng(4);
  const auto inst = build_instance(switching_env(static_cast<std::size_t>(state.range(0))), rng);
  for (auto _ : state) benchmark::DoNotOptimize(compute_corruption(inst));
}
BENCHMARK(BM_ComputeCorruption)->Arg(1 << 10)->Arg(1 << 14)->Unit(benchmark::kMillisecond);

void BM_Run(benchmark::State& state) {
  const auto id = static_cast<AlgorithmId>(state.range(0));
  RngStream rng(5);
  const auto inst = build_instance(switching_env(1 << 12), rng);
  RunOptions opt;
  opt.opt_value = solve_opt(inst).value;
  opt.record_rows = false;
  AlgoParams params;
  params.known_c = compute_corruption(inst).total;
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(run_algorithm(id, inst, params, RngStream(seed++), opt));
  state.SetLabel(std::string(to_string(id)) + ", T=4096");
}
BENCHMARK(BM_Run)
    ->Arg(static_cast<int>(AlgorithmId::conomd_fs))
    ->Arg(static_cast<int>(AlgorithmId::conomd_fs_ix))
    ->Arg(static_cast<int>(AlgorithmId::expopt))
    ->Arg(static_cast<int>(AlgorithmId::known_c))
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
