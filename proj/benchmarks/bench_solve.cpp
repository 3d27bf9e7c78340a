#include <benchmark/benchmark.h>

#include <random>

#include "dper/executor.hpp"
#include "dper/generate.hpp"
#include "dper/planner.hpp"

using namespace dper;

namespace {

Problem banded(int width, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  BandedProblemParams params;
  params.band = width - 1;
  params.num_exist = 40;
  params.clauses_per_window = params.band;
  params.clause_len = 4;
  return banded_problem(params, rng);
}

void BM_SolveByWidth(benchmark::State& state) {
  Problem p = banded(static_cast<int>(state.range(0)), 7);
  PjTree t = plan(p);
  SolveStats stats;
  for (auto _ : state) {
    SolveResult r = solve(p, t);
    stats = r.stats;
    benchmark::DoNotOptimize(r.maximum);
  }
  state.counters["width"] = stats.width;
  state.counters["peak_nodes"] = static_cast<double>(stats.peak_diagram_nodes);
}
BENCHMARK(BM_SolveByWidth)->DenseRange(5, 20, 5)->Unit(benchmark::kMillisecond);

void BM_Plan(benchmark::State& state) {
  Problem p = banded(static_cast<int>(state.range(0)), 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(plan(p));
  }
}
BENCHMARK(BM_Plan)->DenseRange(5, 20, 5)->Unit(benchmark::kMillisecond);

void BM_Monolithic(benchmark::State& state) {
  std::mt19937_64 rng(11);
  RandomProblemParams params;
  params.min_vars = params.max_vars = static_cast<int>(state.range(0));
  params.min_clauses = params.max_clauses = 2 * params.max_vars;
  params.min_clause_len = 2;
  params.max_clause_len = 3;
  Problem p = random_problem(params, rng);
  PjTree t = plan(p);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_monolithic(p).maximum);
  }
  state.counters["width"] = width(t, p);
}
BENCHMARK(BM_Monolithic)->DenseRange(8, 20, 4)->Unit(benchmark::kMillisecond);

}  // namespace
