#include <benchmark/benchmark.h>

#include <random>

#include "dper/pbf.hpp"

using namespace dper;

namespace {

PbFunc random_func(DiagramStore& store, int n, std::mt19937_64& rng) {
  std::vector<Variable> vars;
  for (int i = 1; i <= n; ++i) {
    vars.push_back(Variable(i));
  }
  std::uniform_int_distribution<int> k(0, 8);
  std::vector<double> values(std::size_t{1} << n);
  for (double& v : values) {
    v = k(rng) / 8.0;
  }
  return from_table(store, vars, values);
}

void BM_Join(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(1);
  for (auto _ : state) {
    DiagramStore store(VarOrder::natural(n));
    PbFunc f = random_func(store, n, rng);
    PbFunc g = random_func(store, n, rng);
    benchmark::DoNotOptimize(join(f, g));
  }
}
BENCHMARK(BM_Join)->DenseRange(6, 14, 4);

void BM_ExistsProject(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(2);
  for (auto _ : state) {
    DiagramStore store(VarOrder::natural(n));
    PbFunc f = random_func(store, n, rng);
    for (int i = 1; i <= n; ++i) {
      f = exists_project(f, Variable(i));
    }
    benchmark::DoNotOptimize(f);
  }
}
BENCHMARK(BM_ExistsProject)->DenseRange(6, 14, 4);

void BM_RandProject(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(3);
  for (auto _ : state) {
    DiagramStore store(VarOrder::natural(n));
    PbFunc f = random_func(store, n, rng);
    for (int i = n; i >= 1; --i) {
      f = rand_project(f, Variable(i), 0.4);
    }
    benchmark::DoNotOptimize(f);
  }
}
BENCHMARK(BM_RandProject)->DenseRange(6, 14, 4);

void BM_Dsgn(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(4);
  DiagramStore store(VarOrder::natural(n));
  PbFunc f = random_func(store, n, rng);
  for (auto _ : state) {
    store.clear_cache();
    benchmark::DoNotOptimize(dsgn(f, Variable(n / 2)));
  }
}
BENCHMARK(BM_Dsgn)->DenseRange(6, 14, 4);

}  // namespace
