#include <benchmark/benchmark.h>

#include <vector>

#include "rankone/construction.hpp"
#include "rankone/limits.hpp"
#include "rankone/mobius.hpp"
#include "rankone/sarnak.hpp"
#include "rankone/tower.hpp"

using namespace rankone;

static void BM_Sieve(benchmark::State& state) {
  const auto n = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sieve_mobius(n));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Sieve)->Arg(10000)->Arg(1000000);

static void BM_BuildLabels(benchmark::State& state) {
  const auto chacon = Construction::chacon();
  const int K = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(build_labels(chacon, 2, K));
}
BENCHMARK(BM_BuildLabels)->DenseRange(8, 12, 2);

static void BM_Correlate(benchmark::State& state) {
  const auto chacon = Construction::chacon();
  const TowerModel model = build_labels(chacon, 2, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(correlate(chacon, model, 13));
}
BENCHMARK(BM_Correlate)->DenseRange(8, 12, 2);

static void BM_Fit(benchmark::State& state) {
  const auto chacon = Construction::chacon();
  const int Z = static_cast<int>(state.range(0));
  const TowerModel model = build_labels(chacon, 2, 10);
  const auto measures = level_measures(model);
  std::vector<CorrelationMatrix> basis;
  for (int z = -Z; z <= Z; ++z) basis.push_back(correlate(chacon, model, z));
  const auto target = correlate(chacon, model, 40);
  for (auto _ : state) benchmark::DoNotOptimize(fit_limit_polynomial(target, basis, measures, Z));
}
BENCHMARK(BM_Fit)->Arg(2)->Arg(4)->Arg(8);

static void BM_MobiusSum(benchmark::State& state) {
  const auto chacon = Construction::chacon();
  const auto N = static_cast<std::uint64_t>(state.range(0));
  const MobiusTable table(N);
  const TowerModel model = build_labels(chacon, 1, depth_for_levels(chacon, 1, N + 1));
  const auto f = Observable::indicator(1, 1, {0});
  for (auto _ : state) benchmark::DoNotOptimize(mobius_weighted_sum(model, f, 0, N, table));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MobiusSum)->Arg(100000);

BENCHMARK_MAIN();
