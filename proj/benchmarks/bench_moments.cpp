#include <benchmark/benchmark.h>

#include "likratio/moments.hpp"

namespace {

using namespace likratio;

void BM_RatioMomentScalar(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  const auto q = scalar_query(dim, 1, 1.0, 0.5, 0.5, 0.0, 0.0);
  for (auto _ : state) benchmark::DoNotOptimize(ratio_moment(q));
}
BENCHMARK(BM_RatioMomentScalar)->Arg(1)->Arg(10)->Arg(100);

void BM_EmpiricalMoment(benchmark::State& state) {
  const auto q = scalar_query(1, 1, 1.0, 0.5, 0.5, 0.0, 0.0);
  std::uint64_t seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(empirical_ratio_moment(q, 100000, seed++));
  state.SetItemsProcessed(state.iterations() * 100000);
}
BENCHMARK(BM_EmpiricalMoment)->Unit(benchmark::kMillisecond);

}  // namespace
