#include <benchmark/benchmark.h>

#include "likratio/reference_solver.hpp"

namespace {

using namespace likratio;

void BM_FdSolve(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const ReferenceConfig cfg{0.1, 10.0, 0.1, PeriodicGrid(10.0, n)};
  for (auto _ : state) benchmark::DoNotOptimize(fd_solve(CosineBump{}, cfg));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_FdSolve)->RangeMultiplier(4)->Range(25, 6400)->Complexity(benchmark::oN);

}  // namespace
