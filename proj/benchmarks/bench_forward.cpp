#include <benchmark/benchmark.h>

#include "likratio/particle_solver.hpp"

namespace {

using namespace likratio;

void BM_Forward(benchmark::State& state) {
  ParticleConfig cfg;
  cfg.particles = static_cast<std::size_t>(state.range(0));
  std::uint64_t seed = 1;
  for (auto _ : state) {
    cfg.seed = seed++;
    benchmark::DoNotOptimize(forward(0.1, cfg, CosineBump{}));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Forward)->RangeMultiplier(10)->Range(100, 1000000)->Unit(benchmark::kMicrosecond);

void BM_ComposedPipeline(benchmark::State& state) {
  const auto p = static_cast<std::size_t>(state.range(0));
  const PeriodicGrid grid(10.0, 100);
  for (auto _ : state) {
    auto ens = propagate(sample_initial(CosineBump{}, p, grid, 3), 0.1, 10.0, 1, 3);
    benchmark::DoNotOptimize(bin(ens));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ComposedPipeline)->Arg(100000)->Unit(benchmark::kMillisecond);

}  // namespace
