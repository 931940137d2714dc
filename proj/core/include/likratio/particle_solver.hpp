#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "likratio/grid.hpp"
#include "likratio/parallel.hpp"
#include "likratio/reference_solver.hpp"

namespace likratio {

/// P particle positions on the periodic domain.
class ParticleEnsemble {
 public:
  /// Every position must lie in [0, L).
  ParticleEnsemble(PeriodicGrid grid, std::vector<double> positions);

  const PeriodicGrid& grid() const noexcept { return grid_; }
  std::span<const double> positions() const noexcept { return positions_; }
  std::size_t size() const noexcept { return positions_.size(); }

 private:
  PeriodicGrid grid_;
  std::vector<double> positions_;
};

enum class VarianceEstimator {
  plug_in,     ///< binomial plug-in from the binned field itself
  replicates,  ///< sample variance over independent forward runs
};

struct ParticleConfig {
  std::size_t particles = 1000;
  double final_time = 10.0;
  /// Euler-Maruyama step; the process has constant diffusion, so a single
  /// step of length t is exact in law.
  double time_step = 10.0;
  PeriodicGrid grid{10.0, 100};
  std::uint64_t seed = 0;
  VarianceEstimator variance = VarianceEstimator::plug_in;
  std::size_t variance_replicates = 32;
  Execution exec{};

  /// Validates and returns t / dt.
  std::size_t steps() const;
};

/// Realization of the approximate forward map at one diffusion coefficient.
struct ForwardOutput {
  DensityField field;
  std::vector<double> cell_variances;
  /// sqrt(max_n cell_variances[n]).
  double sigma_delta = 0.0;
  std::size_t particles = 0;
};

/// P i.i.d. draws from the initial density by rejection against a uniform
/// envelope. Particle p uses substream p / chunk_size, so the result
/// depends on (seed, chunk_size) but not on the thread count.
ParticleEnsemble sample_initial(const InitialCondition& ic, std::size_t particles,
                                const PeriodicGrid& grid, std::uint64_t seed,
                                const Execution& exec = {});

/// `steps` Euler-Maruyama updates X += sqrt(2 D dt) W, wrapping after each.
ParticleEnsemble propagate(const ParticleEnsemble& ensemble, double diffusion,
                           double time_step, std::size_t steps, std::uint64_t seed,
                           const Execution& exec = {});

/// Histogram density count_n / (P dx).
DensityField bin(const ParticleEnsemble& ensemble);

/// Binomial plug-in v_n = p_n (1 - p_n) / (P dx^2), p_n = value_n dx.
std::vector<double> estimate_cell_variances(const DensityField& field,
                                            std::size_t particles);

/// Per-cell sample variance of the binned field over `replicates`
/// independent runs (seeds derived from cfg.seed).
std::vector<double> replicate_cell_variances(double diffusion, const ParticleConfig& cfg,
                                             const InitialCondition& ic,
                                             std::size_t replicates);

/// sample_initial -> propagate -> bin -> variance estimate, fused per chunk
/// so positions are never materialized. Bit-identical to the composition of
/// the individual operations with the same seed and chunk size.
ForwardOutput forward(double diffusion, const ParticleConfig& cfg,
                      const InitialCondition& ic);

/// `cell_index,x_center,density,variance` rows, then
/// `# sigma_delta=<v> P=<P> seed=<seed>`.
void write_forward_csv(std::ostream& out, const ForwardOutput& output,
                       std::uint64_t seed);

}  // namespace likratio
