#include "likratio/particle_solver.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <ostream>
#include <string>

#include "likratio/csv.hpp"
#include "likratio/errors.hpp"
#include "likratio/random.hpp"

namespace likratio {

namespace {

constexpr std::uint64_t kInitialTag = 0x1417;
constexpr std::uint64_t kPropagateTag = 0x2e55;
constexpr std::uint64_t kReplicateTag = 0x7e91;

std::size_t chunk_count(std::size_t items, std::size_t chunk_size) {
  return (items + chunk_size - 1) / chunk_size;
}

void require_chunking(const Execution& exec) {
  if (exec.chunk_size == 0) throw InvalidArgument("chunk size must be positive");
}

void sample_chunk(const InitialCondition& ic, const PeriodicGrid& grid,
                  double envelope, std::uint64_t seed, std::size_t chunk,
                  std::span<double> out) {
  RandomStream rng(derive_seed(seed, {kInitialTag}), chunk);
  const double length = grid.length();
  for (double& x : out) {
    for (;;) {
      const double candidate = length * rng.uniform();
      if (rng.uniform() * envelope < initial_density(ic, candidate, length)) {
        x = candidate;
        break;
      }
    }
  }
}

void propagate_chunk(std::span<double> positions, const PeriodicGrid& grid,
                     double scale, std::size_t steps, std::uint64_t seed,
                     std::size_t chunk) {
  RandomStream rng(derive_seed(seed, {kPropagateTag}), chunk);
  for (double& x : positions) {
    for (std::size_t s = 0; s < steps; ++s) x = wrap(x + scale * rng.normal(), grid);
  }
}

double checked_envelope(const InitialCondition& ic, const PeriodicGrid& grid) {
  const double envelope = initial_envelope(ic, grid.length());
  if (!(envelope > 0.0)) {
    throw InvalidArgument("initial density has zero mass");
  }
  return envelope;
}

double propagation_scale(double diffusion, double time_step) {
  if (!(diffusion >= 0.0) || !std::isfinite(diffusion)) {
    throw InvalidArgument("diffusion coefficient must be nonnegative and finite");
  }
  if (!(time_step > 0.0) || !std::isfinite(time_step)) {
    throw InvalidArgument("time step must be positive and finite");
  }
  return std::sqrt(2.0 * diffusion * time_step);
}

DensityField field_from_counts(const PeriodicGrid& grid,
                               const std::vector<std::uint64_t>& counts,
                               std::size_t particles) {
  std::vector<double> values(counts.size());
  const double norm = static_cast<double>(particles) * grid.spacing();
  for (std::size_t n = 0; n < counts.size(); ++n) {
    values[n] = static_cast<double>(counts[n]) / norm;
  }
  return DensityField(grid, std::move(values));
}

double max_sigma(const std::vector<double>& variances) {
  return std::sqrt(*std::max_element(variances.begin(), variances.end()));
}

}  // namespace

ParticleEnsemble::ParticleEnsemble(PeriodicGrid grid, std::vector<double> positions)
    : grid_(grid), positions_(std::move(positions)) {
  if (positions_.empty()) throw InvalidArgument("ensemble needs at least one particle");
  for (double x : positions_) {
    if (!(x >= 0.0 && x < grid_.length())) {
      throw InvalidArgument("particle position outside [0, L)");
    }
  }
}

std::size_t ParticleConfig::steps() const {
  if (particles == 0) throw InvalidArgument("particle count must be positive");
  require_chunking(exec);
  if (variance == VarianceEstimator::replicates && variance_replicates < 2) {
    throw InvalidArgument("replicate variance estimation needs at least 2 replicates");
  }
  return step_count(final_time, time_step);
}

ParticleEnsemble sample_initial(const InitialCondition& ic, std::size_t particles,
                                const PeriodicGrid& grid, std::uint64_t seed,
                                const Execution& exec) {
  if (particles == 0) throw InvalidArgument("particle count must be positive");
  require_chunking(exec);
  const double envelope = checked_envelope(ic, grid);
  std::vector<double> positions(particles);
  parallel_for(chunk_count(particles, exec.chunk_size), exec.threads, [&](std::size_t c) {
    const std::size_t begin = c * exec.chunk_size;
    const std::size_t end = std::min(particles, begin + exec.chunk_size);
    sample_chunk(ic, grid, envelope, seed, c,
                 std::span<double>(positions).subspan(begin, end - begin));
  });
  return ParticleEnsemble(grid, std::move(positions));
}

ParticleEnsemble propagate(const ParticleEnsemble& ensemble, double diffusion,
                           double time_step, std::size_t steps, std::uint64_t seed,
                           const Execution& exec) {
  require_chunking(exec);
  const double scale = propagation_scale(diffusion, time_step);
  std::vector<double> positions(ensemble.positions().begin(), ensemble.positions().end());
  const std::size_t total = positions.size();
  parallel_for(chunk_count(total, exec.chunk_size), exec.threads, [&](std::size_t c) {
    const std::size_t begin = c * exec.chunk_size;
    const std::size_t end = std::min(total, begin + exec.chunk_size);
    propagate_chunk(std::span<double>(positions).subspan(begin, end - begin),
                    ensemble.grid(), scale, steps, seed, c);
  });
  return ParticleEnsemble(ensemble.grid(), std::move(positions));
}

DensityField bin(const ParticleEnsemble& ensemble) {
  const auto& grid = ensemble.grid();
  std::vector<std::uint64_t> counts(grid.cells(), 0);
  for (double x : ensemble.positions()) ++counts[grid.cell_of(x)];
  return field_from_counts(grid, counts, ensemble.size());
}

std::vector<double> estimate_cell_variances(const DensityField& field,
                                            std::size_t particles) {
  if (particles == 0) throw InvalidArgument("particle count must be positive");
  const double dx = field.grid().spacing();
  const auto p_count = static_cast<double>(particles);
  std::vector<double> out(field.size());
  for (std::size_t n = 0; n < field.size(); ++n) {
    const double p = std::clamp(field[n] * dx, 0.0, 1.0);
    out[n] = p * (1.0 - p) / (p_count * dx * dx);
  }
  return out;
}

namespace {

DensityField run_binned(double diffusion, const ParticleConfig& cfg,
                        const InitialCondition& ic, std::uint64_t seed) {
  const std::size_t steps = cfg.steps();
  const double envelope = checked_envelope(ic, cfg.grid);
  const double scale = propagation_scale(diffusion, cfg.time_step);
  const std::size_t chunk_size = cfg.exec.chunk_size;
  const std::size_t particles = cfg.particles;

  std::vector<std::uint64_t> counts(cfg.grid.cells(), 0);
  std::mutex merge_mutex;
  parallel_for(chunk_count(particles, chunk_size), cfg.exec.threads, [&](std::size_t c) {
    const std::size_t begin = c * chunk_size;
    const std::size_t size = std::min(particles, begin + chunk_size) - begin;
    std::vector<double> positions(size);
    sample_chunk(ic, cfg.grid, envelope, seed, c, positions);
    if (steps > 0) propagate_chunk(positions, cfg.grid, scale, steps, seed, c);
    std::vector<std::uint64_t> local(cfg.grid.cells(), 0);
    for (double x : positions) ++local[cfg.grid.cell_of(x)];
    // Integer counts: merge order cannot affect the result.
    std::lock_guard lock(merge_mutex);
    for (std::size_t n = 0; n < local.size(); ++n) counts[n] += local[n];
  });
  return field_from_counts(cfg.grid, counts, particles);
}

}  // namespace

std::vector<double> replicate_cell_variances(double diffusion, const ParticleConfig& cfg,
                                             const InitialCondition& ic,
                                             std::size_t replicates) {
  if (replicates < 2) {
    throw InvalidArgument("replicate variance estimation needs at least 2 replicates");
  }
  const std::size_t cells = cfg.grid.cells();
  std::vector<double> mean(cells, 0.0);
  std::vector<double> m2(cells, 0.0);
  for (std::size_t r = 0; r < replicates; ++r) {
    const DensityField field =
        run_binned(diffusion, cfg, ic, derive_seed(cfg.seed, {kReplicateTag, r}));
    const double count = static_cast<double>(r + 1);
    for (std::size_t n = 0; n < cells; ++n) {
      const double delta = field[n] - mean[n];
      mean[n] += delta / count;
      m2[n] += delta * (field[n] - mean[n]);
    }
  }
  for (double& v : m2) v /= static_cast<double>(replicates - 1);
  return m2;
}

ForwardOutput forward(double diffusion, const ParticleConfig& cfg,
                      const InitialCondition& ic) {
  DensityField field = run_binned(diffusion, cfg, ic, cfg.seed);
  std::vector<double> variances =
      cfg.variance == VarianceEstimator::plug_in
          ? estimate_cell_variances(field, cfg.particles)
          : replicate_cell_variances(diffusion, cfg, ic, cfg.variance_replicates);
  const double sigma = max_sigma(variances);
  return ForwardOutput{std::move(field), std::move(variances), sigma, cfg.particles};
}

void write_forward_csv(std::ostream& out, const ForwardOutput& output,
                       std::uint64_t seed) {
  out << "cell_index,x_center,density,variance\n";
  const auto& grid = output.field.grid();
  for (std::size_t n = 0; n < output.field.size(); ++n) {
    out << n << ',' << csv::format_real(grid.center(n)) << ','
        << csv::format_real(output.field[n]) << ','
        << csv::format_real(output.cell_variances[n]) << '\n';
  }
  out << "# sigma_delta=" << csv::format_real(output.sigma_delta)
      << " P=" << output.particles << " seed=" << seed << '\n';
}

}  // namespace likratio
