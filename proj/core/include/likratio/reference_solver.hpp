#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <variant>

#include "likratio/covariance.hpp"
#include "likratio/grid.hpp"
#include "likratio/observation.hpp"

namespace likratio {

/// rho0(x) = (1 + cos(2 pi x / L)) / L. Nonnegative, unit mass, a single
/// Fourier mode, so the diffusion problem has a closed-form solution.
struct CosineBump {};

/// A piecewise-constant initial density given on its own grid.
class TabulatedDensity {
 public:
  /// Requires nonnegative values and sum(values) * dx = 1 within 1e-10.
  explicit TabulatedDensity(DensityField density);

  const DensityField& density() const noexcept { return density_; }
  double max_value() const noexcept { return max_value_; }

 private:
  DensityField density_;
  double max_value_;
};

using InitialCondition = std::variant<CosineBump, TabulatedDensity>;

/// Pointwise value of the initial density on [0, length).
double initial_density(const InitialCondition& ic, double x, double length);

/// Upper bound of the initial density, used as rejection-sampling envelope.
double initial_envelope(const InitialCondition& ic, double length);

/// Cell-center samples of the initial density. A tabulated density must be
/// given on `grid` itself (UnsupportedInput otherwise).
DensityField sample_on_grid(const InitialCondition& ic, const PeriodicGrid& grid);

/// Number of steps t/dt, which must be an integer within 1e-9. t = 0 gives
/// zero steps. Throws InvalidArgument otherwise.
std::size_t step_count(double final_time, double time_step);

struct ReferenceConfig {
  double diffusion = 0.1;
  double final_time = 10.0;
  double time_step = 0.1;
  PeriodicGrid grid{10.0, 100};

  /// Validates the configuration and returns t / dt.
  std::size_t steps() const;
};

/// Spectral solution of d_t rho = D d_xx rho on the periodic domain, sampled
/// at cell centers. CosineBump is exact; a tabulated density is treated as
/// its trigonometric interpolant on the same grid, whose modes decay as
/// exp(-D (2 pi m / L)^2 t).
DensityField exact_solution(const InitialCondition& ic, double diffusion,
                            double final_time, const PeriodicGrid& grid);

/// Crank-Nicolson in time, second-order central differences in space, with
/// periodic coupling. Each step solves the circulant system by cyclic
/// tridiagonal elimination.
DensityField fd_solve(const InitialCondition& ic, const ReferenceConfig& cfg);

/// field + one draw of N(0, noise). Deterministic in seed.
Observation synthesize_observation(const DensityField& field,
                                   const CovarianceSpec& noise, std::uint64_t seed);

/// `cell_index,x_center,value`, one row per cell, 17 significant digits.
void write_density_csv(std::ostream& out, const DensityField& field);
DensityField read_density_csv(std::istream& in, double length);

}  // namespace likratio
