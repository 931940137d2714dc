#include "likratio/reference_solver.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <istream>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "likratio/csv.hpp"
#include "likratio/errors.hpp"
#include "likratio/random.hpp"

namespace likratio {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Constant-coefficient circulant tridiagonal system with `diag` on the
// diagonal and `off` on both off-diagonals and both corners. Factored once,
// solved by the Sherman-Morrison cyclic reduction of a Thomas solve.
class CyclicTridiagonal {
 public:
  CyclicTridiagonal(double diag, double off, std::size_t n)
      : n_(n), off_(off), gamma_(-diag) {
    // Modified diagonal of the non-cyclic part: b0 - gamma, b_{n-1} - off^2/gamma.
    std::vector<double> b(n, diag);
    b.front() = diag - gamma_;
    b.back() = diag - off * off / gamma_;
    c_prime_.resize(n);
    denom_.resize(n);
    denom_[0] = b[0];
    c_prime_[0] = off / denom_[0];
    for (std::size_t i = 1; i < n; ++i) {
      denom_[i] = b[i] - off * c_prime_[i - 1];
      c_prime_[i] = off / denom_[i];
    }
    std::vector<double> u(n, 0.0);
    u.front() = gamma_;
    u.back() = off;
    z_ = thomas(std::move(u));
    z_factor_ = 1.0 + z_.front() + off_ * z_.back() / gamma_;
  }

  void solve(std::vector<double>& rhs) const {
    rhs = thomas(std::move(rhs));
    const double fact = (rhs.front() + off_ * rhs.back() / gamma_) / z_factor_;
    for (std::size_t i = 0; i < n_; ++i) rhs[i] -= fact * z_[i];
  }

 private:
  std::vector<double> thomas(std::vector<double> d) const {
    d[0] /= denom_[0];
    for (std::size_t i = 1; i < n_; ++i) d[i] = (d[i] - off_ * d[i - 1]) / denom_[i];
    for (std::size_t i = n_ - 1; i-- > 0;) d[i] -= c_prime_[i] * d[i + 1];
    return d;
  }

  std::size_t n_;
  double off_;
  double gamma_;
  std::vector<double> c_prime_;
  std::vector<double> denom_;
  std::vector<double> z_;
  double z_factor_ = 1.0;
};

// y = x + (r/2) * Laplacian(x) with periodic neighbours.
void explicit_half_step(const std::vector<double>& x, double half_r,
                        std::vector<double>& y) {
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double left = x[(i + n - 1) % n];
    const double right = x[(i + 1) % n];
    y[i] = x[i] + half_r * (left - 2.0 * x[i] + right);
  }
}

}  // namespace

TabulatedDensity::TabulatedDensity(DensityField density)
    : density_(std::move(density)), max_value_(0.0) {
  for (double v : density_.values()) {
    if (v < 0.0) throw InvalidArgument("tabulated initial density must be nonnegative");
    max_value_ = std::max(max_value_, v);
  }
  if (std::abs(density_.mass() - 1.0) > 1e-10) {
    throw InvalidArgument(fmt::format(
        "tabulated initial density must have unit mass, got {:.17g}", density_.mass()));
  }
}

double initial_density(const InitialCondition& ic, double x, double length) {
  if (const auto* tab = std::get_if<TabulatedDensity>(&ic)) {
    const auto& field = tab->density();
    return field[field.grid().cell_of(wrap(x, field.grid()))];
  }
  return (1.0 + std::cos(kTwoPi * x / length)) / length;
}

double initial_envelope(const InitialCondition& ic, double length) {
  if (const auto* tab = std::get_if<TabulatedDensity>(&ic)) return tab->max_value();
  return 2.0 / length;
}

DensityField sample_on_grid(const InitialCondition& ic, const PeriodicGrid& grid) {
  if (const auto* tab = std::get_if<TabulatedDensity>(&ic)) {
    if (!(tab->density().grid() == grid)) {
      throw UnsupportedInput("tabulated initial density is defined on a different grid");
    }
    return tab->density();
  }
  std::vector<double> values(grid.cells());
  for (std::size_t n = 0; n < grid.cells(); ++n) {
    values[n] = initial_density(ic, grid.center(n), grid.length());
  }
  return DensityField(grid, std::move(values));
}

std::size_t step_count(double final_time, double time_step) {
  if (!(final_time >= 0.0) || !std::isfinite(final_time)) {
    throw InvalidArgument("final time must be nonnegative and finite");
  }
  if (!(time_step > 0.0) || !std::isfinite(time_step)) {
    throw InvalidArgument("time step must be positive and finite");
  }
  const double ratio = final_time / time_step;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
    throw InvalidArgument(fmt::format(
        "final time {} is not an integer multiple of the time step {}", final_time,
        time_step));
  }
  return static_cast<std::size_t>(rounded);
}

std::size_t ReferenceConfig::steps() const {
  if (!(diffusion >= 0.0) || !std::isfinite(diffusion)) {
    throw InvalidArgument("diffusion coefficient must be nonnegative and finite");
  }
  return step_count(final_time, time_step);
}

DensityField exact_solution(const InitialCondition& ic, double diffusion,
                            double final_time, const PeriodicGrid& grid) {
  if (!(diffusion >= 0.0) || !(final_time >= 0.0)) {
    throw InvalidArgument("diffusion and time must be nonnegative");
  }
  const double length = grid.length();
  const std::size_t n_cells = grid.cells();
  std::vector<double> values(n_cells);

  if (std::holds_alternative<CosineBump>(ic)) {
    const double k = kTwoPi / length;
    const double decay = std::exp(-diffusion * k * k * final_time);
    for (std::size_t n = 0; n < n_cells; ++n) {
      values[n] = (1.0 + std::cos(k * grid.center(n)) * decay) / length;
    }
    return DensityField(grid, std::move(values));
  }

  const auto& tab = std::get<TabulatedDensity>(ic);
  if (!(tab.density().grid() == grid)) {
    throw UnsupportedInput(
        "exact solution of a tabulated density is only available on its own grid");
  }
  const auto u = tab.density().values();
  const auto nd = static_cast<double>(n_cells);
  // Direct DFT; grids here are small and this runs once per call.
  std::vector<std::complex<double>> coeff(n_cells);
  for (std::size_t m = 0; m < n_cells; ++m) {
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t j = 0; j < n_cells; ++j) {
      acc += u[j] * std::polar(1.0, -kTwoPi * static_cast<double>(m * j % n_cells) / nd);
    }
    const double wavenumber =
        kTwoPi * static_cast<double>(std::min(m, n_cells - m)) / length;
    coeff[m] = acc / nd * std::exp(-diffusion * wavenumber * wavenumber * final_time);
  }
  for (std::size_t j = 0; j < n_cells; ++j) {
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t m = 0; m < n_cells; ++m) {
      acc += coeff[m] * std::polar(1.0, kTwoPi * static_cast<double>(m * j % n_cells) / nd);
    }
    values[j] = acc.real();
  }
  return DensityField(grid, std::move(values));
}

DensityField fd_solve(const InitialCondition& ic, const ReferenceConfig& cfg) {
  const std::size_t steps = cfg.steps();
  const DensityField initial = sample_on_grid(ic, cfg.grid);
  std::vector<double> u(initial.values().begin(), initial.values().end());
  const std::size_t n = u.size();
  if (steps == 0 || n == 1) return initial;

  const double dx = cfg.grid.spacing();
  const double half_r = 0.5 * cfg.diffusion * cfg.time_step / (dx * dx);
  std::vector<double> rhs(n);

  if (n == 2) {
    // Both neighbours coincide: L = [[-2, 2], [2, -2]].
    const double a = 1.0 + 2.0 * half_r;
    const double b = -2.0 * half_r;
    const double det = a * a - b * b;
    for (std::size_t s = 0; s < steps; ++s) {
      const double r0 = u[0] + 2.0 * half_r * (u[1] - u[0]);
      const double r1 = u[1] + 2.0 * half_r * (u[0] - u[1]);
      u[0] = (a * r0 - b * r1) / det;
      u[1] = (a * r1 - b * r0) / det;
    }
    return DensityField(cfg.grid, std::move(u));
  }

  const CyclicTridiagonal system(1.0 + 2.0 * half_r, -half_r, n);
  for (std::size_t s = 0; s < steps; ++s) {
    explicit_half_step(u, half_r, rhs);
    system.solve(rhs);
    u.swap(rhs);
  }
  return DensityField(cfg.grid, std::move(u));
}

Observation synthesize_observation(const DensityField& field,
                                   const CovarianceSpec& noise, std::uint64_t seed) {
  if (noise.dim() != field.size()) {
    throw InvalidArgument("observation noise dimension does not match the field");
  }
  RandomStream rng(seed, 0);
  Eigen::VectorXd z(static_cast<Eigen::Index>(field.size()));
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
  const Eigen::VectorXd eta = noise.correlate(z);
  std::vector<double> values(field.size());
  for (std::size_t n = 0; n < values.size(); ++n) {
    values[n] = field[n] + eta[static_cast<Eigen::Index>(n)];
  }
  return Observation{DensityField(field.grid(), std::move(values)), noise, seed};
}

void write_density_csv(std::ostream& out, const DensityField& field) {
  out << "cell_index,x_center,value\n";
  for (std::size_t n = 0; n < field.size(); ++n) {
    out << n << ',' << csv::format_real(field.grid().center(n)) << ','
        << csv::format_real(field[n]) << '\n';
  }
}

DensityField read_density_csv(std::istream& in, double length) {
  std::string line;
  if (!std::getline(in, line) || line != "cell_index,x_center,value") {
    throw IoError("density CSV must start with header 'cell_index,x_center,value'");
  }
  std::vector<double> centers;
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    const auto fields = csv::split(line);
    if (fields.size() != 3) throw IoError("density CSV row must have 3 fields: " + line);
    if (std::stoull(fields[0]) != values.size()) {
      throw IoError("density CSV cell indices must be consecutive from 0");
    }
    centers.push_back(csv::parse_real(fields[1]));
    values.push_back(csv::parse_real(fields[2]));
  }
  if (values.empty()) throw IoError("density CSV has no rows");
  const PeriodicGrid grid(length, values.size());
  for (std::size_t n = 0; n < centers.size(); ++n) {
    if (std::abs(centers[n] - grid.center(n)) > 1e-9 * length) {
      throw IoError("density CSV cell centers do not match a grid of length " +
                    csv::format_real(length));
    }
  }
  return DensityField(grid, std::move(values));
}

}  // namespace likratio
