#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace likratio {

/// Cell-centered uniform grid on the periodic interval [0, L).
class PeriodicGrid {
 public:
  /// Throws InvalidArgument unless length > 0 (finite) and cells >= 1.
  PeriodicGrid(double length, std::size_t cells);

  double length() const noexcept { return length_; }
  std::size_t cells() const noexcept { return cells_; }
  double spacing() const noexcept { return spacing_; }

  /// x_n = (n + 1/2) dx.
  double center(std::size_t n) const noexcept {
    return (static_cast<double>(n) + 0.5) * spacing_;
  }
  std::vector<double> centers() const;

  /// Index of the cell containing x, for x already wrapped into [0, L).
  std::size_t cell_of(double x) const noexcept;

  friend bool operator==(const PeriodicGrid&, const PeriodicGrid&) = default;

 private:
  double length_;
  std::size_t cells_;
  double spacing_;
};

PeriodicGrid make_grid(double length, std::size_t cells);

/// Maps a finite x onto [0, L). Throws InvalidArgument for non-finite x.
double wrap(double x, const PeriodicGrid& grid);

/// Density samples (units 1/length) attached to a grid.
class DensityField {
 public:
  DensityField(PeriodicGrid grid, std::vector<double> values);

  const PeriodicGrid& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t n) const noexcept { return values_[n]; }

  /// sum_n values_n * dx
  double mass() const noexcept;

  friend bool operator==(const DensityField&, const DensityField&) = default;

 private:
  PeriodicGrid grid_;
  std::vector<double> values_;
};

}  // namespace likratio
