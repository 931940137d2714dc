#include "likratio/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "likratio/errors.hpp"

namespace likratio {

PeriodicGrid::PeriodicGrid(double length, std::size_t cells)
    : length_(length), cells_(cells), spacing_(0.0) {
  if (!(length > 0.0) || !std::isfinite(length)) {
    throw InvalidArgument("grid length must be positive and finite, got " +
                          std::to_string(length));
  }
  if (cells == 0) {
    throw InvalidArgument("grid must have at least one cell");
  }
  spacing_ = length / static_cast<double>(cells);
}

std::vector<double> PeriodicGrid::centers() const {
  std::vector<double> out(cells_);
  for (std::size_t n = 0; n < cells_; ++n) out[n] = center(n);
  return out;
}

std::size_t PeriodicGrid::cell_of(double x) const noexcept {
  const auto idx = static_cast<std::size_t>(std::floor(x / spacing_));
  return std::min(idx, cells_ - 1);
}

PeriodicGrid make_grid(double length, std::size_t cells) {
  return PeriodicGrid(length, cells);
}

double wrap(double x, const PeriodicGrid& grid) {
  if (!std::isfinite(x)) {
    throw InvalidArgument("cannot wrap a non-finite position");
  }
  const double length = grid.length();
  double r = std::fmod(x, length);
  if (r < 0.0) r += length;
  // r + L can round up to L for tiny negative r
  if (r >= length) r = 0.0;
  return r;
}

DensityField::DensityField(PeriodicGrid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.cells()) {
    throw InvalidArgument("density field has " + std::to_string(values_.size()) +
                          " values for a grid of " +
                          std::to_string(grid_.cells()) + " cells");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw InvalidArgument("density values must be finite");
  }
}

double DensityField::mass() const noexcept {
  double sum = 0.0;
  for (double v : values_) sum += v;
  return sum * grid_.spacing();
}

}  // namespace likratio
