#pragma once

#include <cstdint>

#include "likratio/covariance.hpp"
#include "likratio/grid.hpp"

namespace likratio {

/// Perturbed data: a solution plus one draw of observation noise.
struct Observation {
  DensityField field;
  CovarianceSpec noise;
  std::uint64_t seed = 0;
};

}  // namespace likratio
