#pragma once

#include <cstdint>
#include <span>

#include "likratio/covariance.hpp"
#include "likratio/grid.hpp"
#include "likratio/observation.hpp"

namespace likratio {

/// Natural log of the Gaussian observation density evaluated at a residual.
struct LogLikelihood {
  /// log_normalizer - residual_norm_sq / 2
  double value = 0.0;
  /// |rho - model|^2 in the inverse-noise-covariance norm
  double residual_norm_sq = 0.0;
  /// -(N/2) log(2 pi) - (1/2) log|noise|
  double log_normalizer = 0.0;
  /// Identifies the noise covariance; ratios require matching fingerprints.
  std::uint64_t noise_fingerprint = 0;

  /// True when exp(value) is below the smallest positive normal double,
  /// i.e. a direct evaluation of the density would flush to zero.
  bool underflows() const noexcept;
};

/// log N(observed; model, noise).
LogLikelihood log_likelihood(std::span<const double> observed,
                             std::span<const double> model, const CovarianceSpec& noise);
/// Grids must match; the noise passed here is the one the likelihood is
/// evaluated with (it need not equal obs.noise).
LogLikelihood log_likelihood(const Observation& obs, const DensityField& model,
                             const CovarianceSpec& noise);

struct RatioSample {
  double log_ratio = 0.0;
  LogLikelihood numerator;
  LogLikelihood denominator;
  /// exp(log_ratio); +inf when log_ratio exceeds log(DBL_MAX).
  double ratio = 1.0;
  /// min(ratio, 1)
  double truncated = 1.0;
  /// Both direct densities underflow, so a naive exp(a) / exp(b) would be
  /// 0 / 0. Experiments may omit such samples to mirror that convention.
  bool invalid_in_paper_convention = false;

  bool overflowed() const noexcept;
};

/// Ratio num / den from stored quadratic forms, so normalizers cancel exactly:
/// log_ratio = (den.residual_norm_sq - num.residual_norm_sq) / 2.
/// Throws InvalidArgument when the noise fingerprints differ.
RatioSample log_ratio(const LogLikelihood& num, const LogLikelihood& den);

/// min(exp(log_ratio), 1) without exponentiating a positive argument.
/// +inf maps to 1, -inf to 0; NaN is rejected.
double truncated_ratio(double log_ratio);

}  // namespace likratio
