#include "likratio/likelihood.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "likratio/errors.hpp"

namespace likratio {

namespace {

const double kLogSmallestNormal = std::log(std::numeric_limits<double>::min());
const double kLogLargest = std::log(std::numeric_limits<double>::max());

}  // namespace

bool LogLikelihood::underflows() const noexcept { return value < kLogSmallestNormal; }

bool RatioSample::overflowed() const noexcept { return std::isinf(ratio); }

LogLikelihood log_likelihood(std::span<const double> observed,
                             std::span<const double> model, const CovarianceSpec& noise) {
  if (observed.size() != model.size() || observed.size() != noise.dim()) {
    throw InvalidArgument("observation, model and noise dimensions must agree");
  }
  Eigen::VectorXd residual(static_cast<Eigen::Index>(observed.size()));
  for (std::size_t n = 0; n < observed.size(); ++n) {
    residual[static_cast<Eigen::Index>(n)] = observed[n] - model[n];
  }
  LogLikelihood out;
  out.residual_norm_sq = weighted_norm_sq(residual, noise);
  out.log_normalizer = -0.5 * static_cast<double>(observed.size()) *
                           std::log(2.0 * std::numbers::pi) -
                       0.5 * noise.log_det();
  out.value = out.log_normalizer - 0.5 * out.residual_norm_sq;
  out.noise_fingerprint = noise.fingerprint();
  return out;
}

LogLikelihood log_likelihood(const Observation& obs, const DensityField& model,
                             const CovarianceSpec& noise) {
  if (!(obs.field.grid() == model.grid())) {
    throw InvalidArgument("observation and model live on different grids");
  }
  return log_likelihood(obs.field.values(), model.values(), noise);
}

double truncated_ratio(double log_ratio) {
  if (std::isnan(log_ratio)) throw InvalidArgument("log ratio is NaN");
  if (log_ratio >= 0.0) return 1.0;
  return std::exp(log_ratio);
}

RatioSample log_ratio(const LogLikelihood& num, const LogLikelihood& den) {
  if (num.noise_fingerprint != den.noise_fingerprint) {
    throw InvalidArgument("likelihoods were evaluated with different noise models");
  }
  RatioSample out;
  out.numerator = num;
  out.denominator = den;
  out.log_ratio = 0.5 * (den.residual_norm_sq - num.residual_norm_sq);
  out.ratio = out.log_ratio > kLogLargest ? std::numeric_limits<double>::infinity()
                                          : std::exp(out.log_ratio);
  out.truncated = truncated_ratio(out.log_ratio);
  out.invalid_in_paper_convention = num.underflows() && den.underflows();
  return out;
}

}  // namespace likratio
