#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "likratio/covariance.hpp"
#include "likratio/parallel.hpp"

namespace likratio {

/// Raw moment E[(l(D1) / l(D2))^p] of the approximate likelihood ratio when
/// the solver errors are independent, delta_i ~ N(mean_i, cov_i), and the
/// observation noise is Gaussian with covariance `noise`.
///
/// residual_i is rho - G[D_i], the misfit of the exact forward map.
/// Correlated solver errors (e.g. common random numbers between the two
/// evaluations) are outside this model.
struct MomentQuery {
  unsigned order = 1;
  Eigen::VectorXd residual1;
  Eigen::VectorXd residual2;
  Eigen::VectorXd solver_mean1;
  Eigen::VectorXd solver_mean2;
  CovarianceSpec solver_cov1;
  CovarianceSpec solver_cov2;
  CovarianceSpec noise;

  /// Throws InvalidArgument on zero order or mismatched dimensions.
  void validate() const;
  std::size_t dim() const noexcept { return noise.dim(); }
  /// M = noise / p, so that M^{-1} = p * noise^{-1}.
  CovarianceSpec scaled_noise() const { return noise.scaled(1.0 / order); }
};

/// Every covariance a multiple of the identity and every vector constant.
MomentQuery scalar_query(std::size_t dim, unsigned order, double sigma_eta,
                         double sigma_delta1, double sigma_delta2, double residual1,
                         double residual2, double mean1 = 0.0, double mean2 = 0.0);

/// One of the two Gaussian integrals the moment factors into:
/// log_value = (log|S| - log|cov|) / 2 - constant.
struct GaussianFactor {
  double log_value = 0.0;
  /// S, the inverse of the combined precision.
  CovarianceSpec combined;
  /// Mean of the Gaussian the integrand is proportional to.
  Eigen::VectorXd alpha;
  double constant = 0.0;
};

/// The second integral does not exist.
struct Divergent {};

using FactorTwoResult = std::variant<GaussianFactor, Divergent>;

struct MomentResult {
  bool exists = false;
  /// Existence could not be certified in floating point: M - cov2 is within
  /// the strictness margin of singular. Reported with exists = false.
  bool boundary = false;
  /// log E[ratio^p]; NaN when !exists.
  double log_moment = 0.0;
  GaussianFactor factor1;
  std::optional<GaussianFactor> factor2;
};

/// Classification of noise / p against cov2 in the Loewner order. The p-th
/// moment exists iff the result is strict.
LoewnerOrder moment_existence(unsigned order, const CovarianceSpec& noise,
                              const CovarianceSpec& solver_cov2);

/// noise / p strictly above solver_cov2, equivalently noise > p * cov2.
/// For p = 1 this is noise > cov2.
bool moment_exists(unsigned order, const CovarianceSpec& noise,
                   const CovarianceSpec& solver_cov2);

/// E over delta1 of exp(-|delta1 - residual1|^2_{M^{-1}} / 2). With
/// S^{-1} = M^{-1} + cov^{-1}, alpha = S (M^{-1} residual + cov^{-1} mean),
/// C = (-|alpha|^2_{S^{-1}} + |residual|^2_{M^{-1}} + |mean|^2_{cov^{-1}}) / 2.
/// Always finite.
GaussianFactor factor_one(const Eigen::VectorXd& residual, const Eigen::VectorXd& mean,
                          const CovarianceSpec& cov, const CovarianceSpec& m);

/// E over delta2 of exp(+|delta2 - residual2|^2_{M^{-1}} / 2). With
/// S^+ = cov^{-1} - M^{-1} and gamma = cov^{-1} mean - M^{-1} residual the
/// integral is finite only if S^+ is strictly positive definite; then
/// S = (S^+)^{-1}, alpha = S gamma and
/// C = (-|alpha|^2_{S^+} + |mean|^2_{cov^{-1}} - |residual|^2_{M^{-1}}) / 2.
/// A singular or indefinite S^+ yields Divergent.
FactorTwoResult factor_two(const Eigen::VectorXd& residual, const Eigen::VectorXd& mean,
                           const CovarianceSpec& cov, const CovarianceSpec& m);

/// Closed-form p-th raw moment as the product of the two factors.
MomentResult ratio_moment(const MomentQuery& query);

struct MomentEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
  std::size_t samples = 0;
};

/// Brute-force estimate: draws delta1, delta2 independently and averages
/// exp(p * log_ratio). When the moment does not exist the estimate is
/// legitimately unstable. Substream per chunk of exec.chunk_size samples.
MomentEstimate empirical_ratio_moment(const MomentQuery& query, std::size_t samples,
                                      std::uint64_t seed, const Execution& exec = {});

/// Means of `batches` independent batches of `batch_size` samples each; a
/// diagnostic for heavy tails (non-existent moments never settle).
std::vector<double> empirical_batch_means(const MomentQuery& query, std::size_t batches,
                                          std::size_t batch_size, std::uint64_t seed,
                                          const Execution& exec = {});

/// `p,exists,boundary,log_moment,log_factor1,log_factor2`
void write_moment_csv_header(std::ostream& out);
void write_moment_csv_row(std::ostream& out, unsigned order, const MomentResult& result);

}  // namespace likratio
