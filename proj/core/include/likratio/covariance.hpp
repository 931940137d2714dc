#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace likratio {

/// Symmetric positive definite covariance in one of three storage forms.
///
/// Every operation that needs Q^{-1} goes through a factorization; a Full
/// covariance is never inverted explicitly except by precision(), which
/// exists for the moment formulas that are phrased in precision form.
class CovarianceSpec {
 public:
  enum class Kind { scalar_identity, diagonal, full };

  /// variance * I of the given dimension.
  static CovarianceSpec scalar_identity(std::size_t dim, double variance);
  static CovarianceSpec diagonal(std::vector<double> entries);
  static CovarianceSpec diagonal(const Eigen::VectorXd& entries);
  /// Accepts Q if |Q - Q^T|_F <= 1e-12 |Q|_F, stores (Q + Q^T)/2, and
  /// requires the Cholesky factorization to succeed.
  static CovarianceSpec full(const Eigen::MatrixXd& q);

  Kind kind() const noexcept { return kind_; }
  std::size_t dim() const noexcept { return dim_; }
  bool is_diagonal() const noexcept { return kind_ != Kind::full; }

  /// Only valid for scalar_identity.
  double scalar_variance() const;
  /// Diagonal of Q, for every kind.
  Eigen::VectorXd diagonal_entries() const;
  Eigen::MatrixXd dense() const;
  double trace() const;
  double log_det() const;

  /// Q^{-1} v
  Eigen::VectorXd solve(const Eigen::VectorXd& v) const;
  /// Q v
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
  /// L^{-1} v with Q = L L^T, so |whiten(v)|^2 = v^T Q^{-1} v.
  Eigen::VectorXd whiten(const Eigen::VectorXd& v) const;
  /// L z with Q = L L^T; maps standard normals to N(0, Q) draws.
  Eigen::VectorXd correlate(const Eigen::VectorXd& z) const;
  /// Dense Q^{-1}.
  Eigen::MatrixXd precision() const;

  CovarianceSpec scaled(double factor) const;
  /// scalar -> diagonal; diagonal stays; full throws.
  CovarianceSpec as_diagonal() const;
  CovarianceSpec as_full() const;

  /// Hash of (kind, dimension, stored entries). Equal specs hash equally.
  std::uint64_t fingerprint() const noexcept { return fingerprint_; }

 private:
  struct FullData;

  CovarianceSpec(Kind kind, std::size_t dim) : kind_(kind), dim_(dim) {}
  void compute_fingerprint();

  Kind kind_;
  std::size_t dim_;
  double scalar_ = 0.0;
  Eigen::VectorXd diag_;
  std::shared_ptr<const FullData> full_;
  std::uint64_t fingerprint_ = 0;
};

/// v^T Q^{-1} v, via a triangular solve for Full Q.
double weighted_norm_sq(std::span<const double> v, const CovarianceSpec& q);
double weighted_norm_sq(const Eigen::VectorXd& v, const CovarianceSpec& q);

enum class LoewnerOrder {
  strict,         ///< A - B is strictly positive definite
  boundary,       ///< A - B is within the strictness margin of singular
  not_dominated,  ///< A - B has a clearly negative direction
};

/// Classifies A - B by attempted Cholesky factorization. Pivots must exceed
/// 1e-14 * trace(A) for strict dominance; when they do not, the pair is a
/// boundary case if A - B + 2 * margin * I still factors.
LoewnerOrder compare_loewner(const CovarianceSpec& a, const CovarianceSpec& b);

/// A - B strictly positive definite (A strictly above B in the Loewner order).
bool loewner_strictly_dominates(const CovarianceSpec& a, const CovarianceSpec& b);

/// Relative pivot threshold used by compare_loewner.
inline constexpr double kLoewnerMargin = 1e-14;

}  // namespace likratio
