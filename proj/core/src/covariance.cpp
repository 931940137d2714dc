#include "likratio/covariance.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "likratio/errors.hpp"

namespace likratio {

struct CovarianceSpec::FullData {
  Eigen::MatrixXd matrix;
  Eigen::LLT<Eigen::MatrixXd> llt;
  double log_det = 0.0;
};

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw InvalidArgument(std::string(what) + " must be positive and finite");
  }
}

void require_dim(const CovarianceSpec& q, std::size_t n) {
  if (q.dim() != n) {
    throw InvalidArgument("covariance of dimension " + std::to_string(q.dim()) +
                          " applied to vector of length " + std::to_string(n));
  }
}

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

void fnv_mix(std::uint64_t& h, const void* data, std::size_t bytes) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= kFnvPrime;
  }
}

// Unpivoted Cholesky; false as soon as a pivot is <= threshold.
bool factors_above(const Eigen::MatrixXd& m, double threshold) {
  const Eigen::Index n = m.rows();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double pivot = m(j, j);
    for (Eigen::Index k = 0; k < j; ++k) pivot -= l(j, k) * l(j, k);
    if (!(pivot > threshold)) return false;
    const double ljj = std::sqrt(pivot);
    l(j, j) = ljj;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return true;
}

}  // namespace

CovarianceSpec CovarianceSpec::scalar_identity(std::size_t dim, double variance) {
  if (dim == 0) throw InvalidArgument("covariance dimension must be >= 1");
  require_positive(variance, "scalar variance");
  CovarianceSpec out(Kind::scalar_identity, dim);
  out.scalar_ = variance;
  out.compute_fingerprint();
  return out;
}

CovarianceSpec CovarianceSpec::diagonal(std::vector<double> entries) {
  return diagonal(Eigen::Map<const Eigen::VectorXd>(
      entries.data(), static_cast<Eigen::Index>(entries.size())));
}

CovarianceSpec CovarianceSpec::diagonal(const Eigen::VectorXd& entries) {
  if (entries.size() == 0) throw InvalidArgument("covariance dimension must be >= 1");
  for (double d : entries) require_positive(d, "diagonal covariance entry");
  CovarianceSpec out(Kind::diagonal, static_cast<std::size_t>(entries.size()));
  out.diag_ = entries;
  out.compute_fingerprint();
  return out;
}

CovarianceSpec CovarianceSpec::full(const Eigen::MatrixXd& q) {
  if (q.rows() == 0 || q.rows() != q.cols()) {
    throw InvalidArgument("full covariance must be a non-empty square matrix");
  }
  if (!q.allFinite()) throw InvalidArgument("full covariance has non-finite entries");
  const double norm = q.norm();
  if ((q - q.transpose()).norm() > 1e-12 * norm) {
    throw InvalidArgument("full covariance is not symmetric");
  }
  auto data = std::make_shared<FullData>();
  data->matrix = 0.5 * (q + q.transpose());
  data->llt.compute(data->matrix);
  if (data->llt.info() != Eigen::Success) {
    throw InvalidArgument("full covariance is not positive definite");
  }
  const auto& lower = data->llt.matrixLLT();
  for (Eigen::Index i = 0; i < lower.rows(); ++i) {
    if (!(lower(i, i) > 0.0)) {
      throw InvalidArgument("full covariance is not positive definite");
    }
    data->log_det += 2.0 * std::log(lower(i, i));
  }
  CovarianceSpec out(Kind::full, static_cast<std::size_t>(q.rows()));
  out.full_ = std::move(data);
  out.compute_fingerprint();
  return out;
}

void CovarianceSpec::compute_fingerprint() {
  std::uint64_t h = kFnvOffset;
  const auto kind = static_cast<int>(kind_);
  fnv_mix(h, &kind, sizeof kind);
  fnv_mix(h, &dim_, sizeof dim_);
  switch (kind_) {
    case Kind::scalar_identity:
      fnv_mix(h, &scalar_, sizeof scalar_);
      break;
    case Kind::diagonal:
      fnv_mix(h, diag_.data(), sizeof(double) * static_cast<std::size_t>(diag_.size()));
      break;
    case Kind::full:
      fnv_mix(h, full_->matrix.data(),
              sizeof(double) * static_cast<std::size_t>(full_->matrix.size()));
      break;
  }
  fingerprint_ = h;
}

double CovarianceSpec::scalar_variance() const {
  if (kind_ != Kind::scalar_identity) {
    throw InvalidArgument("covariance is not a scalar multiple of the identity");
  }
  return scalar_;
}

Eigen::VectorXd CovarianceSpec::diagonal_entries() const {
  const auto n = static_cast<Eigen::Index>(dim_);
  switch (kind_) {
    case Kind::scalar_identity:
      return Eigen::VectorXd::Constant(n, scalar_);
    case Kind::diagonal:
      return diag_;
    case Kind::full:
      break;
  }
  return full_->matrix.diagonal();
}

Eigen::MatrixXd CovarianceSpec::dense() const {
  if (kind_ == Kind::full) return full_->matrix;
  return diagonal_entries().asDiagonal();
}

double CovarianceSpec::trace() const { return diagonal_entries().sum(); }

double CovarianceSpec::log_det() const {
  switch (kind_) {
    case Kind::scalar_identity:
      return static_cast<double>(dim_) * std::log(scalar_);
    case Kind::diagonal:
      return diag_.array().log().sum();
    case Kind::full:
      break;
  }
  return full_->log_det;
}

Eigen::VectorXd CovarianceSpec::solve(const Eigen::VectorXd& v) const {
  require_dim(*this, static_cast<std::size_t>(v.size()));
  switch (kind_) {
    case Kind::scalar_identity:
      return v / scalar_;
    case Kind::diagonal:
      return v.cwiseQuotient(diag_);
    case Kind::full:
      break;
  }
  return full_->llt.solve(v);
}

Eigen::VectorXd CovarianceSpec::apply(const Eigen::VectorXd& v) const {
  require_dim(*this, static_cast<std::size_t>(v.size()));
  switch (kind_) {
    case Kind::scalar_identity:
      return v * scalar_;
    case Kind::diagonal:
      return v.cwiseProduct(diag_);
    case Kind::full:
      break;
  }
  return full_->matrix * v;
}

Eigen::VectorXd CovarianceSpec::whiten(const Eigen::VectorXd& v) const {
  require_dim(*this, static_cast<std::size_t>(v.size()));
  switch (kind_) {
    case Kind::scalar_identity:
      return v / std::sqrt(scalar_);
    case Kind::diagonal:
      return v.cwiseQuotient(diag_.cwiseSqrt());
    case Kind::full:
      break;
  }
  return full_->llt.matrixL().solve(v);
}

Eigen::VectorXd CovarianceSpec::correlate(const Eigen::VectorXd& z) const {
  require_dim(*this, static_cast<std::size_t>(z.size()));
  switch (kind_) {
    case Kind::scalar_identity:
      return z * std::sqrt(scalar_);
    case Kind::diagonal:
      return z.cwiseProduct(diag_.cwiseSqrt());
    case Kind::full:
      break;
  }
  return full_->llt.matrixL() * z;
}

Eigen::MatrixXd CovarianceSpec::precision() const {
  const auto n = static_cast<Eigen::Index>(dim_);
  if (kind_ != Kind::full) {
    return diagonal_entries().cwiseInverse().asDiagonal();
  }
  return full_->llt.solve(Eigen::MatrixXd::Identity(n, n));
}

CovarianceSpec CovarianceSpec::scaled(double factor) const {
  require_positive(factor, "covariance scale factor");
  switch (kind_) {
    case Kind::scalar_identity:
      return scalar_identity(dim_, scalar_ * factor);
    case Kind::diagonal:
      return diagonal(Eigen::VectorXd(diag_ * factor));
    case Kind::full:
      break;
  }
  return full(full_->matrix * factor);
}

CovarianceSpec CovarianceSpec::as_diagonal() const {
  if (kind_ == Kind::full) {
    throw InvalidArgument("a full covariance cannot be narrowed to diagonal form");
  }
  return diagonal(diagonal_entries());
}

CovarianceSpec CovarianceSpec::as_full() const { return full(dense()); }

double weighted_norm_sq(const Eigen::VectorXd& v, const CovarianceSpec& q) {
  require_dim(q, static_cast<std::size_t>(v.size()));
  switch (q.kind()) {
    case CovarianceSpec::Kind::scalar_identity:
      return v.squaredNorm() / q.scalar_variance();
    case CovarianceSpec::Kind::diagonal:
      return v.cwiseAbs2().cwiseQuotient(q.diagonal_entries()).sum();
    case CovarianceSpec::Kind::full:
      break;
  }
  // |L^{-1} v|^2 keeps the result nonnegative by construction.
  return q.whiten(v).squaredNorm();
}

double weighted_norm_sq(std::span<const double> v, const CovarianceSpec& q) {
  return weighted_norm_sq(
      Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(
          v.data(), static_cast<Eigen::Index>(v.size()))),
      q);
}

LoewnerOrder compare_loewner(const CovarianceSpec& a, const CovarianceSpec& b) {
  if (a.dim() != b.dim()) {
    throw InvalidArgument("Loewner comparison of covariances with dimensions " +
                          std::to_string(a.dim()) + " and " + std::to_string(b.dim()));
  }
  const double margin = kLoewnerMargin * a.trace();
  if (a.is_diagonal() && b.is_diagonal()) {
    const Eigen::VectorXd diff = a.diagonal_entries() - b.diagonal_entries();
    const double lowest = diff.minCoeff();
    if (lowest > margin) return LoewnerOrder::strict;
    return lowest > -margin ? LoewnerOrder::boundary : LoewnerOrder::not_dominated;
  }
  Eigen::MatrixXd diff = a.dense() - b.dense();
  if (factors_above(diff, margin)) return LoewnerOrder::strict;
  diff.diagonal().array() += 2.0 * margin;
  return factors_above(diff, margin) ? LoewnerOrder::boundary
                                     : LoewnerOrder::not_dominated;
}

bool loewner_strictly_dominates(const CovarianceSpec& a, const CovarianceSpec& b) {
  return compare_loewner(a, b) == LoewnerOrder::strict;
}

}  // namespace likratio
