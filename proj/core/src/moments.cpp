#include "likratio/moments.hpp"

#include <cmath>
#include <limits>
#include <mutex>
#include <ostream>
#include <string>

#include "likratio/csv.hpp"
#include "likratio/errors.hpp"
#include "likratio/random.hpp"

namespace likratio {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

void require_size(const Eigen::VectorXd& v, std::size_t n, const char* what) {
  if (static_cast<std::size_t>(v.size()) != n) {
    throw InvalidArgument(std::string(what) + " has length " + std::to_string(v.size()) +
                          ", expected " + std::to_string(n));
  }
}

void require_dim(const CovarianceSpec& c, std::size_t n, const char* what) {
  if (c.dim() != n) {
    throw InvalidArgument(std::string(what) + " has dimension " + std::to_string(c.dim()) +
                          ", expected " + std::to_string(n));
  }
}

// Builds S from its precision, keeping the storage form of the inputs.
CovarianceSpec combined_from_precision(const Eigen::VectorXd& precision_diag,
                                       bool both_scalar) {
  if (both_scalar) {
    return CovarianceSpec::scalar_identity(static_cast<std::size_t>(precision_diag.size()),
                                           1.0 / precision_diag[0]);
  }
  return CovarianceSpec::diagonal(Eigen::VectorXd(precision_diag.cwiseInverse()));
}

bool both_scalar(const CovarianceSpec& a, const CovarianceSpec& b) {
  return a.kind() == CovarianceSpec::Kind::scalar_identity &&
         b.kind() == CovarianceSpec::Kind::scalar_identity;
}

}  // namespace

void MomentQuery::validate() const {
  if (order == 0) throw InvalidArgument("moment order must be a positive integer");
  const std::size_t n = noise.dim();
  require_size(residual1, n, "residual1");
  require_size(residual2, n, "residual2");
  require_size(solver_mean1, n, "solver_mean1");
  require_size(solver_mean2, n, "solver_mean2");
  require_dim(solver_cov1, n, "solver_cov1");
  require_dim(solver_cov2, n, "solver_cov2");
}

MomentQuery scalar_query(std::size_t dim, unsigned order, double sigma_eta,
                         double sigma_delta1, double sigma_delta2, double residual1,
                         double residual2, double mean1, double mean2) {
  const auto n = static_cast<Eigen::Index>(dim);
  return MomentQuery{
      order,
      Eigen::VectorXd::Constant(n, residual1),
      Eigen::VectorXd::Constant(n, residual2),
      Eigen::VectorXd::Constant(n, mean1),
      Eigen::VectorXd::Constant(n, mean2),
      CovarianceSpec::scalar_identity(dim, sigma_delta1 * sigma_delta1),
      CovarianceSpec::scalar_identity(dim, sigma_delta2 * sigma_delta2),
      CovarianceSpec::scalar_identity(dim, sigma_eta * sigma_eta),
  };
}

LoewnerOrder moment_existence(unsigned order, const CovarianceSpec& noise,
                              const CovarianceSpec& solver_cov2) {
  if (order == 0) throw InvalidArgument("moment order must be a positive integer");
  return compare_loewner(noise.scaled(1.0 / order), solver_cov2);
}

bool moment_exists(unsigned order, const CovarianceSpec& noise,
                   const CovarianceSpec& solver_cov2) {
  return moment_existence(order, noise, solver_cov2) == LoewnerOrder::strict;
}

GaussianFactor factor_one(const Eigen::VectorXd& residual, const Eigen::VectorXd& mean,
                          const CovarianceSpec& cov, const CovarianceSpec& m) {
  const std::size_t n = m.dim();
  require_dim(cov, n, "solver covariance");
  require_size(residual, n, "residual");
  require_size(mean, n, "solver mean");

  if (cov.is_diagonal() && m.is_diagonal()) {
    const Eigen::VectorXd cov_d = cov.diagonal_entries();
    const Eigen::VectorXd m_d = m.diagonal_entries();
    const Eigen::VectorXd precision = m_d.cwiseInverse() + cov_d.cwiseInverse();
    const Eigen::VectorXd rhs =
        residual.cwiseQuotient(m_d) + mean.cwiseQuotient(cov_d);
    Eigen::VectorXd alpha = rhs.cwiseQuotient(precision);
    const double constant =
        0.5 * (-alpha.cwiseAbs2().dot(precision) +
               residual.cwiseAbs2().cwiseQuotient(m_d).sum() +
               mean.cwiseAbs2().cwiseQuotient(cov_d).sum());
    const double log_det_s = -precision.array().log().sum();
    return GaussianFactor{0.5 * (log_det_s - cov.log_det()) - constant,
                          combined_from_precision(precision, both_scalar(cov, m)),
                          std::move(alpha), constant};
  }

  const Eigen::MatrixXd m_inv = m.precision();
  const Eigen::MatrixXd cov_inv = cov.precision();
  const Eigen::MatrixXd precision = m_inv + cov_inv;
  const Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success) {
    throw InvalidArgument("combined precision is not positive definite");
  }
  Eigen::VectorXd alpha = llt.solve(m_inv * residual + cov_inv * mean);
  const double constant = 0.5 * (-alpha.dot(precision * alpha) +
                                 residual.dot(m_inv * residual) + mean.dot(cov_inv * mean));
  const double log_det_s =
      -2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return GaussianFactor{0.5 * (log_det_s - cov.log_det()) - constant,
                        CovarianceSpec::full(llt.solve(Eigen::MatrixXd::Identity(
                            static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)))),
                        std::move(alpha), constant};
}

FactorTwoResult factor_two(const Eigen::VectorXd& residual, const Eigen::VectorXd& mean,
                           const CovarianceSpec& cov, const CovarianceSpec& m) {
  const std::size_t n = m.dim();
  require_dim(cov, n, "solver covariance");
  require_size(residual, n, "residual");
  require_size(mean, n, "solver mean");

  if (cov.is_diagonal() && m.is_diagonal()) {
    const Eigen::VectorXd cov_d = cov.diagonal_entries();
    const Eigen::VectorXd m_d = m.diagonal_entries();
    const Eigen::VectorXd cov_inv = cov_d.cwiseInverse();
    const Eigen::VectorXd pseudo = cov_inv - m_d.cwiseInverse();
    const double margin = kLoewnerMargin * cov_inv.sum();
    if (!(pseudo.minCoeff() > margin)) return Divergent{};
    const Eigen::VectorXd gamma =
        mean.cwiseQuotient(cov_d) - residual.cwiseQuotient(m_d);
    Eigen::VectorXd alpha = gamma.cwiseQuotient(pseudo);
    const double constant =
        0.5 * (-alpha.cwiseAbs2().dot(pseudo) +
               mean.cwiseAbs2().cwiseQuotient(cov_d).sum() -
               residual.cwiseAbs2().cwiseQuotient(m_d).sum());
    const double log_det_s = -pseudo.array().log().sum();
    return GaussianFactor{0.5 * (log_det_s - cov.log_det()) - constant,
                          combined_from_precision(pseudo, both_scalar(cov, m)),
                          std::move(alpha), constant};
  }

  const Eigen::MatrixXd m_inv = m.precision();
  const Eigen::MatrixXd cov_inv = cov.precision();
  const Eigen::MatrixXd pseudo = cov_inv - m_inv;
  // Strict positive definiteness of S^+ by attempted factorization. A
  // kernel or a negative direction both make the integrand grow without
  // bound.
  const Eigen::LLT<Eigen::MatrixXd> llt(pseudo);
  const double margin = kLoewnerMargin * cov_inv.trace();
  if (llt.info() != Eigen::Success) return Divergent{};
  const Eigen::VectorXd diag = llt.matrixLLT().diagonal();
  if (!((diag.array() * diag.array()).minCoeff() > margin)) return Divergent{};

  const Eigen::VectorXd gamma = cov_inv * mean - m_inv * residual;
  Eigen::VectorXd alpha = llt.solve(gamma);
  const double constant = 0.5 * (-alpha.dot(pseudo * alpha) + mean.dot(cov_inv * mean) -
                                 residual.dot(m_inv * residual));
  const double log_det_s = -2.0 * diag.array().log().sum();
  const auto dim = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd s = llt.solve(Eigen::MatrixXd::Identity(dim, dim));
  return GaussianFactor{0.5 * (log_det_s - cov.log_det()) - constant,
                        CovarianceSpec::full(0.5 * (s + s.transpose())), std::move(alpha),
                        constant};
}

MomentResult ratio_moment(const MomentQuery& query) {
  query.validate();
  const CovarianceSpec m = query.scaled_noise();
  const LoewnerOrder order = compare_loewner(m, query.solver_cov2);
  MomentResult out{
      .exists = false,
      .boundary = order == LoewnerOrder::boundary,
      .log_moment = kNaN,
      .factor1 = factor_one(query.residual1, query.solver_mean1, query.solver_cov1, m),
      .factor2 = std::nullopt,
  };
  if (order != LoewnerOrder::strict) return out;

  auto second = factor_two(query.residual2, query.solver_mean2, query.solver_cov2, m);
  if (std::holds_alternative<Divergent>(second)) {
    // Certified by the covariance comparison but not by the precision
    // difference: too close to call.
    out.boundary = true;
    return out;
  }
  out.exists = true;
  out.factor2 = std::get<GaussianFactor>(std::move(second));
  out.log_moment = out.factor1.log_value + out.factor2->log_value;
  return out;
}

namespace {

struct RunningStats {
  std::size_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;
  bool overflow = false;

  void push(double x) {
    if (!std::isfinite(x)) {
      overflow = true;
      return;
    }
    ++count;
    const double delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (x - mean);
  }

  // Chan et al. pairwise merge.
  void merge(const RunningStats& other) {
    overflow = overflow || other.overflow;
    if (other.count == 0) return;
    if (count == 0) {
      const bool o = overflow;
      *this = other;
      overflow = o;
      return;
    }
    const double total = static_cast<double>(count + other.count);
    const double delta = other.mean - mean;
    mean += delta * static_cast<double>(other.count) / total;
    m2 += other.m2 + delta * delta * static_cast<double>(count) *
                         static_cast<double>(other.count) / total;
    count += other.count;
  }
};

}  // namespace

MomentEstimate empirical_ratio_moment(const MomentQuery& query, std::size_t samples,
                                      std::uint64_t seed, const Execution& exec) {
  query.validate();
  if (samples == 0) throw InvalidArgument("sample count must be positive");
  if (exec.chunk_size == 0) throw InvalidArgument("chunk size must be positive");
  const std::size_t chunks = (samples + exec.chunk_size - 1) / exec.chunk_size;
  const auto n = static_cast<Eigen::Index>(query.dim());
  const double p = static_cast<double>(query.order);
  std::vector<RunningStats> partial(chunks);

  parallel_for(chunks, exec.threads, [&](std::size_t c) {
    RandomStream rng(seed, c);
    const std::size_t begin = c * exec.chunk_size;
    const std::size_t end = std::min(samples, begin + exec.chunk_size);
    Eigen::VectorXd z1(n), z2(n);
    RunningStats stats;
    for (std::size_t i = begin; i < end; ++i) {
      for (Eigen::Index k = 0; k < n; ++k) z1[k] = rng.normal();
      for (Eigen::Index k = 0; k < n; ++k) z2[k] = rng.normal();
      const Eigen::VectorXd delta1 = query.solver_mean1 + query.solver_cov1.correlate(z1);
      const Eigen::VectorXd delta2 = query.solver_mean2 + query.solver_cov2.correlate(z2);
      const double log_ratio =
          0.5 * (weighted_norm_sq(Eigen::VectorXd(query.residual2 - delta2), query.noise) -
                 weighted_norm_sq(Eigen::VectorXd(query.residual1 - delta1), query.noise));
      stats.push(std::exp(p * log_ratio));
    }
    partial[c] = stats;
  });

  RunningStats total;
  for (const auto& s : partial) total.merge(s);
  if (total.overflow) return MomentEstimate{kInf, kInf, samples};
  const double variance =
      total.count > 1 ? total.m2 / static_cast<double>(total.count - 1) : 0.0;
  return MomentEstimate{total.mean,
                        std::sqrt(variance / static_cast<double>(total.count)), samples};
}

std::vector<double> empirical_batch_means(const MomentQuery& query, std::size_t batches,
                                          std::size_t batch_size, std::uint64_t seed,
                                          const Execution& exec) {
  std::vector<double> out(batches);
  for (std::size_t b = 0; b < batches; ++b) {
    out[b] = empirical_ratio_moment(query, batch_size, derive_seed(seed, {b}), exec)
                 .estimate;
  }
  return out;
}

void write_moment_csv_header(std::ostream& out) {
  out << "p,exists,boundary,log_moment,log_factor1,log_factor2\n";
}

void write_moment_csv_row(std::ostream& out, unsigned order, const MomentResult& result) {
  out << order << ',' << (result.exists ? "true" : "false") << ','
      << (result.boundary ? "true" : "false") << ','
      << (result.exists ? csv::format_real(result.log_moment) : std::string{}) << ','
      << csv::format_real(result.factor1.log_value) << ','
      << (result.factor2 ? csv::format_real(result.factor2->log_value) : std::string{})
      << '\n';
}

}  // namespace likratio
