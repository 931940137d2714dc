#include <cfloat>
#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "likratio/errors.hpp"
#include "likratio/likelihood.hpp"
#include "oracles.hpp"

using namespace likratio;

namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

LogLikelihood lik_with_norm(double norm_sq, const CovarianceSpec& q) {
  // residual whose weighted norm is exactly norm_sq under q = I.
  std::vector<double> obs(q.dim(), 0.0), model(q.dim(), 0.0);
  model[0] = std::sqrt(norm_sq * q.scalar_variance());
  return log_likelihood(obs, model, q);
}

}  // namespace

TEST(LogLikelihood, ZeroResidualUnitVariance) {
  const std::vector<double> x{0.7};
  const auto l = log_likelihood(x, x, CovarianceSpec::scalar_identity(1, 1.0));
  EXPECT_NEAR(l.value, -0.5 * kLog2Pi, 1e-15);
  EXPECT_NEAR(l.value, -0.918939, 1e-6);
  EXPECT_EQ(l.residual_norm_sq, 0.0);
}

TEST(LogLikelihood, TwoDimensionalHandValue) {
  const std::vector<double> obs{0.5, -1.0}, model{0.0, 0.0};
  const auto l =
      log_likelihood(obs, model, CovarianceSpec::diagonal(std::vector<double>{0.25, 1.0}));
  // -log(2 pi) - (1/2) log(0.25) - 2/2
  const double exact = -kLog2Pi + std::log(2.0) - 1.0;
  EXPECT_NEAR(l.value, exact, 1e-12);
  EXPECT_NEAR(l.value, -2.1447298858494, 1e-9);
  EXPECT_NEAR(l.residual_norm_sq, 2.0, 1e-15);
}

TEST(LogLikelihood, ScalarNoiseHomogeneity) {
  const std::vector<double> obs{0.1, 0.2, -0.3}, model{0.0, 0.5, 0.1};
  const double base = log_likelihood(obs, model, CovarianceSpec::scalar_identity(3, 1.0))
                          .residual_norm_sq;
  for (double s2 : {1e-4, 0.01, 3.0}) {
    const auto l = log_likelihood(obs, model, CovarianceSpec::scalar_identity(3, s2));
    EXPECT_NEAR(l.residual_norm_sq, base / s2, 1e-12 * base / s2);
  }
}

TEST(LogLikelihood, DimensionMismatch) {
  const std::vector<double> a{1.0, 2.0}, b{1.0};
  EXPECT_THROW(log_likelihood(a, b, CovarianceSpec::scalar_identity(2, 1.0)), InvalidArgument);
  EXPECT_THROW(log_likelihood(a, a, CovarianceSpec::scalar_identity(3, 1.0)), InvalidArgument);
}

TEST(LogLikelihood, MatchesNaiveDensity) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z;
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 1 + trial % 5;
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < a.size(); ++i) a.data()[i] = z(rng);
    const Eigen::MatrixXd q = a * a.transpose() + 0.5 * Eigen::MatrixXd::Identity(n, n);
    std::vector<double> obs(n), model(n);
    Eigen::VectorXd r(n);
    for (int i = 0; i < n; ++i) {
      obs[i] = z(rng);
      model[i] = z(rng);
      r[i] = obs[i] - model[i];
    }
    const auto l = log_likelihood(obs, model, CovarianceSpec::full(q));
    const double naive = oracle::gaussian_density(r, q);
    EXPECT_NEAR(std::exp(l.value), naive, 1e-12 * naive);
    EXPECT_NEAR(l.value, l.log_normalizer - l.residual_norm_sq / 2, 1e-13 * std::abs(l.value));
  }
}

TEST(LogLikelihood, UnderflowFlag) {
  const auto q = CovarianceSpec::scalar_identity(1, 1.0);
  EXPECT_FALSE(lik_with_norm(10.0, q).underflows());
  EXPECT_TRUE(lik_with_norm(2000.0, q).underflows());
  const double edge = 2.0 * (-0.5 * kLog2Pi - std::log(DBL_MIN));
  EXPECT_FALSE(lik_with_norm(edge * (1 - 1e-9), q).underflows());
  EXPECT_TRUE(lik_with_norm(edge * (1 + 1e-9), q).underflows());
}

TEST(LogRatio, IdenticalStates) {
  const auto q = CovarianceSpec::scalar_identity(1, 1.0);
  const auto l = lik_with_norm(3.0, q);
  const auto r = log_ratio(l, l);
  EXPECT_EQ(r.log_ratio, 0.0);
  EXPECT_EQ(r.ratio, 1.0);
  EXPECT_EQ(r.truncated, 1.0);
}

TEST(LogRatio, TwoAndUnderflow) {
  const auto q = CovarianceSpec::scalar_identity(1, 1.0);
  const auto two = log_ratio(lik_with_norm(1.0, q), lik_with_norm(1.0 + 2 * std::log(2.0), q));
  EXPECT_NEAR(two.ratio, 2.0, 1e-14);
  EXPECT_EQ(two.truncated, 1.0);
  const auto tiny = log_ratio(lik_with_norm(2000.0, q), lik_with_norm(0.0, q));
  EXPECT_EQ(tiny.ratio, 0.0);
  EXPECT_EQ(tiny.truncated, 0.0);
  EXPECT_FALSE(std::isnan(tiny.log_ratio));
  EXPECT_FALSE(tiny.invalid_in_paper_convention);
}

TEST(LogRatio, OverflowAndDoubleUnderflowFlag) {
  const auto q = CovarianceSpec::scalar_identity(1, 1.0);
  const auto big = log_ratio(lik_with_norm(1600.0, q), lik_with_norm(3200.0, q));
  EXPECT_TRUE(big.overflowed());
  EXPECT_TRUE(std::isinf(big.ratio));
  EXPECT_EQ(big.truncated, 1.0);
  EXPECT_TRUE(big.invalid_in_paper_convention);
  EXPECT_NEAR(big.log_ratio, 800.0, 1e-12);
  const auto mixed = log_ratio(lik_with_norm(1.0, q), lik_with_norm(3200.0, q));
  EXPECT_FALSE(mixed.invalid_in_paper_convention);
}

TEST(LogRatio, FingerprintMismatch) {
  const auto a = lik_with_norm(1.0, CovarianceSpec::scalar_identity(1, 1.0));
  const auto b = lik_with_norm(1.0, CovarianceSpec::scalar_identity(1, 2.0));
  EXPECT_THROW(log_ratio(a, b), InvalidArgument);
}

TEST(LogRatio, AntisymmetryAndNormalizerCancellation) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> z;
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 1 + trial % 6;
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < a.size(); ++i) a.data()[i] = z(rng);
    const auto q = CovarianceSpec::full(a * a.transpose() + Eigen::MatrixXd::Identity(n, n));
    std::vector<double> obs(n), m1(n), m2(n);
    for (int i = 0; i < n; ++i) {
      obs[i] = z(rng);
      m1[i] = z(rng);
      m2[i] = z(rng);
    }
    const auto l1 = log_likelihood(obs, m1, q), l2 = log_likelihood(obs, m2, q);
    const auto ab = log_ratio(l1, l2), ba = log_ratio(l2, l1);
    EXPECT_EQ(ab.log_ratio, -ba.log_ratio);
    const double via_values = l1.value - l2.value;
    EXPECT_NEAR(ab.log_ratio, via_values,
                1e-10 * std::max({1.0, std::abs(l1.value), std::abs(l2.value)}));
  }
}

TEST(TruncatedRatio, Examples) {
  EXPECT_EQ(truncated_ratio(0.0), 1.0);
  EXPECT_NEAR(truncated_ratio(std::log(0.5)), 0.5, 1e-16);
  EXPECT_EQ(truncated_ratio(INFINITY), 1.0);
  EXPECT_EQ(truncated_ratio(-INFINITY), 0.0);
  EXPECT_EQ(truncated_ratio(1e308), 1.0);
  EXPECT_THROW(truncated_ratio(NAN), InvalidArgument);
}

TEST(TruncatedRatio, Monotone) {
  double prev = 0.0;
  for (double lr = -800.0; lr <= 5.0; lr += 0.01) {
    const double t = truncated_ratio(lr);
    ASSERT_GE(t, prev);
    ASSERT_LE(t, 1.0);
    prev = t;
  }
}
