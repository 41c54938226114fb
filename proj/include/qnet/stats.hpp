#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace qnet {

/// Two-sample Kolmogorov-Smirnov statistic sup_x |F_a(x) - F_b(x)| between
/// empirical CDFs. Ties across and within samples are handled exactly.
double ksTwoSample(std::span<const double> a, std::span<const double> b);

/// Asymptotic critical value c(alpha) sqrt((n + m) / (n m)) with
/// c(alpha) = sqrt(-ln(alpha / 2) / 2); c(0.01) ~ 1.628.
double ksCriticalValue(std::size_t n, std::size_t m, double alpha = 0.01);

/// Column means of a samples-by-dimension matrix.
Eigen::VectorXd sampleMean(const Eigen::MatrixXd& samples);

/// Unbiased sample covariance of a samples-by-dimension matrix, exactly
/// symmetric.
Eigen::MatrixXd sampleCovariance(const Eigen::MatrixXd& samples);

/// |a - b|_F / |b|_F.
double frobeniusRelativeError(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Total variation distance 0.5 sum |p - q| over the union of supports.
double totalVariation(std::span<const double> p, std::span<const double> q);

}  // namespace qnet
