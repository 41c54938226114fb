#include "qnet/stats.hpp"

#include "qnet/error.hpp"

#include <algorithm>
#include <cmath>

namespace qnet {

double ksTwoSample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw ContractViolation("ksTwoSample: samples must be nonempty");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double n = static_cast<double>(x.size()), m = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double best = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    best = std::max(best, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  // Once one sample is exhausted its CDF is 1 and the other only grows
  // towards 1, so the remaining gap is already maximal at this point.
  best = std::max(best, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  return best;
}

double ksCriticalValue(std::size_t n, std::size_t m, double alpha) {
  if (n == 0 || m == 0) throw ContractViolation("ksCriticalValue: sample sizes must be positive");
  const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
  const double dn = static_cast<double>(n), dm = static_cast<double>(m);
  return c * std::sqrt((dn + dm) / (dn * dm));
}

Eigen::VectorXd sampleMean(const Eigen::MatrixXd& samples) {
  if (samples.rows() == 0) return Eigen::VectorXd::Zero(samples.cols());
  return samples.colwise().mean().transpose();
}

Eigen::MatrixXd sampleCovariance(const Eigen::MatrixXd& samples) {
  const Eigen::Index k = samples.cols();
  if (samples.rows() < 2) return Eigen::MatrixXd::Zero(k, k);
  const Eigen::RowVectorXd mean = samples.colwise().mean();
  const Eigen::MatrixXd centered = samples.rowwise() - mean;
  Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(samples.rows() - 1);
  return 0.5 * (cov + cov.transpose());
}

double frobeniusRelativeError(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double denominator = b.norm();
  if (denominator == 0.0) return a.norm() == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return (a - b).norm() / denominator;
}

double totalVariation(std::span<const double> p, std::span<const double> q) {
  const std::size_t size = std::max(p.size(), q.size());
  double total = 0.0;
  for (std::size_t i = 0; i < size; ++i) {
    const double a = i < p.size() ? p[i] : 0.0;
    const double b = i < q.size() ? q[i] : 0.0;
    total += std::abs(a - b);
  }
  return 0.5 * total;
}

}  // namespace qnet
