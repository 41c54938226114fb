#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace qnet {

/// A K-vector valued path on a finite, strictly increasing time grid.
/// Row k of `values` is the path at `times[k]`; between grid points the path
/// is held constant (cadlag convention).
struct GridPath {
  std::vector<double> times;
  Eigen::MatrixXd values;

  GridPath() = default;
  GridPath(std::vector<double> t, Eigen::MatrixXd v);

  std::size_t size() const noexcept { return times.size(); }
  Eigen::Index dim() const noexcept { return values.cols(); }

  /// Value at an arbitrary time (last grid point at or before t).
  Eigen::VectorXd at(double t) const;

  /// Throws ContractViolation unless the grid is strictly increasing and all
  /// values are finite.
  void validate() const;
};

/// Uniform grid 0, T/m, ..., T with m = intervals.
std::vector<double> uniformGrid(double horizon, std::size_t intervals);

/// Number of intervals giving `pointsPerUnit` points per unit time on [0, T].
std::size_t intervalsFor(double horizon, std::size_t pointsPerUnit);

/// Default path resolution: 2^10 points per unit time.
inline constexpr std::size_t kDefaultPointsPerUnit = 1024;

}  // namespace qnet
