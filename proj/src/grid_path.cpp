#include "qnet/grid_path.hpp"

#include "qnet/error.hpp"

#include <algorithm>
#include <cmath>

namespace qnet {

GridPath::GridPath(std::vector<double> t, Eigen::MatrixXd v) : times(std::move(t)), values(std::move(v)) {
  if (static_cast<Eigen::Index>(times.size()) != values.rows())
    throw ContractViolation("GridPath: grid and value rows differ in length");
}

Eigen::VectorXd GridPath::at(double t) const {
  if (times.empty()) throw ContractViolation("GridPath::at on empty path");
  auto it = std::upper_bound(times.begin(), times.end(), t);
  const auto row = it == times.begin() ? 0 : std::distance(times.begin(), it) - 1;
  return values.row(row).transpose();
}

void GridPath::validate() const {
  if (static_cast<Eigen::Index>(times.size()) != values.rows())
    throw ContractViolation("GridPath: grid and value rows differ in length");
  for (std::size_t k = 1; k < times.size(); ++k)
    if (!(times[k] > times[k - 1])) throw ContractViolation("GridPath: grid not strictly increasing");
  if (!values.allFinite()) throw ContractViolation("GridPath: non-finite value");
}

std::vector<double> uniformGrid(double horizon, std::size_t intervals) {
  if (!(horizon > 0.0) || intervals == 0) throw ContractViolation("uniformGrid: need horizon > 0 and intervals > 0");
  std::vector<double> grid(intervals + 1);
  for (std::size_t k = 0; k <= intervals; ++k)
    grid[k] = horizon * static_cast<double>(k) / static_cast<double>(intervals);
  grid.back() = horizon;
  return grid;
}

std::size_t intervalsFor(double horizon, std::size_t pointsPerUnit) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(horizon * static_cast<double>(pointsPerUnit) - 1e-9)));
}

}  // namespace qnet
