#pragma once

#include "qnet/config.hpp"
#include "qnet/grid_path.hpp"

#include <nlohmann/json.hpp>

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <vector>

namespace qnet {

/// Statistics of X^n(t) (or X(t) for the limit) over the replications.
struct MarginalStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
  Eigen::MatrixXd covariance;
  Eigen::VectorXd meanRadius;  ///< 1.96 sd / sqrt(R)
};

MarginalStats marginalStats(const Eigen::MatrixXd& samples);

struct CellReport {
  double n = 0.0;
  double t = 0.0;
  MarginalStats stats;
  Eigen::VectorXd ks;  ///< per coordinate, against the limit sample at t
  double ksCritical = 0.0;
};

struct ScaleReport {
  double n = 0.0;
  std::size_t replications = 0;  ///< replications that reached the horizon
  std::size_t explosions = 0;
  std::vector<Eigen::MatrixXd> samples;  ///< per evaluation time, replications x K
  std::vector<GridPath> paths;           ///< first `plotPaths` scaled paths
};

struct LimitReport {
  std::size_t replications = 0;
  std::vector<Eigen::MatrixXd> samples;  ///< per evaluation time
  std::vector<MarginalStats> stats;
};

struct ComparisonReport {
  std::vector<double> times;
  std::size_t stations = 0;
  LimitReport limit;
  std::vector<ScaleReport> scales;
  std::vector<CellReport> cells;  ///< ordered by n, then t
  nlohmann::json manifest;

  /// Cell of (n, t); throws ContractViolation when absent.
  const CellReport& cell(double n, double t) const;
};

/// Raised when more than 1% of the replications at some n hit the explosion
/// guard.
class SweepAborted : public Error {
 public:
  using Error::Error;
};

/// R samples of the limit process at the evaluation times.
LimitReport sampleLimit(const PreparedExperiment& experiment, std::size_t replications);

/// Scaled queue samples at the evaluation times for one n.
ScaleReport simulateScale(const PreparedExperiment& experiment, double n);

/// Full sweep over the configured n values against one shared limit sample.
ComparisonReport runScalingSweep(const PreparedExperiment& experiment);

/// Writes results.csv, manifest.json and, when the report carries paths,
/// paths_n<n>_<r>.csv into `directory` (created if missing). Throws Error
/// with the offending path on I/O failure.
void emitReport(const ComparisonReport& report, const std::filesystem::path& directory);

/// Formats with 17 significant digits.
std::string formatDouble(double value);

}  // namespace qnet
