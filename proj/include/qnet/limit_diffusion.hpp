#pragma once

#include "qnet/grid_path.hpp"
#include "qnet/network_model.hpp"
#include "qnet/rng.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <vector>

namespace qnet {

/// Generalized Jackson network data at the origin. For station j,
/// arrivalRate = 1 / E[interarrival], arrivalVariance = Var[interarrival];
/// stations outside the arrival set use arrivalRate = 1, arrivalVariance = 0
/// and arrivalSpeed = 0. Speeds are the state-dependent speed functions
/// evaluated at 0.
struct JacksonParams {
  Eigen::VectorXd arrivalRate, arrivalVariance;
  Eigen::VectorXd serviceRate, serviceVariance;
  Eigen::VectorXd arrivalSpeed, serviceSpeed;
  Eigen::MatrixXd routing;

  Eigen::Index stations() const noexcept { return routing.rows(); }
  void validate() const;
};

/// Covariance of the limit martingale with its factor, A = L L^T.
struct CovarianceMatrix {
  Eigen::MatrixXd matrix;
  Eigen::MatrixXd factor;
};

/// Pivoted Cholesky factor of a symmetric positive semidefinite matrix;
/// negative pivots above -1e-12 (relative to the largest diagonal entry) are
/// truncated to 0. Throws ValidationError("covariance") when the matrix is
/// asymmetric or indefinite beyond that tolerance.
CovarianceMatrix factorCovariance(const Eigen::MatrixXd& matrix);

/// Covariance matrix of the Jackson-network limit martingale:
///   A_ii = ls_i l_i^3 a_i + ms_i m_i^3 s_i (1 - 2 p_ii)
///          + sum_j ms_j m_j p_ji (1 - p_ji + p_ji m_j^2 s_j)
///   A_ij = -[ms_i m_i^3 s_i p_ij + ms_j m_j^3 s_j p_ji
///            + sum_k ms_k m_k p_ki p_kj (1 - m_k^2 s_k)],   i != j
/// with l = arrivalRate, a = arrivalVariance, m = serviceRate,
/// s = serviceVariance, ls/ms the speeds at 0.
CovarianceMatrix buildCovariance(const JacksonParams& params);

enum class MartingaleConstruction {
  Covariance,   ///< A^{1/2} times standard Brownian increments
  Componentwise ///< independent arrival, service and routing Brownian drivers
};

/// Increments of the limit martingale over one step of length dt.
class MartingaleIncrements {
 public:
  MartingaleIncrements(const JacksonParams& params, CovarianceMatrix covariance, MartingaleConstruction construction);
  explicit MartingaleIncrements(CovarianceMatrix covariance);

  Eigen::Index stations() const noexcept { return covariance_.matrix.rows(); }
  const CovarianceMatrix& covariance() const noexcept { return covariance_; }
  /// Writes one increment into out.
  void draw(Rng& rng, double dt, Eigen::VectorXd& out) const;

 private:
  CovarianceMatrix covariance_;
  MartingaleConstruction construction_ = MartingaleConstruction::Covariance;
  // Componentwise drivers: per-station standard deviations (per unit time) of
  // W^A(lambda(0) t) and W^D(mu(0) t), and routing factors per source station.
  Eigen::VectorXd arrivalScale_, serviceScale_;
  std::vector<Eigen::MatrixXd> routingFactor_;
  Eigen::MatrixXd routing_;
};

/// Path of the limit martingale on the grid 0, dt, ..., T.
GridPath buildLimitMartingalePath(const MartingaleIncrements& increments, double horizon, double dt,
                                  std::uint64_t seed);

/// Limit process X = Gamma(X0 + int a(X) ds + M) data.
struct LimitSpec {
  std::function<Eigen::VectorXd(Rng&)> initial;
  DriftFunction drift;
  MartingaleIncrements noise{CovarianceMatrix{}};
  Eigen::MatrixXd routing;
  double driftLipschitz = 0.0;

  Eigen::Index stations() const noexcept { return routing.rows(); }
};

/// Sampler for a point mass at x.
std::function<Eigen::VectorXd(Rng&)> pointMass(Eigen::VectorXd x);

/// Euler scheme with per-step Skorohod projection on the grid 0, dt, ..., T
/// (last step shortened to land on T). Requires dt <= 1e-2.
GridPath simulateReflectedDiffusion(const LimitSpec& spec, double horizon, double dt, std::uint64_t seed);

/// Same scheme, recording only the values at the requested times (each
/// rounded to the scheme grid). Rows follow `times`.
Eigen::MatrixXd sampleReflectedDiffusion(const LimitSpec& spec, const std::vector<double>& times, double dt,
                                         std::uint64_t seed);

/// Reflected Brownian motion with constant drift `drift0`, covariance from the
/// Jackson formulas and reflection I - P^T. Throws ContractViolation unless
/// every station in the arrival set has arrival speed 1 and every station
/// has service speed 1.
LimitSpec rbmSpecialCase(const JacksonParams& params, const Eigen::VectorXd& drift0, const Eigen::VectorXd& x0,
                         const std::vector<std::size_t>& arrivalSet);

}  // namespace qnet
