#pragma once

#include "qnet/rate_function.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace qnet {

/// Largest spectral radius accepted for a routing matrix.
inline constexpr double kMaxSpectralRadius = 1.0 - 1e-6;

/// Returns I - P^T. Throws ValidationError("substochasticity") when P has a
/// negative entry or a row sum above 1.
Eigen::MatrixXd buildReflectionMatrix(const Eigen::MatrixXd& routing);

struct SpectralRadiusResult {
  double value = 0.0;
  bool converged = true;
  int iterations = 0;
};

/// Spectral radius of a square nonnegative matrix. The matrix is split into
/// strongly connected components; an acyclic component contributes 0 exactly
/// and each irreducible block is handled by power iteration on B + I with a
/// Collatz-Wielandt bracket. On non-convergence the best estimate is returned
/// with `converged == false`.
SpectralRadiusResult spectralRadiusDetailed(const Eigen::MatrixXd& matrix,
                                            double tolerance = 1e-12,
                                            int maxIterations = 200000);
double spectralRadius(const Eigen::MatrixXd& matrix);

/// Station count K, the external-arrival set, routing matrix P and R = I - P^T.
/// Construction validates substochasticity and the spectral radius bound.
class NetworkTopology {
 public:
  NetworkTopology() = default;
  /// `arrivalSet` uses 0-based station indices.
  NetworkTopology(Eigen::MatrixXd routing, std::vector<std::size_t> arrivalSet);

  std::size_t stations() const noexcept { return static_cast<std::size_t>(routing_.rows()); }
  const Eigen::MatrixXd& routing() const noexcept { return routing_; }
  const Eigen::MatrixXd& reflection() const noexcept { return reflection_; }
  const std::vector<std::size_t>& arrivalSet() const noexcept { return arrivalSet_; }
  bool hasArrivals(std::size_t station) const noexcept { return hasArrivals_[station] != 0; }
  double spectralRadius() const noexcept { return spectralRadius_; }

 private:
  Eigen::MatrixXd routing_;
  Eigen::MatrixXd reflection_;
  std::vector<std::size_t> arrivalSet_;
  std::vector<char> hasArrivals_;
  double spectralRadius_ = 0.0;
};

/// First-order rates lambda1, mu1 (argument scaled by 1/n) and second-order
/// perturbations lambda2, mu2 (argument scaled by 1/sqrt(n)).
struct ScalingFamily {
  RateVector lambda1, mu1, lambda2, mu2;

  std::size_t stations() const noexcept { return lambda1.size(); }
  /// Multiplies arrival rates of station i by arrivalFactor[i] and service
  /// rates by serviceFactor[i] (both orders).
  ScalingFamily scaled(std::span<const double> arrivalFactor,
                       std::span<const double> serviceFactor) const;
};

/// The rate vectors of the n-th network,
///   lambda^n(x) = n lambda1(x/n) + sqrt(n) lambda2(x/sqrt(n)),
/// and likewise for mu^n, all multiplied by `timeFactor` (1 for the
/// rate-absorbed scaling, 1/n for conventional time).
class EffectiveRates {
 public:
  EffectiveRates() = default;
  EffectiveRates(ScalingFamily family, double n, double timeFactor = 1.0);

  /// Rates used verbatim: lambda^n = lambda, mu^n = mu.
  static EffectiveRates direct(RateVector lambda, RateVector mu);

  std::size_t stations() const noexcept { return family_.stations(); }
  double scale() const noexcept { return n_; }
  double timeFactor() const noexcept { return timeFactor_; }
  const ScalingFamily& family() const noexcept { return family_; }

  void arrival(std::span<const double> x, std::span<double> out) const;
  void service(std::span<const double> x, std::span<double> out) const;
  double arrival(std::size_t station, std::span<const double> x) const;
  double service(std::size_t station, std::span<const double> x) const;

 private:
  double expand(const RateFunction& first, const RateFunction& second,
                std::span<const double> x) const;

  ScalingFamily family_;
  double n_ = 1.0;
  double sqrtN_ = 1.0;
  double timeFactor_ = 1.0;
};

/// a(x) = lambda2(x) - R mu2(x).
class DriftFunction {
 public:
  DriftFunction() = default;
  DriftFunction(RateVector lambda2, RateVector mu2, Eigen::MatrixXd reflection);

  /// A constant drift vector.
  static DriftFunction constant(Eigen::VectorXd value);

  std::size_t stations() const noexcept { return static_cast<std::size_t>(reflection_.rows()); }
  void operator()(std::span<const double> x, std::span<double> out) const;
  Eigen::VectorXd operator()(const Eigen::VectorXd& x) const;
  bool isConstant() const noexcept;
  /// Upper bound on the Lipschitz constant (Euclidean norms).
  double lipschitzBound() const;

 private:
  RateVector lambda2_, mu2_;
  Eigen::MatrixXd reflection_;
  Eigen::VectorXd constant_;
  bool hasConstant_ = false;
};

/// Checks the balance lambda1 = R mu1 on the validation grid (tolerance 1e-9)
/// and returns the drift a(x) = lambda2(x) - R mu2(x). Throws
/// ValidationError("(A3)") on imbalance.
DriftFunction driftFunction(const ScalingFamily& family, const Eigen::MatrixXd& reflection);

/// Points of the validation grid: lattice of 11^K points of [0, 10]^K for
/// K <= 4, otherwise 11^4 pseudo-random points of the same box.
std::vector<std::vector<double>> validationGrid(std::size_t stations);

struct Violation {
  std::string condition;  ///< e.g. "substochasticity", "(A1)", "(A3)"
  std::string message;
};

struct ModelCheckOptions {
  double balanceTolerance = 1e-9;
  double maxLipschitz = 1e6;
};

/// Runs the network-model checks (arrival set consistency, (A2) growth,
/// (A3) balance, (A4) Lipschitz drift) against an already valid topology.
/// Returns every violation found; empty means valid.
std::vector<Violation> checkScalingFamily(const NetworkTopology& topology,
                                          const ScalingFamily& family,
                                          const ModelCheckOptions& options = {});

/// Checks a routing matrix without throwing: substochasticity and (A1).
std::vector<Violation> checkRouting(const Eigen::MatrixXd& routing);

}  // namespace qnet
