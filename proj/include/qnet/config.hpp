#pragma once

#include "qnet/limit_diffusion.hpp"
#include "qnet/network_model.hpp"
#include "qnet/primitives.hpp"
#include "qnet/simulator.hpp"

#include <nlohmann/json.hpp>

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace qnet {

/// Distribution of the scaled initial state X0; the n-th network starts from
/// Q(0) = round(sqrt(n) X0).
struct InitialState {
  enum class Kind { Point, Uniform } kind = Kind::Point;
  Eigen::VectorXd value;  ///< point mass, or lower corner for Uniform
  Eigen::VectorXd upper;  ///< upper corner for Uniform

  Eigen::VectorXd sample(Rng& rng) const;
};

struct LimitSettings {
  double dt = 1e-3;
  std::size_t replications = 0;  ///< 0: same as the experiment
  MartingaleConstruction construction = MartingaleConstruction::Covariance;
};

/// Parsed experiment file. Field names of the JSON schema are documented in
/// the README; station indices in the file are 1-based.
struct ExperimentConfig {
  nlohmann::json source;

  // topology
  std::size_t stations = 0;
  std::vector<std::size_t> arrivalSet;  ///< 0-based
  Eigen::MatrixXd routing;

  // rates: speed functions of the scaling family
  ScalingFamily family;

  // primitives
  std::vector<RenewalSpec> arrivalSpecs;
  std::vector<RenewalSpec> serviceSpecs;

  // scaling
  std::vector<double> nValues;
  ScalingConvention convention = ScalingConvention::Conventional;
  InitialState initial;

  // experiment
  std::size_t replications = 1000;
  double horizon = 1.0;
  std::vector<double> evaluationTimes{0.5, 1.0};
  bool reportMean = true, reportCovariance = true, reportKs = true;
  std::uint64_t seed = 1;
  Engine engine = Engine::Direct;
  std::uint64_t maxEvents = 100'000'000;
  LimitSettings limit;
  std::size_t threads = 0;

  // output
  std::filesystem::path outDir = "out";
  std::size_t plotPaths = 0;
  std::size_t gridPoints = kDefaultPointsPerUnit;
};

/// Malformed or incomplete experiment file.
class ConfigError : public ValidationError {
 public:
  explicit ConfigError(const std::string& message) : ValidationError("config", message) {}
};

ExperimentConfig parseConfig(const nlohmann::json& document);
ExperimentConfig loadConfig(const std::filesystem::path& path);

/// Every violated condition of a configuration; empty when it may run.
struct ValidationResult {
  std::vector<Violation> violations;
  double spectralRadius = 0.0;
  bool ok() const noexcept { return violations.empty(); }
};

/// Network-model checks (substochasticity, (A1)-(A4)), primitive checks and
/// experiment-section checks, each violation labelled with its condition.
ValidationResult validateConfig(const ExperimentConfig& config);

/// Everything derived from a valid configuration.
struct PreparedExperiment {
  ExperimentConfig config;
  NetworkTopology topology;
  ScalingFamily intensities;  ///< speeds divided by primitive means
  JacksonParams jackson;
  CovarianceMatrix covariance;
  DriftFunction drift;
  Eigen::VectorXd driftAtOrigin;
  LimitSpec limit;

  /// Simulation settings of replication `replication` at scale n.
  SimConfig simConfig(double n, std::size_t replication) const;
  std::uint64_t replicationSeed(double n, std::size_t replication) const;
  std::uint64_t limitSeed(std::size_t replication) const;
};

/// Thrown by prepareExperiment; carries all violations.
class InvalidConfig : public Error {
 public:
  explicit InvalidConfig(std::vector<Violation> violations);
  const std::vector<Violation>& violations() const noexcept { return violations_; }

 private:
  std::vector<Violation> violations_;
};

PreparedExperiment prepareExperiment(const ExperimentConfig& config);

}  // namespace qnet
