#include "qnet/limit_diffusion.hpp"

#include "qnet/error.hpp"
#include "qnet/skorohod.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace qnet {
namespace {

constexpr double kPivotTolerance = 1e-12;

std::size_t stepCount(double horizon, double dt) {
  return static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
}

}  // namespace

void JacksonParams::validate() const {
  const Eigen::Index k = stations();
  if (k == 0 || routing.cols() != k) throw ContractViolation("JacksonParams: routing must be square and nonempty");
  for (const Eigen::VectorXd* v : {&arrivalRate, &arrivalVariance, &serviceRate, &serviceVariance, &arrivalSpeed, &serviceSpeed})
    if (v->size() != k || !v->allFinite()) throw ContractViolation("JacksonParams: vectors must have K finite entries");
  if ((arrivalRate.array() <= 0.0).any() || (serviceRate.array() <= 0.0).any())
    throw ContractViolation("JacksonParams: rates must be > 0");
  if ((arrivalVariance.array() < 0.0).any() || (serviceVariance.array() < 0.0).any())
    throw ContractViolation("JacksonParams: variances must be >= 0");
  if ((arrivalSpeed.array() < 0.0).any() || (serviceSpeed.array() < 0.0).any())
    throw ContractViolation("JacksonParams: speeds must be >= 0");
}

CovarianceMatrix factorCovariance(const Eigen::MatrixXd& matrix) {
  const Eigen::Index k = matrix.rows();
  if (matrix.cols() != k) throw ValidationError("covariance", "matrix must be square");
  if (!matrix.allFinite()) throw ValidationError("covariance", "matrix has non-finite entries");
  const double scale = std::max(1.0, matrix.diagonal().cwiseAbs().maxCoeff());
  if ((matrix - matrix.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw ValidationError("covariance", "matrix is not symmetric");
  const Eigen::MatrixXd a = 0.5 * (matrix + matrix.transpose());

  // Outer-product Cholesky with diagonal pivoting on the Schur complement.
  Eigen::MatrixXd work = a;
  Eigen::MatrixXd factor = Eigen::MatrixXd::Zero(k, k);
  std::vector<char> done(static_cast<std::size_t>(k), 0);
  for (Eigen::Index step = 0; step < k; ++step) {
    Eigen::Index pivot = -1;
    double best = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < k; ++i)
      if (!done[static_cast<std::size_t>(i)] && work(i, i) > best) {
        best = work(i, i);
        pivot = i;
      }
    if (best < -kPivotTolerance * scale) {
      std::ostringstream msg;
      msg << "matrix is indefinite (pivot " << best << ")";
      throw ValidationError("covariance", msg.str());
    }
    if (best <= kPivotTolerance * scale) break;
    const double root = std::sqrt(best);
    done[static_cast<std::size_t>(pivot)] = 1;
    for (Eigen::Index i = 0; i < k; ++i)
      factor(i, step) = done[static_cast<std::size_t>(i)] && i != pivot ? 0.0 : work(i, pivot) / root;
    for (Eigen::Index i = 0; i < k; ++i)
      for (Eigen::Index j = 0; j < k; ++j) work(i, j) -= factor(i, step) * factor(j, step);
  }
  if ((factor * factor.transpose() - a).cwiseAbs().maxCoeff() > 1e-9 * scale)
    throw ValidationError("covariance", "matrix is indefinite beyond tolerance");
  return {a, factor};
}

CovarianceMatrix buildCovariance(const JacksonParams& params) {
  params.validate();
  const Eigen::Index k = params.stations();
  const auto& p = params.routing;
  const auto& lam = params.arrivalRate;
  const auto& a = params.arrivalVariance;
  const auto& mu = params.serviceRate;
  const auto& s = params.serviceVariance;
  const auto& ls = params.arrivalSpeed;
  const auto& ms = params.serviceSpeed;
  auto cube = [](double x) { return x * x * x; };

  Eigen::MatrixXd cov(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    double diag = ls(i) * cube(lam(i)) * a(i) + ms(i) * cube(mu(i)) * s(i) * (1.0 - 2.0 * p(i, i));
    for (Eigen::Index j = 0; j < k; ++j)
      diag += ms(j) * mu(j) * p(j, i) * (1.0 - p(j, i) + p(j, i) * mu(j) * mu(j) * s(j));
    cov(i, i) = diag;
    for (Eigen::Index j = i + 1; j < k; ++j) {
      double off = ms(i) * cube(mu(i)) * s(i) * p(i, j) + ms(j) * cube(mu(j)) * s(j) * p(j, i);
      for (Eigen::Index m = 0; m < k; ++m)
        off += ms(m) * mu(m) * p(m, i) * p(m, j) * (1.0 - mu(m) * mu(m) * s(m));
      cov(i, j) = cov(j, i) = -off;
    }
  }
  return factorCovariance(cov);
}

MartingaleIncrements::MartingaleIncrements(CovarianceMatrix covariance) : covariance_(std::move(covariance)) {}

MartingaleIncrements::MartingaleIncrements(const JacksonParams& params, CovarianceMatrix covariance,
                                           MartingaleConstruction construction)
    : covariance_(std::move(covariance)), construction_(construction), routing_(params.routing) {
  if (construction_ != MartingaleConstruction::Componentwise) return;
  params.validate();
  const Eigen::Index k = params.stations();
  arrivalScale_.resize(k);
  serviceScale_.resize(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const double l = params.arrivalRate(i), m = params.serviceRate(i);
    arrivalScale_(i) = std::sqrt(params.arrivalSpeed(i) * l * l * l * params.arrivalVariance(i));
    serviceScale_(i) = std::sqrt(params.serviceSpeed(i) * m * m * m * params.serviceVariance(i));
    // Routing vector of station i: multinomial covariance per departure,
    // departures at rate serviceSpeed * serviceRate.
    const Eigen::VectorXd row = params.routing.row(i).transpose();
    Eigen::MatrixXd multinomial = Eigen::MatrixXd(row.asDiagonal()) - row * row.transpose();
    multinomial *= params.serviceSpeed(i) * m;
    routingFactor_.push_back(factorCovariance(multinomial).factor);
  }
}

void MartingaleIncrements::draw(Rng& rng, double dt, Eigen::VectorXd& out) const {
  const Eigen::Index k = stations();
  std::normal_distribution<double> normal;
  const double root = std::sqrt(dt);
  out.setZero(k);
  if (construction_ == MartingaleConstruction::Covariance) {
    for (Eigen::Index c = 0; c < k; ++c) {
      const double z = normal(rng) * root;
      for (Eigen::Index i = 0; i < k; ++i) out(i) += covariance_.factor(i, c) * z;
    }
    return;
  }
  for (Eigen::Index i = 0; i < k; ++i) out(i) += arrivalScale_(i) * root * normal(rng);
  for (Eigen::Index j = 0; j < k; ++j) {
    const double service = serviceScale_(j) * root * normal(rng);
    // -(delta_ij - p_ji) W^D_j
    out(j) -= service;
    for (Eigen::Index i = 0; i < k; ++i) out(i) += routing_(j, i) * service;
  }
  for (Eigen::Index j = 0; j < k; ++j) {
    const auto& f = routingFactor_[static_cast<std::size_t>(j)];
    for (Eigen::Index c = 0; c < k; ++c) {
      const double z = normal(rng) * root;
      for (Eigen::Index i = 0; i < k; ++i) out(i) += f(i, c) * z;
    }
  }
}

GridPath buildLimitMartingalePath(const MartingaleIncrements& increments, double horizon, double dt,
                                  std::uint64_t seed) {
  if (!(dt > 0.0) || !(horizon > 0.0)) throw ContractViolation("buildLimitMartingalePath: need dt > 0 and T > 0");
  const std::size_t steps = stepCount(horizon, dt);
  std::vector<double> grid(steps + 1);
  for (std::size_t s = 0; s <= steps; ++s) grid[s] = std::min(horizon, static_cast<double>(s) * dt);
  const Eigen::Index k = increments.stations();
  Eigen::MatrixXd values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(steps + 1), k);
  Rng rng(seed);
  Eigen::VectorXd inc(k);
  for (std::size_t s = 1; s <= steps; ++s) {
    increments.draw(rng, grid[s] - grid[s - 1], inc);
    values.row(static_cast<Eigen::Index>(s)) = values.row(static_cast<Eigen::Index>(s - 1)) + inc.transpose();
  }
  return GridPath(std::move(grid), std::move(values));
}

std::function<Eigen::VectorXd(Rng&)> pointMass(Eigen::VectorXd x) {
  return [x = std::move(x)](Rng&) { return x; };
}

namespace {

// Runs the scheme and calls record(stepIndex, time, state) after every step
// (and once for the initial state with stepIndex 0).
template <class Record>
void runEuler(const LimitSpec& spec, double horizon, double dt, std::uint64_t seed, Record&& record) {
  if (!(dt > 0.0) || dt > 1e-2) throw ContractViolation("simulateReflectedDiffusion: dt must lie in (0, 1e-2]");
  if (!(horizon > 0.0)) throw ContractViolation("simulateReflectedDiffusion: horizon must be > 0");
  const Eigen::Index k = spec.stations();
  if (spec.noise.stations() != k || spec.drift.stations() != static_cast<std::size_t>(k))
    throw ContractViolation("simulateReflectedDiffusion: dimension mismatch");
  Rng rng(seed);
  Eigen::VectorXd x = spec.initial ? spec.initial(rng) : Eigen::VectorXd::Zero(k);
  if (x.size() != k || (x.array() < 0.0).any())
    throw ContractViolation("simulateReflectedDiffusion: initial state must lie in the orthant");
  const std::size_t steps = stepCount(horizon, dt);
  record(std::size_t{0}, 0.0, x);
  Eigen::VectorXd noise(k), drift(k), increment(k);
  const bool constantDrift = spec.drift.isConstant();
  if (constantDrift) drift = spec.drift(x);
  double t = 0.0;
  for (std::size_t s = 1; s <= steps; ++s) {
    const double next = std::min(horizon, static_cast<double>(s) * dt);
    const double h = next - t;
    if (!constantDrift) drift = spec.drift(x);
    spec.noise.draw(rng, h, noise);
    increment = drift * h + noise;
    if (k == 1) {
      // R = 1 - p11 > 0, so the reflected endpoint is the positive part.
      x(0) = std::max(0.0, x(0) + increment(0));
    } else {
      x = reflectStep(x, increment, spec.routing);
    }
    t = next;
    record(s, t, x);
  }
}

}  // namespace

GridPath simulateReflectedDiffusion(const LimitSpec& spec, double horizon, double dt, std::uint64_t seed) {
  const std::size_t steps = stepCount(horizon, dt);
  std::vector<double> grid(steps + 1);
  Eigen::MatrixXd values(static_cast<Eigen::Index>(steps + 1), spec.stations());
  runEuler(spec, horizon, dt, seed, [&](std::size_t s, double t, const Eigen::VectorXd& x) {
    grid[s] = t;
    values.row(static_cast<Eigen::Index>(s)) = x.transpose();
  });
  return GridPath(std::move(grid), std::move(values));
}

Eigen::MatrixXd sampleReflectedDiffusion(const LimitSpec& spec, const std::vector<double>& times, double dt,
                                         std::uint64_t seed) {
  if (times.empty()) return Eigen::MatrixXd(0, spec.stations());
  const double horizon = *std::max_element(times.begin(), times.end());
  std::vector<std::size_t> targetStep(times.size());
  for (std::size_t r = 0; r < times.size(); ++r) {
    if (times[r] < 0.0) throw ContractViolation("sampleReflectedDiffusion: times must be >= 0");
    targetStep[r] = times[r] >= horizon ? stepCount(horizon, dt)
                                        : static_cast<std::size_t>(std::llround(times[r] / dt));
  }
  Eigen::MatrixXd out(static_cast<Eigen::Index>(times.size()), spec.stations());
  runEuler(spec, horizon, dt, seed, [&](std::size_t s, double, const Eigen::VectorXd& x) {
    for (std::size_t r = 0; r < times.size(); ++r)
      if (targetStep[r] == s) out.row(static_cast<Eigen::Index>(r)) = x.transpose();
  });
  return out;
}

LimitSpec rbmSpecialCase(const JacksonParams& params, const Eigen::VectorXd& drift0, const Eigen::VectorXd& x0,
                         const std::vector<std::size_t>& arrivalSet) {
  params.validate();
  const Eigen::Index k = params.stations();
  for (Eigen::Index i = 0; i < k; ++i) {
    const bool external = std::find(arrivalSet.begin(), arrivalSet.end(), static_cast<std::size_t>(i)) != arrivalSet.end();
    if ((external && params.arrivalSpeed(i) != 1.0) || params.serviceSpeed(i) != 1.0)
      throw ContractViolation("rbmSpecialCase: requires unit speed functions");
  }
  if (drift0.size() != k || x0.size() != k) throw ContractViolation("rbmSpecialCase: dimension mismatch");
  LimitSpec spec;
  spec.initial = pointMass(x0);
  spec.drift = DriftFunction::constant(drift0);
  spec.noise = MartingaleIncrements(buildCovariance(params));
  spec.routing = params.routing;
  spec.driftLipschitz = 0.0;
  return spec;
}

}  // namespace qnet
