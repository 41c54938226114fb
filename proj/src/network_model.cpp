#include "qnet/network_model.hpp"

#include "qnet/error.hpp"
#include "qnet/rng.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qnet {
namespace {

constexpr double kSubstochasticSlack = 1e-12;

void requireSquare(const Eigen::MatrixXd& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) throw ContractViolation(std::string(what) + ": matrix must be square and nonempty");
}

// Tarjan's strongly connected components on the graph i -> j iff m(i,j) > 0.
std::vector<std::vector<Eigen::Index>> stronglyConnectedComponents(const Eigen::MatrixXd& m) {
  const Eigen::Index k = m.rows();
  std::vector<Eigen::Index> index(k, -1), low(k, 0);
  std::vector<char> onStack(k, 0);
  std::vector<Eigen::Index> stack;
  std::vector<std::vector<Eigen::Index>> components;
  Eigen::Index counter = 0;

  auto connect = [&](auto&& self, Eigen::Index v) -> void {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    onStack[v] = 1;
    for (Eigen::Index w = 0; w < k; ++w) {
      if (!(m(v, w) > 0.0)) continue;
      if (index[w] < 0) {
        self(self, w);
        low[v] = std::min(low[v], low[w]);
      } else if (onStack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<Eigen::Index> component;
      Eigen::Index w;
      do {
        w = stack.back();
        stack.pop_back();
        onStack[w] = 0;
        component.push_back(w);
      } while (w != v);
      components.push_back(std::move(component));
    }
  };
  for (Eigen::Index v = 0; v < k; ++v)
    if (index[v] < 0) connect(connect, v);
  return components;
}

SpectralRadiusResult irreducibleRadius(const Eigen::MatrixXd& block, double tolerance, int maxIterations) {
  const Eigen::Index k = block.rows();
  const Eigen::MatrixXd shifted = block + Eigen::MatrixXd::Identity(k, k);
  Eigen::VectorXd x = Eigen::VectorXd::Ones(k);
  SpectralRadiusResult result;
  double lo = 0.0, hi = 0.0;
  for (int it = 1; it <= maxIterations; ++it) {
    Eigen::VectorXd y = shifted * x;
    lo = std::numeric_limits<double>::infinity();
    hi = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) {
      const double ratio = y(i) / x(i);
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
    x = y / y.maxCoeff();
    result.iterations = it;
    if (hi - lo <= tolerance) {
      result.value = 0.5 * (lo + hi) - 1.0;
      return result;
    }
  }
  result.value = 0.5 * (lo + hi) - 1.0;
  result.converged = false;
  return result;
}

}  // namespace

std::vector<Violation> checkRouting(const Eigen::MatrixXd& routing) {
  std::vector<Violation> out;
  if (routing.rows() != routing.cols() || routing.rows() == 0) {
    out.push_back({"substochasticity", "routing matrix must be square and nonempty"});
    return out;
  }
  for (Eigen::Index i = 0; i < routing.rows(); ++i) {
    for (Eigen::Index j = 0; j < routing.cols(); ++j) {
      if (!std::isfinite(routing(i, j)) || routing(i, j) < 0.0) {
        std::ostringstream msg;
        msg << "routing entry p(" << i + 1 << "," << j + 1 << ") = " << routing(i, j) << " is not a probability";
        out.push_back({"substochasticity", msg.str()});
      }
    }
    const double rowSum = routing.row(i).sum();
    if (rowSum > 1.0 + kSubstochasticSlack) {
      std::ostringstream msg;
      msg << "row " << i + 1 << " of the routing matrix sums to " << rowSum << " > 1";
      out.push_back({"substochasticity", msg.str()});
    }
  }
  if (!out.empty()) return out;
  const auto rho = spectralRadiusDetailed(routing);
  if (!(rho.value <= kMaxSpectralRadius)) {
    std::ostringstream msg;
    msg << "spectral radius of P is " << rho.value << ", must be <= 1 - 1e-6 (network must be open)";
    out.push_back({"(A1)", msg.str()});
  } else if (!rho.converged) {
    out.push_back({"(A1)", "spectral radius iteration did not converge"});
  }
  return out;
}

Eigen::MatrixXd buildReflectionMatrix(const Eigen::MatrixXd& routing) {
  for (const auto& v : checkRouting(routing))
    if (v.condition == "substochasticity") throw ValidationError(v.condition, v.message);
  const Eigen::Index k = routing.rows();
  return Eigen::MatrixXd::Identity(k, k) - routing.transpose();
}

SpectralRadiusResult spectralRadiusDetailed(const Eigen::MatrixXd& matrix, double tolerance, int maxIterations) {
  requireSquare(matrix, "spectralRadius");
  if ((matrix.array() < 0.0).any() || !matrix.allFinite())
    throw ContractViolation("spectralRadius: matrix must be finite and nonnegative");
  SpectralRadiusResult total;
  for (const auto& component : stronglyConnectedComponents(matrix)) {
    if (component.size() == 1) {
      const double self = matrix(component[0], component[0]);
      total.value = std::max(total.value, self);
      continue;
    }
    const auto k = static_cast<Eigen::Index>(component.size());
    Eigen::MatrixXd block(k, k);
    for (Eigen::Index a = 0; a < k; ++a)
      for (Eigen::Index b = 0; b < k; ++b) block(a, b) = matrix(component[a], component[b]);
    const auto r = irreducibleRadius(block, tolerance, maxIterations);
    total.value = std::max(total.value, r.value);
    total.iterations += r.iterations;
    total.converged = total.converged && r.converged;
  }
  return total;
}

double spectralRadius(const Eigen::MatrixXd& matrix) { return spectralRadiusDetailed(matrix).value; }

NetworkTopology::NetworkTopology(Eigen::MatrixXd routing, std::vector<std::size_t> arrivalSet)
    : routing_(std::move(routing)), arrivalSet_(std::move(arrivalSet)) {
  for (const auto& v : checkRouting(routing_)) throw ValidationError(v.condition, v.message);
  reflection_ = buildReflectionMatrix(routing_);
  spectralRadius_ = qnet::spectralRadius(routing_);
  hasArrivals_.assign(stations(), 0);
  std::sort(arrivalSet_.begin(), arrivalSet_.end());
  arrivalSet_.erase(std::unique(arrivalSet_.begin(), arrivalSet_.end()), arrivalSet_.end());
  for (auto s : arrivalSet_) {
    if (s >= stations()) throw ValidationError("topology", "arrival set names a station outside 1..K");
    hasArrivals_[s] = 1;
  }
}

ScalingFamily ScalingFamily::scaled(std::span<const double> arrivalFactor,
                                    std::span<const double> serviceFactor) const {
  ScalingFamily out = *this;
  for (std::size_t i = 0; i < stations(); ++i) {
    out.lambda1[i] = lambda1[i].scaled(arrivalFactor[i]);
    out.lambda2[i] = lambda2[i].scaled(arrivalFactor[i]);
    out.mu1[i] = mu1[i].scaled(serviceFactor[i]);
    out.mu2[i] = mu2[i].scaled(serviceFactor[i]);
  }
  return out;
}

EffectiveRates::EffectiveRates(ScalingFamily family, double n, double timeFactor)
    : family_(std::move(family)), n_(n), sqrtN_(std::sqrt(n)), timeFactor_(timeFactor) {
  if (!(n >= 1.0)) throw ContractViolation("EffectiveRates: scale n must be >= 1");
  if (!(timeFactor > 0.0)) throw ContractViolation("EffectiveRates: time factor must be > 0");
  const auto k = family_.stations();
  if (family_.mu1.size() != k || family_.lambda2.size() != k || family_.mu2.size() != k)
    throw ContractViolation("EffectiveRates: rate vectors differ in length");
}

EffectiveRates EffectiveRates::direct(RateVector lambda, RateVector mu) {
  const auto k = lambda.size();
  ScalingFamily family{std::move(lambda), std::move(mu), zeroRates(k), zeroRates(k)};
  return EffectiveRates(std::move(family), 1.0, 1.0);
}

double EffectiveRates::expand(const RateFunction& first, const RateFunction& second,
                              std::span<const double> x) const {
  thread_local std::vector<double> scaled;
  double value = 0.0;
  if (first.isConstant()) {
    value = n_ * first(x);
  } else {
    scaled.assign(x.begin(), x.end());
    for (auto& v : scaled) v /= n_;
    value = n_ * first(scaled);
  }
  if (second.isConstant()) {
    value += sqrtN_ * second(x);
  } else {
    scaled.assign(x.begin(), x.end());
    for (auto& v : scaled) v /= sqrtN_;
    value += sqrtN_ * second(scaled);
  }
  return timeFactor_ * value;
}

double EffectiveRates::arrival(std::size_t station, std::span<const double> x) const {
  return expand(family_.lambda1[station], family_.lambda2[station], x);
}

double EffectiveRates::service(std::size_t station, std::span<const double> x) const {
  return expand(family_.mu1[station], family_.mu2[station], x);
}

void EffectiveRates::arrival(std::span<const double> x, std::span<double> out) const {
  for (std::size_t i = 0; i < stations(); ++i) out[i] = arrival(i, x);
}

void EffectiveRates::service(std::span<const double> x, std::span<double> out) const {
  for (std::size_t i = 0; i < stations(); ++i) out[i] = service(i, x);
}

DriftFunction::DriftFunction(RateVector lambda2, RateVector mu2, Eigen::MatrixXd reflection)
    : lambda2_(std::move(lambda2)), mu2_(std::move(mu2)), reflection_(std::move(reflection)) {
  if (lambda2_.size() != mu2_.size() || static_cast<Eigen::Index>(lambda2_.size()) != reflection_.rows())
    throw ContractViolation("DriftFunction: dimension mismatch");
}

DriftFunction DriftFunction::constant(Eigen::VectorXd value) {
  DriftFunction d;
  d.reflection_ = Eigen::MatrixXd::Identity(value.size(), value.size());
  d.constant_ = std::move(value);
  d.hasConstant_ = true;
  return d;
}

void DriftFunction::operator()(std::span<const double> x, std::span<double> out) const {
  const auto k = stations();
  if (hasConstant_) {
    for (std::size_t i = 0; i < k; ++i) out[i] = constant_(static_cast<Eigen::Index>(i));
    return;
  }
  thread_local std::vector<double> mu;
  mu.resize(k);
  evaluate(mu2_, x, mu);
  for (std::size_t i = 0; i < k; ++i) {
    double v = lambda2_[i](x);
    for (std::size_t j = 0; j < k; ++j)
      v -= reflection_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * mu[j];
    out[i] = v;
  }
}

Eigen::VectorXd DriftFunction::operator()(const Eigen::VectorXd& x) const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(stations()));
  (*this)(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
          std::span<double>(out.data(), static_cast<std::size_t>(out.size())));
  return out;
}

bool DriftFunction::isConstant() const noexcept {
  if (hasConstant_) return true;
  return std::all_of(lambda2_.begin(), lambda2_.end(), [](const RateFunction& r) { return r.isConstant(); }) &&
         std::all_of(mu2_.begin(), mu2_.end(), [](const RateFunction& r) { return r.isConstant(); });
}

double DriftFunction::lipschitzBound() const {
  if (hasConstant_) return 0.0;
  double la = 0.0, mu = 0.0;
  for (const auto& r : lambda2_) la += r.lipschitzBound() * r.lipschitzBound();
  for (const auto& r : mu2_) mu += r.lipschitzBound() * r.lipschitzBound();
  const double rNorm = reflection_.operatorNorm();
  return std::sqrt(la) + rNorm * std::sqrt(mu);
}

std::vector<std::vector<double>> validationGrid(std::size_t stations) {
  std::vector<std::vector<double>> points;
  constexpr int kSide = 11;
  if (stations <= 4) {
    std::size_t total = 1;
    for (std::size_t i = 0; i < stations; ++i) total *= kSide;
    points.reserve(total);
    for (std::size_t idx = 0; idx < total; ++idx) {
      std::vector<double> x(stations);
      std::size_t rest = idx;
      for (std::size_t i = 0; i < stations; ++i) {
        x[i] = static_cast<double>(rest % kSide);
        rest /= kSide;
      }
      points.push_back(std::move(x));
    }
    return points;
  }
  Rng rng(deriveSeed(0x5eed, {stations}));
  constexpr std::size_t kSamples = 11 * 11 * 11 * 11;
  points.reserve(kSamples);
  for (std::size_t s = 0; s < kSamples; ++s) {
    std::vector<double> x(stations);
    for (auto& v : x) v = 10.0 * uniformOpen(rng);
    points.push_back(std::move(x));
  }
  return points;
}

namespace {

std::vector<Violation> balanceViolations(const ScalingFamily& family, const Eigen::MatrixXd& reflection,
                                         double tolerance) {
  std::vector<Violation> out;
  const auto k = family.stations();
  std::vector<double> lam(k), mu(k);
  for (const auto& x : validationGrid(k)) {
    evaluate(family.lambda1, x, lam);
    evaluate(family.mu1, x, mu);
    for (std::size_t i = 0; i < k; ++i) {
      double rmu = 0.0;
      for (std::size_t j = 0; j < k; ++j)
        rmu += reflection(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * mu[j];
      const double gap = lam[i] - rmu;
      if (std::abs(gap) > tolerance * (1.0 + std::abs(lam[i]))) {
        std::ostringstream msg;
        msg << "balance lambda1 = R mu1 fails at station " << i + 1 << ", x = (";
        for (std::size_t j = 0; j < k; ++j) msg << (j ? "," : "") << x[j];
        msg << "): lambda1 - R mu1 = " << gap;
        out.push_back({"(A3)", msg.str()});
        return out;
      }
    }
  }
  return out;
}

}  // namespace

DriftFunction driftFunction(const ScalingFamily& family, const Eigen::MatrixXd& reflection) {
  const auto k = family.stations();
  if (family.mu1.size() != k || family.lambda2.size() != k || family.mu2.size() != k ||
      static_cast<std::size_t>(reflection.rows()) != k)
    throw ContractViolation("driftFunction: dimension mismatch");
  for (const auto& v : balanceViolations(family, reflection, 1e-9)) throw ValidationError(v.condition, v.message);
  return DriftFunction(family.lambda2, family.mu2, reflection);
}

std::vector<Violation> checkScalingFamily(const NetworkTopology& topology, const ScalingFamily& family,
                                          const ModelCheckOptions& options) {
  std::vector<Violation> out;
  const auto k = topology.stations();
  if (family.lambda1.size() != k || family.mu1.size() != k || family.lambda2.size() != k || family.mu2.size() != k) {
    out.push_back({"config", "rate vectors must have one entry per station"});
    return out;
  }
  for (std::size_t i = 0; i < k; ++i) {
    if (!topology.hasArrivals(i) && !(family.lambda1[i].isIdenticallyZero() && family.lambda2[i].isIdenticallyZero()))
      out.push_back({"arrival-set", "station " + std::to_string(i + 1) + " is outside the arrival set but has a nonzero arrival rate"});
  }

  const auto grid = validationGrid(k);
  auto checkGrowth = [&](const RateVector& rates, const char* name) {
    for (std::size_t i = 0; i < k; ++i) {
      const auto& r = rates[i];
      if (!r.hasDeclaredGrowthBound()) continue;
      const double h = r.growthBound();
      for (const auto& x : grid) {
        double norm = 0.0;
        for (double v : x) norm += v * v;
        norm = std::sqrt(norm);
        const double value = r(x);
        if (value > h * (1.0 + norm) * (1.0 + 1e-12)) {
          std::ostringstream msg;
          msg << name << "[" << i + 1 << "] = " << value << " exceeds declared linear growth bound " << h
              << " * (1 + |x|) at |x| = " << norm;
          out.push_back({"(A2)", msg.str()});
          break;
        }
      }
    }
  };
  checkGrowth(family.lambda1, "lambda1");
  checkGrowth(family.mu1, "mu1");
  checkGrowth(family.lambda2, "lambda2");
  checkGrowth(family.mu2, "mu2");

  auto balance = balanceViolations(family, topology.reflection(), options.balanceTolerance);
  out.insert(out.end(), balance.begin(), balance.end());

  const DriftFunction drift(family.lambda2, family.mu2, topology.reflection());
  const double lip = drift.lipschitzBound();
  if (!std::isfinite(lip) || lip > options.maxLipschitz) {
    std::ostringstream msg;
    msg << "drift a(x) = lambda2(x) - R mu2(x) has Lipschitz bound " << lip << " above the admissible "
        << options.maxLipschitz;
    out.push_back({"(A4)", msg.str()});
  }
  return out;
}

}  // namespace qnet
