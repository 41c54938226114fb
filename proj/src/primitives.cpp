#include "qnet/primitives.hpp"

#include "qnet/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qnet {

std::string toString(Distribution d) {
  switch (d) {
    case Distribution::Exponential: return "exponential";
    case Distribution::Erlang: return "erlang";
    case Distribution::Uniform: return "uniform";
    case Distribution::Lognormal: return "lognormal";
    case Distribution::Deterministic: return "deterministic";
  }
  return "unknown";
}

Distribution distributionFromString(const std::string& name) {
  if (name == "exponential") return Distribution::Exponential;
  if (name == "erlang") return Distribution::Erlang;
  if (name == "uniform") return Distribution::Uniform;
  if (name == "lognormal") return Distribution::Lognormal;
  if (name == "deterministic") return Distribution::Deterministic;
  throw ContractViolation("unknown distribution '" + name + "'");
}

RenewalSpec RenewalSpec::exponential(double mean) {
  RenewalSpec s;
  s.distribution = Distribution::Exponential;
  s.mean = mean;
  s.validate();
  return s;
}

RenewalSpec RenewalSpec::erlang(int phases, double mean) {
  RenewalSpec s;
  s.distribution = Distribution::Erlang;
  s.shape = phases;
  s.mean = mean;
  s.validate();
  return s;
}

RenewalSpec RenewalSpec::uniform(double lower, double upper) {
  RenewalSpec s;
  s.distribution = Distribution::Uniform;
  s.lower = lower;
  s.upper = upper;
  s.mean = 0.5 * (lower + upper);
  s.validate();
  return s;
}

RenewalSpec RenewalSpec::lognormal(double mean, double sigma) {
  RenewalSpec s;
  s.distribution = Distribution::Lognormal;
  s.mean = mean;
  s.sigma = sigma;
  s.validate();
  return s;
}

RenewalSpec RenewalSpec::deterministic(double gap) {
  RenewalSpec s;
  s.distribution = Distribution::Deterministic;
  s.mean = gap;
  s.validate();
  return s;
}

double RenewalSpec::variance() const {
  switch (distribution) {
    case Distribution::Exponential: return mean * mean;
    case Distribution::Erlang: return mean * mean / shape;
    case Distribution::Uniform: return (upper - lower) * (upper - lower) / 12.0;
    case Distribution::Lognormal: return mean * mean * std::expm1(sigma * sigma);
    case Distribution::Deterministic: return 0.0;
  }
  return 0.0;
}

void RenewalSpec::validate() const {
  if (!std::isfinite(mean) || !(mean > 0.0)) throw ContractViolation("RenewalSpec: mean must be finite and > 0");
  switch (distribution) {
    case Distribution::Erlang:
      if (shape < 1) throw ContractViolation("RenewalSpec: Erlang needs at least one phase");
      break;
    case Distribution::Uniform:
      if (!(lower >= 0.0) || !(upper > lower) || !std::isfinite(upper))
        throw ContractViolation("RenewalSpec: uniform support must satisfy 0 <= a < b");
      if (std::abs(mean - 0.5 * (lower + upper)) > 1e-12 * mean)
        throw ContractViolation("RenewalSpec: uniform mean disagrees with its support");
      break;
    case Distribution::Lognormal:
      if (!(sigma > 0.0) || sigma > 2.0) throw ContractViolation("RenewalSpec: lognormal sigma must lie in (0, 2]");
      break;
    default:
      break;
  }
}

double RenewalSpec::draw(Rng& rng) const {
  for (;;) {
    double gap = 0.0;
    switch (distribution) {
      case Distribution::Exponential:
        gap = -mean * std::log(uniformOpen(rng));
        break;
      case Distribution::Erlang: {
        double product = 1.0;
        for (int k = 0; k < shape; ++k) product *= uniformOpen(rng);
        gap = -(mean / shape) * std::log(product);
        break;
      }
      case Distribution::Uniform:
        gap = lower + (upper - lower) * uniformOpen(rng);
        break;
      case Distribution::Lognormal: {
        std::normal_distribution<double> normal(std::log(mean) - 0.5 * sigma * sigma, sigma);
        gap = std::exp(normal(rng));
        break;
      }
      case Distribution::Deterministic:
        gap = mean;
        break;
    }
    if (gap > 0.0) return gap;
  }
}

RenewalStream::RenewalStream(RenewalSpec spec, std::uint64_t seed, bool recordHistory)
    : spec_(spec), rng_(seed), record_(recordHistory) {
  spec_.validate();
  nextEpoch_ = spec_.draw(rng_);
}

void RenewalStream::advance() {
  if (record_) epochs_.push_back(nextEpoch_);
  ++count_;
  const double gap = spec_.draw(rng_);
  const double next = nextEpoch_ + gap;
  // Gaps below the spacing of doubles at this epoch would not advance it.
  nextEpoch_ = next > nextEpoch_ ? next : std::nextafter(nextEpoch_, std::numeric_limits<double>::infinity());
}

std::int64_t RenewalStream::nextCount(double internalTime) {
  if (internalTime < lastQuery_)
    throw ContractViolation("RenewalStream::nextCount: queries must be nondecreasing in time");
  lastQuery_ = internalTime;
  while (nextEpoch_ <= internalTime) advance();
  return count_;
}

RoutingStream::RoutingStream(std::vector<double> probabilities, std::uint64_t seed, bool recordHistory)
    : probabilities_(std::move(probabilities)), rng_(seed), record_(recordHistory) {
  double total = 0.0;
  for (double p : probabilities_) {
    if (!(p >= 0.0)) throw ContractViolation("RoutingStream: probabilities must be >= 0");
    total += p;
    cumulative_.push_back(total);
  }
  if (total > 1.0 + 1e-12) throw ContractViolation("RoutingStream: probabilities sum above 1");
  // A row meant to sum to one must never exit through rounding.
  if (!cumulative_.empty() && total >= 1.0 - 1e-12) {
    for (auto& c : cumulative_) c = std::min(c, 1.0);
    for (auto it = cumulative_.rbegin(); it != cumulative_.rend() && *it >= total; ++it) *it = 1.0;
  }
  counts_.assign(probabilities_.size(), 0);
}

int RoutingStream::route() {
  ++departures_;
  int destination = kExit;
  if (!cumulative_.empty() && cumulative_.back() > 0.0) {
    const double u = uniformOpen(rng_);
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it != cumulative_.end()) {
      // Skip zero-width intervals; upper_bound already lands on the first
      // cumulative value strictly above u, which has positive width.
      destination = static_cast<int>(it - cumulative_.begin());
      ++counts_[static_cast<std::size_t>(destination)];
    }
  }
  if (record_) history_.push_back(destination);
  return destination;
}

GridPath centeredScaledPrimitive(const RenewalStream& stream, double n, double horizon, std::size_t intervals) {
  if (!(n >= 1.0)) throw ContractViolation("centeredScaledPrimitive: n must be >= 1");
  if (!stream.recordsHistory()) throw ContractViolation("centeredScaledPrimitive: stream does not record history");
  if (stream.realizedHorizon() <= n * horizon)
    throw ContractViolation("centeredScaledPrimitive: horizon exceeds the realized history of the stream");
  auto grid = uniformGrid(horizon, intervals);
  Eigen::MatrixXd values(static_cast<Eigen::Index>(grid.size()), 1);
  const auto epochs = stream.epochs();
  const double rate = 1.0 / stream.spec().mean;
  const double rootN = std::sqrt(n);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double internal = n * grid[k];
    const auto count = std::upper_bound(epochs.begin(), epochs.end(), internal) - epochs.begin();
    values(static_cast<Eigen::Index>(k), 0) = (static_cast<double>(count) - rate * internal) / rootN;
  }
  return GridPath(std::move(grid), std::move(values));
}

GridPath centeredScaledRouting(const RoutingStream& stream, double n, double horizon, std::size_t intervals) {
  if (!(n >= 1.0)) throw ContractViolation("centeredScaledRouting: n must be >= 1");
  if (!stream.recordsHistory()) throw ContractViolation("centeredScaledRouting: stream does not record history");
  const auto needed = static_cast<std::int64_t>(std::floor(n * horizon));
  if (stream.departures() < needed)
    throw ContractViolation("centeredScaledRouting: horizon exceeds the realized history of the stream");
  auto grid = uniformGrid(horizon, intervals);
  const auto p = stream.probabilities();
  const auto k = static_cast<Eigen::Index>(p.size());
  Eigen::MatrixXd values(static_cast<Eigen::Index>(grid.size()), k);
  const auto history = stream.history();
  std::vector<std::int64_t> counts(p.size(), 0);
  std::int64_t consumed = 0;
  const double rootN = std::sqrt(n);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const auto m = static_cast<std::int64_t>(std::floor(n * grid[g]));
    for (; consumed < m; ++consumed) {
      const int d = history[static_cast<std::size_t>(consumed)];
      if (d != kExit) ++counts[static_cast<std::size_t>(d)];
    }
    for (Eigen::Index j = 0; j < k; ++j)
      values(static_cast<Eigen::Index>(g), j) =
          (static_cast<double>(counts[static_cast<std::size_t>(j)]) - p[static_cast<std::size_t>(j)] * n * grid[g]) / rootN;
  }
  return GridPath(std::move(grid), std::move(values));
}

}  // namespace qnet
