#pragma once

#include "qnet/grid_path.hpp"
#include "qnet/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace qnet {

enum class Distribution { Exponential, Erlang, Uniform, Lognormal, Deterministic };

std::string toString(Distribution d);
Distribution distributionFromString(const std::string& name);

/// Interarrival (or service requirement) law of a renewal process. All
/// supported families have finite moments of every order.
///
/// Lognormal is parametrised by its mean and the standard deviation `sigma`
/// of the underlying normal; sigma is restricted to (0, 2].
struct RenewalSpec {
  Distribution distribution = Distribution::Exponential;
  double mean = 1.0;
  int shape = 1;        ///< Erlang phases
  double lower = 0.0;   ///< Uniform support
  double upper = 0.0;
  double sigma = 0.0;   ///< Lognormal log-scale sd

  static RenewalSpec exponential(double mean);
  static RenewalSpec erlang(int phases, double mean);
  static RenewalSpec uniform(double lower, double upper);
  static RenewalSpec lognormal(double mean, double sigma);
  static RenewalSpec deterministic(double gap);

  double variance() const;
  /// Squared coefficient of variation, variance / mean^2.
  double scv() const { return variance() / (mean * mean); }

  /// Throws ContractViolation on invalid parameters.
  void validate() const;

  /// One gap; strictly positive (zero draws are redrawn).
  double draw(Rng& rng) const;
};

/// A renewal counting process N(t) = #{k : S_k <= t}, generated lazily from
/// a seeded stream of gaps. N is right-continuous with N(0) = 0.
class RenewalStream {
 public:
  RenewalStream(RenewalSpec spec, std::uint64_t seed, bool recordHistory = false);

  /// Epoch S_{N+1} of the next renewal not yet consumed.
  double nextEpoch() const noexcept { return nextEpoch_; }
  /// Renewals consumed so far.
  std::int64_t count() const noexcept { return count_; }
  /// Consumes the next renewal.
  void advance();

  /// N(t) for monotone queries t; consumes every renewal at or before t.
  /// Throws ContractViolation when t is smaller than a previous query.
  std::int64_t nextCount(double internalTime);

  /// Internal time up to which N is known: the stream has drawn every epoch
  /// up to and including the first one after this time.
  double realizedHorizon() const noexcept { return nextEpoch_; }

  bool recordsHistory() const noexcept { return record_; }
  /// Consumed epochs S_1 <= ... <= S_N (only when recording).
  std::span<const double> epochs() const noexcept { return epochs_; }

  const RenewalSpec& spec() const noexcept { return spec_; }

 private:
  RenewalSpec spec_;
  Rng rng_;
  bool record_;
  double nextEpoch_ = 0.0;
  double lastQuery_ = 0.0;
  std::int64_t count_ = 0;
  std::vector<double> epochs_;
};

/// Returned by RoutingStream::route for a departure that leaves the network.
inline constexpr int kExit = -1;

/// Routing decisions of one station: each departure goes to station j with
/// probability p_j or exits with the residual mass. One uniform per departure
/// is mapped to the intervals [0,p_1), [p_1, p_1+p_2), ...
class RoutingStream {
 public:
  RoutingStream(std::vector<double> probabilities, std::uint64_t seed, bool recordHistory = false);

  /// Consumes one departure; returns a station index or kExit.
  int route();

  std::int64_t departures() const noexcept { return departures_; }
  /// Phi_j(m) after m = departures() departures.
  std::span<const std::int64_t> counts() const noexcept { return counts_; }
  std::span<const double> probabilities() const noexcept { return probabilities_; }
  /// Destination of every consumed departure (only when recording).
  std::span<const int> history() const noexcept { return history_; }
  bool recordsHistory() const noexcept { return record_; }

 private:
  std::vector<double> probabilities_;
  std::vector<double> cumulative_;
  std::vector<std::int64_t> counts_;
  std::vector<int> history_;
  Rng rng_;
  bool record_;
  std::int64_t departures_ = 0;
};

/// t -> (N(nt) - nt/mean) / sqrt(n) on a uniform grid of [0, T]. The stream
/// must record history and be realized beyond internal time nT.
GridPath centeredScaledPrimitive(const RenewalStream& stream, double n, double horizon, std::size_t intervals);

/// t -> (Phi(floor(nt)) - p nt) / sqrt(n) on a uniform grid of [0, T]. The
/// stream must record history and have consumed at least floor(nT) departures.
GridPath centeredScaledRouting(const RoutingStream& stream, double n, double horizon, std::size_t intervals);

}  // namespace qnet
