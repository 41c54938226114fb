#pragma once

#include "qnet/error.hpp"
#include "qnet/grid_path.hpp"
#include "qnet/network_model.hpp"
#include "qnet/primitives.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace qnet {

enum class Engine { Direct, Uniformized };
std::string toString(Engine engine);

/// One network to simulate. Rate functions act as clock speeds for the
/// renewal primitives: A_i(t) = N^A_i(int_0^t lambda_i(Q(s)) ds) and
/// D_i(t) = N^D_i(int_0^t mu_i(Q(s)) 1{Q_i(s) > 0} ds). With unit-mean
/// primitives the speeds are the intensities.
struct SimConfig {
  NetworkTopology topology;
  EffectiveRates rates;
  std::vector<RenewalSpec> arrivalSpecs;  ///< ignored for stations outside the arrival set
  std::vector<RenewalSpec> serviceSpecs;
  std::vector<std::int64_t> initialQueue;
  double horizon = 1.0;
  std::uint64_t seed = 0;
  Engine engine = Engine::Direct;
  std::uint64_t maxEvents = 100'000'000;

  /// Throws ContractViolation on inconsistent sizes or values.
  void validate() const;
};

enum class EventType { Arrival, DepartureRouted, DepartureExit };
std::string toString(EventType type);

struct Event {
  EventType type;
  int station;
  int destination;  ///< kExit unless routed
};

/// Piecewise-constant network path on [0, T]. Snapshot 0 is the initial state
/// at time 0; snapshot k >= 1 is the state right after event k - 1. All
/// per-station quantities are stored flat with stride K and read through
/// spans.
///
/// `arrivalRate`/`serviceRate` at snapshot k are the intensities (speed over
/// primitive mean) in force on [t_k, t_{k+1}); `serviceRate` is mu_i(Q)
/// without the busy indicator. The compensators and the regulator are the
/// running integrals up to t_k.
class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(std::size_t stations, double horizon);

  std::size_t stations() const noexcept { return k_; }
  double horizon() const noexcept { return horizon_; }
  std::size_t snapshots() const noexcept { return times_.size(); }
  std::size_t eventCount() const noexcept { return events_.size(); }

  std::span<const double> times() const noexcept { return times_; }
  std::span<const Event> events() const noexcept { return events_; }
  /// Normalized (uniformized) time of each snapshot; empty for the direct engine.
  std::span<const double> normalizedTimes() const noexcept { return normalizedTimes_; }
  /// Uniformization factor theta(Q) in force after each snapshot; empty for
  /// the direct engine.
  std::span<const double> thetas() const noexcept { return thetas_; }
  /// Normalized time reached at the physical horizon (uniformized engine).
  double normalizedHorizon() const noexcept { return normalizedHorizon_; }

  std::span<const std::int64_t> queue(std::size_t k) const { return row(queue_, k); }
  std::span<const std::int64_t> arrivals(std::size_t k) const { return row(arrivals_, k); }
  std::span<const std::int64_t> internalArrivals(std::size_t k) const { return row(internal_, k); }
  std::span<const std::int64_t> departures(std::size_t k) const { return row(departures_, k); }
  std::span<const double> arrivalRate(std::size_t k) const { return row(arrivalRate_, k); }
  std::span<const double> serviceRate(std::size_t k) const { return row(serviceRate_, k); }
  std::span<const double> arrivalCompensator(std::size_t k) const { return row(arrivalComp_, k); }
  std::span<const double> serviceCompensator(std::size_t k) const { return row(serviceComp_, k); }
  std::span<const double> regulator(std::size_t k) const { return row(regulator_, k); }

  /// Index of the last snapshot at or before t.
  std::size_t snapshotAt(double t) const;
  /// Q(t) for t in [0, T].
  std::vector<std::int64_t> queueAt(double t) const;

  /// True when the run stopped at the explosion guard before the horizon.
  bool truncated() const noexcept { return truncated_; }

 private:
  friend class TrajectoryBuilder;

  template <class T>
  std::span<const T> row(const std::vector<T>& data, std::size_t k) const {
    return std::span<const T>(data).subspan(k * k_, k_);
  }

  std::size_t k_ = 0;
  double horizon_ = 0.0;
  bool truncated_ = false;
  double normalizedHorizon_ = 0.0;
  std::vector<double> times_;
  std::vector<double> normalizedTimes_;
  std::vector<double> thetas_;
  std::vector<Event> events_;
  std::vector<std::int64_t> queue_, arrivals_, internal_, departures_;
  std::vector<double> arrivalRate_, serviceRate_;
  std::vector<double> arrivalComp_, serviceComp_, regulator_;
};

/// Raised when a run reaches SimConfig::maxEvents before its horizon. Carries
/// the partial trajectory.
class ExplosionError : public Error {
 public:
  ExplosionError(const std::string& message, Trajectory partial)
      : Error(message), partial_(std::move(partial)) {}
  const Trajectory& partial() const noexcept { return partial_; }

 private:
  Trajectory partial_;
};

/// Event-driven solution of the network equations: between events all clock
/// speeds are constant, so the next event is the earliest time a primitive's
/// clock reaches its next renewal epoch. Simultaneous events fire departures
/// (ascending station) before arrivals (ascending station).
Trajectory simulateDirect(const SimConfig& config);

/// Uniformized construction: runs the normalized system with speeds
/// lambda/theta, mu/theta, theta(x) = 1 + sum_i (lambda_i(x) + mu_i(x)), in
/// normalized time and maps each jump back to physical time through the
/// piecewise-linear time change of slope theta.
Trajectory simulateUniformized(const SimConfig& config);

/// Dispatches on config.engine.
Trajectory simulate(const SimConfig& config);

/// Centered processes of a trajectory on a uniform grid of [0, T]:
///   M^A_i = A_i - int lambda_i(Q) ds
///   M^B_i = B_i - sum_j p_ji D_j
///   M^D_i = (D_i - C_i) - sum_j p_ji (D_j - C_j),  C_i = int mu_i(Q) 1{Q_i > 0} ds
///   M = M^A + M^B - M^D,  Y_i = int mu_i(Q) 1{Q_i = 0} ds
/// so that Q(t) = Q(0) + int a(Q) ds + M(t) + R Y(t), a = lambda - R mu.
struct TraceDecomposition {
  GridPath arrivalMartingale;
  GridPath routingMartingale;
  GridPath serviceMartingale;
  GridPath martingale;
  GridPath regulator;
  GridPath driftIntegral;
  GridPath queue;
};

TraceDecomposition decomposeTrace(const Trajectory& trajectory, const NetworkTopology& topology,
                                  std::size_t intervals);

enum class ScalingConvention { RateAbsorbed, Conventional };
std::string toString(ScalingConvention convention);
ScalingConvention conventionFromString(const std::string& name);

/// X^n on a uniform grid of [0, T]: Q(t)/sqrt(n) (rate-absorbed, trajectory
/// horizon >= T) or Q(nt)/sqrt(n) (conventional, trajectory horizon >= nT).
GridPath scaledQueuePath(const Trajectory& trajectory, double n, ScalingConvention convention, double horizon,
                         std::size_t intervals);

/// Per-event CSV: header "time,station,event,q1,...,qK", stations 1-based,
/// event in {ARRIVAL, DEPARTURE_ROUTED, DEPARTURE_EXIT}, times with 17
/// significant digits.
void writeTraceCsv(const Trajectory& trajectory, std::ostream& out);

/// Seeds of the primitive streams of a run.
std::uint64_t arrivalStreamSeed(std::uint64_t seed, std::size_t station);
std::uint64_t serviceStreamSeed(std::uint64_t seed, std::size_t station);
std::uint64_t routingStreamSeed(std::uint64_t seed, std::size_t station);

}  // namespace qnet
