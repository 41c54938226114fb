#include "qnet/simulator.hpp"

#include "qnet/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace qnet {

std::string toString(Engine engine) { return engine == Engine::Direct ? "direct" : "uniformized"; }

std::string toString(EventType type) {
  switch (type) {
    case EventType::Arrival: return "ARRIVAL";
    case EventType::DepartureRouted: return "DEPARTURE_ROUTED";
    case EventType::DepartureExit: return "DEPARTURE_EXIT";
  }
  return "UNKNOWN";
}

std::string toString(ScalingConvention convention) {
  return convention == ScalingConvention::RateAbsorbed ? "rate-absorbed" : "conventional";
}

ScalingConvention conventionFromString(const std::string& name) {
  if (name == "rate-absorbed") return ScalingConvention::RateAbsorbed;
  if (name == "conventional") return ScalingConvention::Conventional;
  throw ContractViolation("unknown scaling convention '" + name + "'");
}

std::uint64_t arrivalStreamSeed(std::uint64_t seed, std::size_t station) { return deriveSeed(seed, {1, station}); }
std::uint64_t serviceStreamSeed(std::uint64_t seed, std::size_t station) { return deriveSeed(seed, {2, station}); }
std::uint64_t routingStreamSeed(std::uint64_t seed, std::size_t station) { return deriveSeed(seed, {3, station}); }

void SimConfig::validate() const {
  const auto k = topology.stations();
  if (k == 0) throw ContractViolation("SimConfig: empty topology");
  if (rates.stations() != k) throw ContractViolation("SimConfig: rate vectors do not match the station count");
  if (arrivalSpecs.size() != k || serviceSpecs.size() != k)
    throw ContractViolation("SimConfig: need one arrival and one service spec per station");
  if (initialQueue.size() != k) throw ContractViolation("SimConfig: initial queue has wrong length");
  for (auto q : initialQueue)
    if (q < 0) throw ContractViolation("SimConfig: initial queue must be nonnegative");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ContractViolation("SimConfig: horizon must be finite and > 0");
  for (std::size_t i = 0; i < k; ++i) {
    if (topology.hasArrivals(i)) arrivalSpecs[i].validate();
    serviceSpecs[i].validate();
  }
}

Trajectory::Trajectory(std::size_t stations, double horizon) : k_(stations), horizon_(horizon) {}

std::size_t Trajectory::snapshotAt(double t) const {
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  return it == times_.begin() ? 0 : static_cast<std::size_t>(it - times_.begin()) - 1;
}

std::vector<std::int64_t> Trajectory::queueAt(double t) const {
  const auto q = queue(snapshotAt(t));
  return {q.begin(), q.end()};
}

/// Owns the mutable state of one run and appends snapshots to a Trajectory.
class TrajectoryBuilder {
 public:
  TrajectoryBuilder(const SimConfig& config, bool uniformized)
      : config_(config), k_(config.topology.stations()), traj_(k_, config.horizon), uniformized_(uniformized) {
    config.validate();
    const auto& routing = config.topology.routing();
    for (std::size_t i = 0; i < k_; ++i) {
      const RenewalSpec arrivalSpec =
          config.topology.hasArrivals(i) ? config.arrivalSpecs[i] : RenewalSpec::deterministic(1.0);
      arrivalStreams_.emplace_back(arrivalSpec, arrivalStreamSeed(config.seed, i));
      serviceStreams_.emplace_back(config.serviceSpecs[i], serviceStreamSeed(config.seed, i));
      std::vector<double> row(k_);
      for (std::size_t j = 0; j < k_; ++j) row[j] = routing(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      routingStreams_.emplace_back(std::move(row), routingStreamSeed(config.seed, i));
      arrivalMean_.push_back(arrivalSpec.mean);
      serviceMean_.push_back(config.serviceSpecs[i].mean);
    }
    q_ = config.initialQueue;
    a_.assign(k_, 0);
    b_.assign(k_, 0);
    d_.assign(k_, 0);
    arrivalClock_.assign(k_, 0.0);
    serviceClock_.assign(k_, 0.0);
    arrivalSpeed_.assign(k_, 0.0);
    serviceSpeed_.assign(k_, 0.0);
    arrivalComp_.assign(k_, 0.0);
    serviceComp_.assign(k_, 0.0);
    regulator_.assign(k_, 0.0);
    x_.assign(k_, 0.0);
    pushSnapshot(0.0);
  }

  std::size_t stations() const { return k_; }
  std::vector<RenewalStream>& arrivalStreams() { return arrivalStreams_; }
  std::vector<RenewalStream>& serviceStreams() { return serviceStreams_; }
  std::vector<double>& arrivalClock() { return arrivalClock_; }
  std::vector<double>& serviceClock() { return serviceClock_; }
  const std::vector<double>& arrivalSpeed() const { return arrivalSpeed_; }
  const std::vector<double>& serviceSpeed() const { return serviceSpeed_; }
  /// Service clock speed including the busy indicator.
  double busySpeed(std::size_t i) const { return q_[i] > 0 ? serviceSpeed_[i] : 0.0; }
  double theta() const { return theta_; }

  /// Accumulates compensators and regulator over a stretch during which the
  /// current intensities are in force for `weight` units of physical time.
  void integrate(double weight) {
    for (std::size_t i = 0; i < k_; ++i) {
      arrivalComp_[i] += weight * arrivalSpeed_[i] / arrivalMean_[i];
      const double service = weight * serviceSpeed_[i] / serviceMean_[i];
      if (q_[i] > 0)
        serviceComp_[i] += service;
      else
        regulator_[i] += service;
    }
  }

  void fireDeparture(std::size_t i, double time) {
    serviceStreams_[i].advance();
    --q_[i];
    ++d_[i];
    const int destination = routingStreams_[i].route();
    if (destination == kExit) {
      traj_.events_.push_back({EventType::DepartureExit, static_cast<int>(i), kExit});
    } else {
      ++q_[static_cast<std::size_t>(destination)];
      ++b_[static_cast<std::size_t>(destination)];
      traj_.events_.push_back({EventType::DepartureRouted, static_cast<int>(i), destination});
    }
    afterEvent(time);
  }

  void fireArrival(std::size_t i, double time) {
    arrivalStreams_[i].advance();
    ++q_[i];
    ++a_[i];
    traj_.events_.push_back({EventType::Arrival, static_cast<int>(i), kExit});
    afterEvent(time);
  }

  void setNormalizedTime(double s) { normalizedTime_ = s; }

  Trajectory finish(double normalizedHorizon) {
    traj_.normalizedHorizon_ = normalizedHorizon;
    return std::move(traj_);
  }

 private:
  void afterEvent(double time) {
    pushSnapshot(time);
    if (traj_.events_.size() >= config_.maxEvents && time < config_.horizon) {
      traj_.truncated_ = true;
      throw ExplosionError("event cap of " + std::to_string(config_.maxEvents) +
                               " reached at time " + std::to_string(time) + " before the horizon",
                           std::move(traj_));
    }
  }

  void pushSnapshot(double time) {
    for (std::size_t i = 0; i < k_; ++i) x_[i] = static_cast<double>(q_[i]);
    theta_ = 1.0;
    for (std::size_t i = 0; i < k_; ++i) {
      arrivalSpeed_[i] = config_.topology.hasArrivals(i) ? config_.rates.arrival(i, x_) : 0.0;
      serviceSpeed_[i] = config_.rates.service(i, x_);
      if (arrivalSpeed_[i] < 0.0 || serviceSpeed_[i] < 0.0 || !std::isfinite(arrivalSpeed_[i]) ||
          !std::isfinite(serviceSpeed_[i]))
        throw ContractViolation("simulate: rate functions must be finite and nonnegative");
      theta_ += arrivalSpeed_[i] + serviceSpeed_[i];
    }
    traj_.times_.push_back(time);
    if (uniformized_) {
      traj_.normalizedTimes_.push_back(normalizedTime_);
      traj_.thetas_.push_back(theta_);
    }
    traj_.queue_.insert(traj_.queue_.end(), q_.begin(), q_.end());
    traj_.arrivals_.insert(traj_.arrivals_.end(), a_.begin(), a_.end());
    traj_.internal_.insert(traj_.internal_.end(), b_.begin(), b_.end());
    traj_.departures_.insert(traj_.departures_.end(), d_.begin(), d_.end());
    for (std::size_t i = 0; i < k_; ++i) {
      traj_.arrivalRate_.push_back(arrivalSpeed_[i] / arrivalMean_[i]);
      traj_.serviceRate_.push_back(serviceSpeed_[i] / serviceMean_[i]);
    }
    traj_.arrivalComp_.insert(traj_.arrivalComp_.end(), arrivalComp_.begin(), arrivalComp_.end());
    traj_.serviceComp_.insert(traj_.serviceComp_.end(), serviceComp_.begin(), serviceComp_.end());
    traj_.regulator_.insert(traj_.regulator_.end(), regulator_.begin(), regulator_.end());
  }

  const SimConfig& config_;
  std::size_t k_;
  Trajectory traj_;
  bool uniformized_;
  std::vector<RenewalStream> arrivalStreams_, serviceStreams_;
  std::vector<RoutingStream> routingStreams_;
  std::vector<double> arrivalMean_, serviceMean_;
  std::vector<std::int64_t> q_, a_, b_, d_;
  std::vector<double> arrivalClock_, serviceClock_;
  std::vector<double> arrivalSpeed_, serviceSpeed_;
  std::vector<double> arrivalComp_, serviceComp_, regulator_;
  std::vector<double> x_;
  double theta_ = 1.0;
  double normalizedTime_ = 0.0;
};

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Streams whose clock reaches its next epoch first, fired in the order
// departures by station, then arrivals by station.
struct Firing {
  std::vector<std::size_t> departures;
  std::vector<std::size_t> arrivals;
  void clear() {
    departures.clear();
    arrivals.clear();
  }
};

double waitFor(double epoch, double clock, double speed) {
  return speed > 0.0 ? std::max(0.0, epoch - clock) / speed : kInf;
}

}  // namespace

Trajectory simulateDirect(const SimConfig& config) {
  TrajectoryBuilder b(config, false);
  const std::size_t k = b.stations();
  auto& arrivalClock = b.arrivalClock();
  auto& serviceClock = b.serviceClock();
  std::vector<double> waitA(k), waitD(k);
  Firing firing;
  double t = 0.0;
  for (;;) {
    double next = kInf;
    for (std::size_t i = 0; i < k; ++i) {
      waitA[i] = waitFor(b.arrivalStreams()[i].nextEpoch(), arrivalClock[i], b.arrivalSpeed()[i]);
      waitD[i] = waitFor(b.serviceStreams()[i].nextEpoch(), serviceClock[i], b.busySpeed(i));
      next = std::min({next, waitA[i], waitD[i]});
    }
    if (next == kInf || t + next > config.horizon) {
      const double rest = config.horizon - t;
      for (std::size_t i = 0; i < k; ++i) {
        arrivalClock[i] += b.arrivalSpeed()[i] * rest;
        serviceClock[i] += b.busySpeed(i) * rest;
      }
      b.integrate(rest);
      break;
    }
    firing.clear();
    for (std::size_t i = 0; i < k; ++i) {
      if (waitD[i] == next) {
        firing.departures.push_back(i);
        serviceClock[i] = b.serviceStreams()[i].nextEpoch();
      } else {
        serviceClock[i] += b.busySpeed(i) * next;
      }
      if (waitA[i] == next) {
        firing.arrivals.push_back(i);
        arrivalClock[i] = b.arrivalStreams()[i].nextEpoch();
      } else {
        arrivalClock[i] += b.arrivalSpeed()[i] * next;
      }
    }
    b.integrate(next);
    t += next;
    for (auto i : firing.departures) b.fireDeparture(i, t);
    for (auto i : firing.arrivals) b.fireArrival(i, t);
  }
  return b.finish(0.0);
}

Trajectory simulateUniformized(const SimConfig& config) {
  TrajectoryBuilder b(config, true);
  const std::size_t k = b.stations();
  auto& arrivalClock = b.arrivalClock();
  auto& serviceClock = b.serviceClock();
  std::vector<double> waitA(k), waitD(k);
  Firing firing;
  double s = 0.0;  // normalized time
  double t = 0.0;  // physical time
  for (;;) {
    const double theta = b.theta();
    // Normalized speeds are all bounded by 1.
    double next = kInf;
    for (std::size_t i = 0; i < k; ++i) {
      waitA[i] = waitFor(b.arrivalStreams()[i].nextEpoch(), arrivalClock[i], b.arrivalSpeed()[i] / theta);
      waitD[i] = waitFor(b.serviceStreams()[i].nextEpoch(), serviceClock[i], b.busySpeed(i) / theta);
      next = std::min({next, waitA[i], waitD[i]});
    }
    // Physical duration of a normalized stretch ds is ds / theta.
    if (next == kInf || t + next / theta > config.horizon) {
      const double rest = (config.horizon - t) * theta;
      for (std::size_t i = 0; i < k; ++i) {
        arrivalClock[i] += b.arrivalSpeed()[i] / theta * rest;
        serviceClock[i] += b.busySpeed(i) / theta * rest;
      }
      b.integrate(rest / theta);
      s += rest;
      break;
    }
    firing.clear();
    for (std::size_t i = 0; i < k; ++i) {
      if (waitD[i] == next) {
        firing.departures.push_back(i);
        serviceClock[i] = b.serviceStreams()[i].nextEpoch();
      } else {
        serviceClock[i] += b.busySpeed(i) / theta * next;
      }
      if (waitA[i] == next) {
        firing.arrivals.push_back(i);
        arrivalClock[i] = b.arrivalStreams()[i].nextEpoch();
      } else {
        arrivalClock[i] += b.arrivalSpeed()[i] / theta * next;
      }
    }
    b.integrate(next / theta);
    s += next;
    t += next / theta;
    b.setNormalizedTime(s);
    for (auto i : firing.departures) b.fireDeparture(i, t);
    for (auto i : firing.arrivals) b.fireArrival(i, t);
  }
  return b.finish(s);
}

Trajectory simulate(const SimConfig& config) {
  return config.engine == Engine::Direct ? simulateDirect(config) : simulateUniformized(config);
}

TraceDecomposition decomposeTrace(const Trajectory& traj, const NetworkTopology& topology, std::size_t intervals) {
  if (traj.truncated()) throw ContractViolation("decomposeTrace: trajectory is incomplete");
  const auto k = static_cast<Eigen::Index>(traj.stations());
  if (static_cast<Eigen::Index>(topology.stations()) != k) throw ContractViolation("decomposeTrace: topology mismatch");
  const auto grid = uniformGrid(traj.horizon(), intervals);
  const auto rows = static_cast<Eigen::Index>(grid.size());
  const Eigen::MatrixXd& p = topology.routing();
  const Eigen::MatrixXd& r = topology.reflection();

  Eigen::MatrixXd ma(rows, k), mb(rows, k), md(rows, k), m(rows, k), y(rows, k), drift(rows, k), queue(rows, k);
  Eigen::VectorXd lam(k), busy(k), reg(k), dTilde(k), dep(k);
  for (Eigen::Index g = 0; g < rows; ++g) {
    const double t = grid[static_cast<std::size_t>(g)];
    const auto s = traj.snapshotAt(t);
    const double dt = t - traj.times()[s];
    const auto q = traj.queue(s);
    for (Eigen::Index i = 0; i < k; ++i) {
      const auto ii = static_cast<std::size_t>(i);
      lam(i) = traj.arrivalCompensator(s)[ii] + traj.arrivalRate(s)[ii] * dt;
      const double service = traj.serviceRate(s)[ii] * dt;
      busy(i) = traj.serviceCompensator(s)[ii] + (q[ii] > 0 ? service : 0.0);
      reg(i) = traj.regulator(s)[ii] + (q[ii] > 0 ? 0.0 : service);
      dep(i) = static_cast<double>(traj.departures(s)[ii]);
      dTilde(i) = dep(i) - busy(i);
      queue(g, i) = static_cast<double>(q[ii]);
    }
    const Eigen::VectorXd routedIn = p.transpose() * dep;
    const Eigen::VectorXd routedTilde = p.transpose() * dTilde;
    for (Eigen::Index i = 0; i < k; ++i) {
      const auto ii = static_cast<std::size_t>(i);
      ma(g, i) = static_cast<double>(traj.arrivals(s)[ii]) - lam(i);
      mb(g, i) = static_cast<double>(traj.internalArrivals(s)[ii]) - routedIn(i);
      md(g, i) = dTilde(i) - routedTilde(i);
      m(g, i) = ma(g, i) + mb(g, i) - md(g, i);
      y(g, i) = reg(i);
    }
    drift.row(g) = (lam - r * (busy + reg)).transpose();
  }
  return {GridPath(grid, ma), GridPath(grid, mb), GridPath(grid, md), GridPath(grid, m),
          GridPath(grid, y),  GridPath(grid, drift), GridPath(grid, queue)};
}

GridPath scaledQueuePath(const Trajectory& traj, double n, ScalingConvention convention, double horizon,
                         std::size_t intervals) {
  if (!(n >= 1.0)) throw ContractViolation("scaledQueuePath: n must be >= 1");
  const double timeScale = convention == ScalingConvention::Conventional ? n : 1.0;
  if (traj.horizon() < timeScale * horizon * (1.0 - 1e-12))
    throw ContractViolation("scaledQueuePath: trajectory horizon shorter than the requested scaled horizon");
  const auto grid = uniformGrid(horizon, intervals);
  const auto k = static_cast<Eigen::Index>(traj.stations());
  Eigen::MatrixXd values(static_cast<Eigen::Index>(grid.size()), k);
  const double rootN = std::sqrt(n);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const auto q = traj.queue(traj.snapshotAt(std::min(timeScale * grid[g], traj.horizon())));
    for (Eigen::Index i = 0; i < k; ++i)
      values(static_cast<Eigen::Index>(g), i) = static_cast<double>(q[static_cast<std::size_t>(i)]) / rootN;
  }
  return GridPath(grid, std::move(values));
}

void writeTraceCsv(const Trajectory& traj, std::ostream& out) {
  out << "time,station,event";
  for (std::size_t i = 0; i < traj.stations(); ++i) out << ",q" << i + 1;
  out << '\n';
  char buffer[40];
  for (std::size_t e = 0; e < traj.eventCount(); ++e) {
    const auto& ev = traj.events()[e];
    std::snprintf(buffer, sizeof buffer, "%.17g", traj.times()[e + 1]);
    out << buffer << ',' << ev.station + 1 << ',' << toString(ev.type);
    for (auto q : traj.queue(e + 1)) out << ',' << q;
    out << '\n';
  }
}

}  // namespace qnet
