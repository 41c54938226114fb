// Acceptance suite: one PASS/FAIL line per criterion. Run without arguments
// for all criteria, or pass criterion numbers to run a subset.

#include "qnet/config.hpp"
#include "qnet/harness.hpp"
#include "qnet/limit_diffusion.hpp"
#include "qnet/parallel.hpp"
#include "qnet/simulator.hpp"
#include "qnet/skorohod.hpp"
#include "qnet/stats.hpp"

#include "experiments.hpp"
#include "support.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>

#ifndef QNET_SOURCE_DIR
#error "QNET_SOURCE_DIR must point at the source tree"
#endif

using namespace qnet;
using nlohmann::json;
using testing::mat;

namespace {

// Tolerances and sizes pinned here; every criterion reads them from this block.
namespace pin {
constexpr double kSpResidual = 1e-9;
constexpr double kSpComplementarity = 1e-8;
constexpr double kSp1DMatch = 1e-12;
constexpr double kOracleTv = 0.02;
constexpr std::size_t kOracleReps = 100000;
constexpr std::size_t kEngineKsReps = 10000;
constexpr std::size_t kCtmcStates = 200;
constexpr double kMm1MeanTol = 0.03;
constexpr double kKsFactor = 1.5;
constexpr std::size_t kMm1Reps = 20000;
constexpr double kTandemFrobenius = 0.10;
constexpr std::size_t kTandemReps = 10000;
constexpr double kOuMeanTol = 0.05;
constexpr double kOuSelfConsistency = 0.02;
constexpr double kOuReferenceDt = 1e-5;
constexpr std::size_t kOuReps = 10000;
constexpr std::size_t kOuReferenceReps = 10000;
constexpr std::size_t kOuCoupledReps = 4000;
constexpr double kErlangMeanTol = 0.05;
constexpr double kLimitDt = 1e-4;
constexpr double kPrimitiveOracleTol = 0.10;
}  // namespace pin

struct Outcome {
  bool pass = true;
  std::string detail;
  double budgetSeconds = 0.0;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += "[failed: " + what + "] ";
    }
  }
  template <class... Args>
  void note(const char* fmt, Args... args) {
    char buffer[512];
    std::snprintf(buffer, sizeof buffer, fmt, args...);
    detail += buffer;
    detail += ' ';
  }
};

std::size_t threads() {
  if (const char* env = std::getenv("QNET_THREADS")) return static_cast<std::size_t>(std::atoi(env));
  return 0;
}

// ---------------------------------------------------------------------------
// 1. Skorohod correctness

Outcome skorohodCorrectness() {
  Outcome out;
  out.budgetSeconds = 60;
  const std::vector<Eigen::MatrixXd> topologies{
      mat({{0}}),
      mat({{0.5}}),
      mat({{0, 1}, {0, 0}}),
      mat({{0, 0.7}, {0.7, 0}}),
      mat({{0, 1, 0}, {0, 0, 1}, {0, 0, 0}}),
      mat({{0, 0.7, 0}, {0, 0, 0.7}, {0.7, 0, 0}}),
  };
  Rng rng(20240601);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worstResidual = 0, worstSlack = 0, worstDecrease = 0;
  std::size_t paths = 0;
  for (std::size_t trial = 0; trial < 1000; ++trial) {
    const auto& p = topologies[trial % topologies.size()];
    out.require(spectralRadius(p) <= 0.7 + 1e-12, "topology spectral radius");
    const auto k = p.rows();
    Eigen::VectorXd x0(k), drift(k);
    for (Eigen::Index i = 0; i < k; ++i) {
      x0(i) = u(rng) < 0.5 ? 0.0 : u(rng);
      drift(i) = -2.0 * u(rng);
    }
    const auto psi = testing::brownianPath(rng, x0, drift, 0.5 + u(rng), 1.0, 1024);
    const auto sol = solveSP(psi, p);
    ++paths;
    const Eigen::MatrixXd r = buildReflectionMatrix(p);
    worstResidual = std::max(worstResidual,
                             (sol.phi.values - psi.values - sol.eta.values * r.transpose()).cwiseAbs().maxCoeff());
    out.require(sol.eta.values.row(0).cwiseAbs().maxCoeff() == 0.0, "eta(0) = 0");
    out.require(sol.phi.values.minCoeff() >= 0.0, "phi in orthant");
    for (Eigen::Index i = 0; i < k; ++i) {
      double slack = 0;
      for (Eigen::Index s = 1; s < sol.eta.values.rows(); ++s) {
        const double d = sol.eta.values(s, i) - sol.eta.values(s - 1, i);
        worstDecrease = std::min(worstDecrease, d);
        if (sol.phi.values(s, i) > pin::kSpComplementarity) slack += d;
      }
      worstSlack = std::max(worstSlack, slack);
    }
  }
  out.require(worstResidual <= pin::kSpResidual, "residual");
  out.require(worstDecrease >= 0.0, "eta nondecreasing");
  out.require(worstSlack <= pin::kSpComplementarity, "complementarity");

  double worstMatch = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto psi = testing::brownianPath(rng, Eigen::Vector3d(0, 0.2, 0), Eigen::Vector3d(-1, -0.5, 0), 1.0, 1.0, 1024);
    const auto sol = solveSP(psi, Eigen::MatrixXd::Zero(3, 3));
    for (Eigen::Index i = 0; i < 3; ++i) {
      const auto ref = solveSP1D(GridPath(psi.times, psi.values.col(i)));
      worstMatch = std::max(worstMatch, (sol.phi.values.col(i) - ref.phi.values.col(0)).cwiseAbs().maxCoeff());
      worstMatch = std::max(worstMatch, (sol.eta.values.col(i) - ref.eta.values.col(0)).cwiseAbs().maxCoeff());
    }
  }
  out.require(worstMatch <= pin::kSp1DMatch, "P=0 matches 1-D");
  out.note("paths=%zu max|phi-psi-R eta|=%.2e min d_eta=%.1e max slack=%.2e P=0 vs 1-D=%.1e", paths, worstResidual,
           worstDecrease, worstSlack, worstMatch);
  return out;
}

// ---------------------------------------------------------------------------
// 2. Simulator exactness

Outcome simulatorExactness() {
  Outcome out;
  out.budgetSeconds = 60;
  const std::vector<Eigen::MatrixXd> topologies{mat({{0}}), mat({{0, 1}, {0, 0}}), mat({{0.1, 0.6}, {0.3, 0}}),
                                                mat({{0, 0.5, 0.2}, {0, 0, 0.8}, {0.4, 0, 0}})};
  const std::vector<RenewalSpec> laws{RenewalSpec::exponential(1.0), RenewalSpec::erlang(3, 0.8),
                                      RenewalSpec::uniform(0.2, 1.6), RenewalSpec::lognormal(1.2, 0.8)};
  std::size_t trajectories = 0, events = 0, violations = 0, complementarity = 0;
  std::uint64_t seed = 1;
  for (const auto& p : topologies) {
    const auto k = static_cast<std::size_t>(p.rows());
    RateVector lambda = zeroRates(k), mu;
    lambda[0] = RateFunction::affine(1.2, std::vector<double>(k, -0.05), 2.0);
    if (k > 1) lambda[1] = RateFunction::constant(0.3);
    for (std::size_t i = 0; i < k; ++i) {
      std::vector<double> w(k, 0.0);
      w[i] = 0.4;
      mu.push_back(RateFunction::affine(0.8, w, 2.5));
    }
    std::vector<std::size_t> arrivals{0};
    if (k > 1) arrivals.push_back(1);
    const NetworkTopology top(p, arrivals);
    for (auto engine : {Engine::Direct, Engine::Uniformized}) {
      for (const auto& law : laws) {
        for (int rep = 0; rep < 5; ++rep) {
          SimConfig c{top,
                      EffectiveRates::direct(lambda, mu),
                      std::vector<RenewalSpec>(k, law),
                      std::vector<RenewalSpec>(k, law),
                      std::vector<std::int64_t>(k, rep),
                      200.0,
                      ++seed,
                      engine};
          const auto tr = simulate(c);
          ++trajectories;
          events += tr.eventCount();
          std::vector<std::int64_t> routedIn(k, 0);
          const auto q0 = tr.queue(0);
          for (std::size_t s = 0; s < tr.snapshots(); ++s) {
            if (s > 0) {
              const auto& e = tr.events()[s - 1];
              if (e.type == EventType::DepartureRouted) ++routedIn[static_cast<std::size_t>(e.destination)];
            }
            for (std::size_t i = 0; i < k; ++i) {
              const auto q = tr.queue(s)[i];
              const bool conserved = q == q0[i] + tr.arrivals(s)[i] + tr.internalArrivals(s)[i] - tr.departures(s)[i];
              const bool routing = tr.internalArrivals(s)[i] == routedIn[i];
              violations += !(conserved && routing && q >= 0);
              if (s + 1 < tr.snapshots()) {
                const double dy = tr.regulator(s + 1)[i] - tr.regulator(s)[i];
                complementarity += dy < 0.0 || (q > 0 && dy != 0.0);
              }
            }
          }
        }
      }
    }
  }
  out.require(violations == 0, "flow conservation");
  out.require(complementarity == 0, "regulator complementarity");
  out.note("trajectories=%zu events=%zu conservation violations=%zu complementarity violations=%zu", trajectories,
           events, violations, complementarity);
  return out;
}

// ---------------------------------------------------------------------------
// 3. Oracle equivalence, Markovian case

Outcome markovOracle() {
  Outcome out;
  out.budgetSeconds = 300;
  // lambda = 1, mu(x) = min(2, 0.5 + 0.25 x) while busy
  const auto mu = RateFunction::affine(0.5, {0.25}, 2.0);
  const auto oracle = testing::birthDeathTransient(
      [](std::size_t) { return 1.0; }, [](std::size_t x) { return std::min(2.0, 0.5 + 0.25 * static_cast<double>(x)); },
      pin::kCtmcStates, 5.0);
  const NetworkTopology top(mat({{0}}), {0});
  auto draw = [&](Engine engine, std::size_t reps, std::uint64_t salt) {
    std::vector<double> q(reps);
    parallelFor(reps, threads(), [&](std::size_t r) {
      SimConfig c{top,
                  EffectiveRates::direct(constantRates({1.0}), {mu}),
                  {RenewalSpec::exponential(1.0)},
                  {RenewalSpec::exponential(1.0)},
                  {0},
                  5.0,
                  deriveSeed(salt, {r}),
                  engine};
      q[r] = static_cast<double>(simulate(c).queueAt(5.0)[0]);
    });
    return q;
  };
  auto tv = [&](const std::vector<double>& q) {
    std::vector<double> freq(pin::kCtmcStates + 1, 0.0);
    for (double x : q) {
      if (x > static_cast<double>(pin::kCtmcStates)) return 1.0;
      freq[static_cast<std::size_t>(x)] += 1.0 / static_cast<double>(q.size());
    }
    return totalVariation(freq, oracle);
  };
  const auto direct = draw(Engine::Direct, pin::kOracleReps, 31);
  const auto unif = draw(Engine::Uniformized, pin::kOracleReps, 32);
  const double tvDirect = tv(direct), tvUnif = tv(unif);
  out.require(tvDirect <= pin::kOracleTv, "direct TV");
  out.require(tvUnif <= pin::kOracleTv, "uniformized TV");
  const auto a = draw(Engine::Direct, pin::kEngineKsReps, 33);
  const auto b = draw(Engine::Uniformized, pin::kEngineKsReps, 34);
  const double ks = ksTwoSample(a, b);
  const double crit = ksCriticalValue(a.size(), b.size());
  out.require(ks < crit, "engine KS");
  out.note("TV(direct)=%.4f TV(uniformized)=%.4f tol=%.2f KS(engines)=%.4f crit=%.4f", tvDirect, tvUnif, pin::kOracleTv,
           ks, crit);
  return out;
}

// ---------------------------------------------------------------------------
// Sweeps for 4-7

json sweepConfig(json doc, std::size_t reps, std::vector<double> ns) {
  doc["scaling"]["n_values"] = ns;
  doc["experiment"]["replications"] = reps;
  doc["experiment"]["evaluation_times"] = {0.5, 1.0};
  doc["experiment"]["seed"] = 7919;
  doc["experiment"]["threads"] = threads();
  doc["experiment"]["limit"] = {{"dt", pin::kLimitDt}, {"replications", reps}};
  return doc;
}

// Mean, KS and monotonicity checks shared by the single-station criteria.
void checkSingleStation(Outcome& out, const ComparisonReport& report, double targetMean, double meanTol) {
  const auto& final = report.cell(1600, 1.0);
  const double rel = std::abs(final.stats.mean(0) - targetMean) / targetMean;
  out.require(rel <= meanTol, "mean");
  out.require(final.ks(0) <= pin::kKsFactor * final.ksCritical, "KS at n=1600");
  int inversions = 0;
  std::string trend;
  double previous = 2.0;
  for (double n : {100.0, 400.0, 1600.0}) {
    const double ks = report.cell(n, 1.0).ks(0);
    inversions += ks > previous;
    previous = ks;
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%s%.4f", trend.empty() ? "" : "/", ks);
    trend += buffer;
  }
  out.require(inversions <= 1, "KS trend");
  out.note("E X^1600(1)=%.4f target=%.4f rel.err=%.2f%% (tol %.0f%%) KS(1600)=%.4f <= %.1f x %.4f; KS(n=100/400/1600)=%s",
           final.stats.mean(0), targetMean, 100 * rel, 100 * meanTol, final.ks(0), pin::kKsFactor, final.ksCritical,
           trend.c_str());
}

Outcome heavyTrafficMM1() {
  Outcome out;
  out.budgetSeconds = 900;
  const auto experiment = prepareExperiment(parseConfig(sweepConfig(testing::singleStation(), pin::kMm1Reps, {100, 400, 1600})));
  out.require(std::abs(experiment.covariance.matrix(0, 0) - 2.0) < 1e-12, "A11 = 2");
  const auto report = runScalingSweep(experiment);
  checkSingleStation(out, report, 2.0 / std::sqrt(std::numbers::pi), pin::kMm1MeanTol);
  return out;
}

// Covariance of M(1) assembled from centered primitives simulated at scale n
// (unit rates and speeds): M = A + Phi_1(D_1 clock) - R D.
Eigen::MatrixXd tandemPrimitiveCovariance(double n, std::size_t reps) {
  Eigen::MatrixXd samples(static_cast<Eigen::Index>(reps), 2);
  const Eigen::MatrixXd r = mat({{1, 0}, {-1, 1}});
  for (std::size_t rep = 0; rep < reps; ++rep) {
    RenewalStream a(RenewalSpec::exponential(1.0), deriveSeed(11, {rep}), true);
    RenewalStream d1(RenewalSpec::exponential(1.0), deriveSeed(12, {rep}), true);
    RenewalStream d2(RenewalSpec::exponential(1.0), deriveSeed(13, {rep}), true);
    RoutingStream phi({0.0, 1.0}, deriveSeed(14, {rep}), true);
    for (auto* s : {&a, &d1, &d2}) s->nextCount(n + 100.0);
    for (int m = 0; m <= static_cast<int>(n); ++m) phi.route();
    Eigen::Vector2d d(centeredScaledPrimitive(d1, n, 1.0, 1).values(1, 0),
                      centeredScaledPrimitive(d2, n, 1.0, 1).values(1, 0));
    const auto routed = centeredScaledRouting(phi, n, 1.0, 1);
    Eigen::Vector2d m(centeredScaledPrimitive(a, n, 1.0, 1).values(1, 0) + routed.values(1, 0), routed.values(1, 1));
    m -= r * d;
    samples.row(static_cast<Eigen::Index>(rep)) = m.transpose();
  }
  return sampleCovariance(samples);
}

Outcome tandemNetwork() {
  Outcome out;
  out.budgetSeconds = 1200;
  const auto experiment = prepareExperiment(parseConfig(sweepConfig(testing::tandem(), pin::kTandemReps, {100, 400, 1600})));
  // The covariance used by the limit is checked against simulated primitives
  // before it is trusted.
  const Eigen::MatrixXd a = experiment.covariance.matrix;
  const Eigen::MatrixXd primitive = tandemPrimitiveCovariance(1e4, 4000);
  const double oracleErr = frobeniusRelativeError(primitive, a);
  out.require(oracleErr <= pin::kPrimitiveOracleTol, "A vs primitive oracle");
  out.require((a - mat({{2, -1}, {-1, 2}})).cwiseAbs().maxCoeff() < 1e-12, "frozen A");

  const auto report = runScalingSweep(experiment);
  std::string trend;
  double err1600 = 1.0;
  for (double n : {100.0, 400.0, 1600.0}) {
    const auto& cell = report.cell(n, 1.0);
    const double err = frobeniusRelativeError(cell.stats.covariance, report.limit.stats[1].covariance);
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%s%.3f", trend.empty() ? "" : "/", err);
    trend += buffer;
    if (n == 1600.0) err1600 = err;
  }
  out.require(err1600 <= pin::kTandemFrobenius, "covariance at n=1600");
  const auto& c = report.cell(1600, 1.0).stats.covariance;
  const auto& l = report.limit.stats[1].covariance;
  out.note("A=[[%.0f,%.0f],[%.0f,%.0f]] primitive-oracle err=%.3f; Cov X^1600(1)=[[%.3f,%.3f],[%.3f,%.3f]] "
           "RBM=[[%.3f,%.3f],[%.3f,%.3f]] Frobenius rel.err=%.3f (tol %.2f); err(n=100/400/1600)=%s",
           a(0, 0), a(0, 1), a(1, 0), a(1, 1), oracleErr, c(0, 0), c(0, 1), c(1, 0), c(1, 1), l(0, 0), l(0, 1), l(1, 0),
           l(1, 1), err1600, pin::kTandemFrobenius, trend.c_str());
  return out;
}

// Reflected Euler for K = 1 on a shared Brownian path: steps h and 2h.
std::pair<double, double> coupledEuler(const std::function<double(double)>& drift, double variance, double h,
                                       std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> z;
  const auto steps = static_cast<std::size_t>(std::llround(1.0 / h));
  const double sd = std::sqrt(variance * h);
  double fine = 0.0, coarse = 0.0, pending = 0.0;
  for (std::size_t s = 1; s <= steps; ++s) {
    const double dw = sd * z(rng);
    fine = std::max(0.0, fine + drift(fine) * h + dw);
    pending += dw;
    if (s % 2 == 0) {
      coarse = std::max(0.0, coarse + drift(coarse) * 2 * h + pending);
      pending = 0.0;
    }
  }
  return {fine, coarse};
}

Outcome stateDependentDrift() {
  Outcome out;
  out.budgetSeconds = 900;
  json doc = testing::singleStation();
  doc["rates"]["lambda2"] = {0.0};
  doc["rates"]["mu2"] = {{{"kind", "affine"}, {"intercept", 0.0}, {"weights", {1.0}}}};
  const auto experiment = prepareExperiment(parseConfig(sweepConfig(doc, pin::kOuReps, {100, 400, 1600})));
  for (double x : {0.0, 0.7, 3.0})
    out.require(std::abs(experiment.drift(Eigen::VectorXd::Constant(1, x))(0) + x) < 1e-12, "drift -x");

  // reference E X(1) from the library integrator at the fine step
  std::vector<double> ref(pin::kOuReferenceReps);
  parallelFor(ref.size(), threads(), [&](std::size_t r) {
    ref[r] = sampleReflectedDiffusion(experiment.limit, {1.0}, pin::kOuReferenceDt, deriveSeed(555, {r}))(0, 0);
  });
  double reference = 0;
  for (double v : ref) reference += v / static_cast<double>(ref.size());

  // self-consistency between dt and dt/2 on common noise
  std::vector<std::pair<double, double>> pairs(pin::kOuCoupledReps);
  const double a11 = experiment.covariance.matrix(0, 0);
  parallelFor(pairs.size(), threads(), [&](std::size_t r) {
    pairs[r] = coupledEuler([](double x) { return -x; }, a11, pin::kOuReferenceDt / 2, deriveSeed(556, {r}));
  });
  double half = 0, full = 0;
  for (const auto& [f, c] : pairs) {
    half += f / static_cast<double>(pairs.size());
    full += c / static_cast<double>(pairs.size());
  }
  const double selfRel = std::abs(full - half) / half;
  out.require(selfRel <= pin::kOuSelfConsistency, "dt vs dt/2");

  const auto report = runScalingSweep(experiment);
  const auto& cell = report.cell(1600, 1.0);
  const double rel = std::abs(cell.stats.mean(0) - reference) / reference;
  out.require(rel <= pin::kOuMeanTol, "mean vs reference");
  out.note("E X^1600(1)=%.4f reference E X(1)=%.4f (dt=%.0e, %zu paths) rel.err=%.2f%% (tol %.0f%%); "
           "dt vs dt/2 rel.diff=%.3f%% (tol %.0f%%); KS(1600)=%.4f crit=%.4f",
           cell.stats.mean(0), reference, pin::kOuReferenceDt, ref.size(), 100 * rel, 100 * pin::kOuMeanTol,
           100 * selfRel, 100 * pin::kOuSelfConsistency, cell.ks(0), cell.ksCritical);
  return out;
}

Outcome erlangService() {
  Outcome out;
  out.budgetSeconds = 900;
  const json services = {{"distribution", "erlang"}, {"phases", 2}, {"mean", 1.0}};
  const auto experiment =
      prepareExperiment(parseConfig(sweepConfig(testing::singleStation(services), pin::kMm1Reps, {100, 400, 1600})));
  // arrivals: lambda = 1, a = 1; service: mu = 1, s = Var(Erlang-2, mean 1) = 1/2
  const double a11 = 1.0 * 1.0 * 1.0 + 1.0 * 1.0 * 0.5;
  out.require(std::abs(experiment.covariance.matrix(0, 0) - a11) < 1e-12, "A11 = 1.5");
  const auto report = runScalingSweep(experiment);
  checkSingleStation(out, report, std::sqrt(a11) * std::sqrt(2.0 / std::numbers::pi), pin::kErlangMeanTol);
  out.note("A11=%.3f", experiment.covariance.matrix(0, 0));
  return out;
}

// ---------------------------------------------------------------------------
// 8. Determinism and validation

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinismAndValidation() {
  Outcome out;
  out.budgetSeconds = 120;
  const std::filesystem::path source = QNET_SOURCE_DIR;
  const auto base = std::filesystem::temp_directory_path() / "qnet_acceptance_determinism";
  std::filesystem::remove_all(base);
  std::size_t files = 0;
  for (const char* name : {"tandem.json", "feedback_general.json", "reflected_ou.json"}) {
    json doc = json::parse(std::ifstream(source / "configs" / name));
    doc["experiment"]["replications"] = 200;
    doc["output"]["plot_paths"] = 2;
    doc["output"]["grid_points"] = 64;
    // runs 0 and 1 share every setting; run 2 changes only the thread count
    for (int run = 0; run < 3; ++run) {
      doc["experiment"]["threads"] = run < 2 ? 1 : 4;
      const auto dir = base / (std::string(name) + std::to_string(run));
      emitReport(runScalingSweep(prepareExperiment(parseConfig(doc))), dir);
      if (run == 0)
        for ([[maybe_unused]] const auto& entry : std::filesystem::directory_iterator(dir)) ++files;
    }
    auto same = [&](int a, int b, const std::string& file) {
      return slurp(base / (std::string(name) + std::to_string(a)) / file) ==
             slurp(base / (std::string(name) + std::to_string(b)) / file);
    };
    for (const auto& entry : std::filesystem::directory_iterator(base / (std::string(name) + "0"))) {
      const auto file = entry.path().filename().string();
      out.require(same(0, 1, file), std::string("rerun ") + name + "/" + file);
      if (file != "manifest.json") out.require(same(0, 2, file), std::string("threads ") + name + "/" + file);
    }
  }

  const std::map<std::string, std::string> expected{
      {"substochasticity.json", "substochasticity"}, {"a1_spectral_radius.json", "(A1)"},
      {"a3_balance.json", "(A3)"},                   {"a2_growth.json", "(A2)"},
      {"a4_lipschitz.json", "(A4)"},
  };
  std::size_t rejected = 0;
  for (const auto& [file, label] : expected) {
    const auto result = validateConfig(loadConfig(source / "configs" / "negative" / file));
    bool found = false;
    for (const auto& v : result.violations) found |= v.condition == label;
    out.require(!result.ok() && found, file + " -> " + label);
    rejected += found;
    try {
      prepareExperiment(loadConfig(source / "configs" / "negative" / file));
      out.require(false, file + " prepared");
    } catch (const InvalidConfig&) {
    }
  }
  out.note("%zu output files byte-identical across reruns (results and paths also across thread counts); negative "
           "suite %zu/%zu rejected with the expected label",
           files, rejected, expected.size());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"Skorohod correctness", skorohodCorrectness},
      {"Simulator exactness", simulatorExactness},
      {"Oracle equivalence (Markovian)", markovOracle},
      {"Heavy-traffic M/M/1", heavyTrafficMM1},
      {"Tandem network covariance", tandemNetwork},
      {"State-dependent drift", stateDependentDrift},
      {"Non-exponential inputs", erlangService},
      {"Determinism and validation", determinismAndValidation},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  if (selected.empty())
    for (int i = 1; i <= static_cast<int>(criteria.size()); ++i) selected.push_back(i);

  int failures = 0;
  for (int id : selected) {
    if (id < 1 || id > static_cast<int>(criteria.size())) {
      std::printf("unknown criterion %d\n", id);
      return 2;
    }
    const auto& [name, run] = criteria[static_cast<std::size_t>(id - 1)];
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = run();
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.detail = std::string("exception: ") + e.what();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (outcome.budgetSeconds > 0 && seconds > outcome.budgetSeconds) outcome.require(false, "runtime budget");
    std::printf("%s %d %s: %s(%.1f s, budget %.0f s)\n", outcome.pass ? "PASS" : "FAIL", id, name,
                outcome.detail.c_str(), seconds, outcome.budgetSeconds);
    std::fflush(stdout);
    failures += !outcome.pass;
  }
  return failures == 0 ? 0 : 1;
}
