#include "qnet/harness.hpp"

#include "qnet/parallel.hpp"
#include "qnet/stats.hpp"
#include "qnet/version.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>

namespace qnet {

using nlohmann::json;

namespace {

json toJson(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json toJson(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(toJson(Eigen::VectorXd(m.row(i).transpose())));
  return out;
}

std::vector<double> column(const Eigen::MatrixXd& samples, Eigen::Index j) {
  std::vector<double> out(static_cast<std::size_t>(samples.rows()));
  for (Eigen::Index r = 0; r < samples.rows(); ++r) out[static_cast<std::size_t>(r)] = samples(r, j);
  return out;
}

std::ofstream openOutput(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

}  // namespace

std::string formatDouble(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

MarginalStats marginalStats(const Eigen::MatrixXd& samples) {
  MarginalStats s;
  const Eigen::Index k = samples.cols();
  if (samples.rows() == 0) {
    s.mean = s.variance = s.meanRadius = Eigen::VectorXd::Zero(k);
    s.covariance = Eigen::MatrixXd::Zero(k, k);
    return s;
  }
  s.mean = sampleMean(samples);
  s.covariance = samples.rows() > 1 ? sampleCovariance(samples) : Eigen::MatrixXd::Zero(k, k);
  s.variance = s.covariance.diagonal();
  s.meanRadius = 1.96 * (s.variance.array().max(0.0) / static_cast<double>(samples.rows())).sqrt();
  return s;
}

const CellReport& ComparisonReport::cell(double n, double t) const {
  for (const auto& c : cells)
    if (c.n == n && c.t == t) return c;
  throw ContractViolation("no cell for n=" + formatDouble(n) + ", t=" + formatDouble(t));
}

LimitReport sampleLimit(const PreparedExperiment& experiment, std::size_t replications) {
  const auto& config = experiment.config;
  const auto k = static_cast<Eigen::Index>(config.stations);
  const std::size_t m = config.evaluationTimes.size();
  std::vector<Eigen::MatrixXd> rows(replications);
  parallelFor(replications, config.threads, [&](std::size_t r) {
    rows[r] = sampleReflectedDiffusion(experiment.limit, config.evaluationTimes, config.limit.dt,
                                       experiment.limitSeed(r));
  });
  LimitReport report;
  report.replications = replications;
  report.samples.assign(m, Eigen::MatrixXd(static_cast<Eigen::Index>(replications), k));
  for (std::size_t r = 0; r < replications; ++r)
    for (std::size_t j = 0; j < m; ++j) report.samples[j].row(static_cast<Eigen::Index>(r)) = rows[r].row(static_cast<Eigen::Index>(j));
  for (const auto& s : report.samples) report.stats.push_back(marginalStats(s));
  return report;
}

ScaleReport simulateScale(const PreparedExperiment& experiment, double n) {
  const auto& config = experiment.config;
  const std::size_t reps = config.replications;
  const std::size_t m = config.evaluationTimes.size();
  const auto k = static_cast<Eigen::Index>(config.stations);
  const bool conventional = config.convention == ScalingConvention::Conventional;
  const double root = std::sqrt(n);
  const std::size_t plotted = std::min(config.plotPaths, reps);
  const std::size_t intervals = intervalsFor(config.horizon, config.gridPoints);

  std::vector<std::optional<Eigen::MatrixXd>> rows(reps);
  std::vector<GridPath> paths(plotted);
  parallelFor(reps, config.threads, [&](std::size_t r) {
    Trajectory trajectory;
    try {
      trajectory = simulate(experiment.simConfig(n, r));
    } catch (const ExplosionError&) {
      return;
    }
    Eigen::MatrixXd x(static_cast<Eigen::Index>(m), k);
    for (std::size_t j = 0; j < m; ++j) {
      const double t = conventional ? n * config.evaluationTimes[j] : config.evaluationTimes[j];
      const auto q = trajectory.queueAt(t);
      for (Eigen::Index i = 0; i < k; ++i) x(static_cast<Eigen::Index>(j), i) = static_cast<double>(q[static_cast<std::size_t>(i)]) / root;
    }
    rows[r] = std::move(x);
    if (r < plotted) paths[r] = scaledQueuePath(trajectory, n, config.convention, config.horizon, intervals);
  });

  ScaleReport report;
  report.n = n;
  for (const auto& row : rows) report.replications += row.has_value();
  report.explosions = reps - report.replications;
  if (static_cast<double>(report.explosions) > 0.01 * static_cast<double>(reps))
    throw SweepAborted("n=" + formatDouble(n) + ": " + std::to_string(report.explosions) + " of " +
                       std::to_string(reps) + " replications hit the explosion guard");
  report.samples.assign(m, Eigen::MatrixXd(static_cast<Eigen::Index>(report.replications), k));
  Eigen::Index next = 0;
  for (const auto& row : rows) {
    if (!row) continue;
    for (std::size_t j = 0; j < m; ++j) report.samples[j].row(next) = row->row(static_cast<Eigen::Index>(j));
    ++next;
  }
  for (auto& p : paths)
    if (p.size() > 0) report.paths.push_back(std::move(p));
  return report;
}

ComparisonReport runScalingSweep(const PreparedExperiment& experiment) {
  const auto& config = experiment.config;
  ComparisonReport report;
  report.times = config.evaluationTimes;
  report.stations = config.stations;
  const std::size_t limitReps = config.limit.replications ? config.limit.replications : config.replications;
  report.limit = sampleLimit(experiment, limitReps);

  for (double n : config.nValues) {
    report.scales.push_back(simulateScale(experiment, n));
    const auto& scale = report.scales.back();
    for (std::size_t j = 0; j < report.times.size(); ++j) {
      CellReport cell;
      cell.n = n;
      cell.t = report.times[j];
      cell.stats = marginalStats(scale.samples[j]);
      cell.ks = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(report.stations));
      if (scale.replications > 0 && limitReps > 0) {
        for (Eigen::Index i = 0; i < cell.ks.size(); ++i) {
          const auto a = column(scale.samples[j], i);
          const auto b = column(report.limit.samples[j], i);
          cell.ks(i) = ksTwoSample(a, b);
        }
        cell.ksCritical = ksCriticalValue(scale.replications, limitReps);
      }
      report.cells.push_back(std::move(cell));
    }
  }

  json& m = report.manifest;
  m["software"] = {{"name", "qnet"}, {"version", kVersion}};
  m["config"] = config.source;
  m["seeds"] = {{"base", config.seed},
                {"replication_rule", "splitmix64 chain over (base, n, r)"},
                {"limit_rule", "splitmix64 chain over (base, LIMIT, r)"}};
  m["engine"] = toString(config.engine);
  m["convention"] = toString(config.convention);
  m["replications"] = config.replications;
  m["horizon"] = config.horizon;
  m["evaluation_times"] = config.evaluationTimes;
  m["n_values"] = config.nValues;
  m["spectral_radius"] = experiment.topology.spectralRadius();
  m["covariance"] = toJson(experiment.covariance.matrix);
  m["drift_at_origin"] = toJson(experiment.driftAtOrigin);
  m["ks_alpha"] = 0.01;
  m["limit"] = {{"dt", config.limit.dt},
                {"replications", limitReps},
                {"construction",
                 config.limit.construction == MartingaleConstruction::Covariance ? "covariance" : "componentwise"}};
  json limitStats = json::array();
  for (std::size_t j = 0; j < report.times.size(); ++j)
    limitStats.push_back({{"t", report.times[j]},
                          {"mean", toJson(report.limit.stats[j].mean)},
                          {"covariance", toJson(report.limit.stats[j].covariance)}});
  m["limit"]["statistics"] = limitStats;
  json scales = json::array();
  for (const auto& s : report.scales) {
    json cells = json::array();
    for (const auto& c : report.cells) {
      if (c.n != s.n) continue;
      json cell = {{"t", c.t}};
      if (config.reportMean) {
        cell["mean"] = toJson(c.stats.mean);
        cell["mean_radius_95"] = toJson(c.stats.meanRadius);
      }
      if (config.reportCovariance) cell["covariance"] = toJson(c.stats.covariance);
      if (config.reportKs) {
        cell["ks"] = toJson(c.ks);
        cell["ks_critical_1pct"] = c.ksCritical;
      }
      cells.push_back(std::move(cell));
    }
    scales.push_back({{"n", s.n}, {"replications", s.replications}, {"explosions", s.explosions}, {"cells", cells}});
  }
  m["scales"] = scales;
  return report;
}

void emitReport(const ComparisonReport& report, const std::filesystem::path& directory) {
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) throw Error("cannot create '" + directory.string() + "': " + ec.message());

  const auto csvPath = directory / "results.csv";
  auto csv = openOutput(csvPath);
  csv << "n,t,station,mean,var,ks,ks_critical_1pct\n";
  for (const auto& c : report.cells) {
    for (Eigen::Index i = 0; i < c.stats.mean.size(); ++i) {
      csv << formatDouble(c.n) << ',' << formatDouble(c.t) << ',' << (i + 1) << ',' << formatDouble(c.stats.mean(i))
          << ',' << formatDouble(c.stats.variance(i)) << ',' << formatDouble(c.ks(i)) << ','
          << formatDouble(c.ksCritical) << '\n';
    }
  }
  finish(csv, csvPath);

  const auto manifestPath = directory / "manifest.json";
  auto manifest = openOutput(manifestPath);
  manifest << (report.manifest.is_null() ? json::object() : report.manifest).dump(2) << '\n';
  finish(manifest, manifestPath);

  for (const auto& scale : report.scales) {
    for (std::size_t r = 0; r < scale.paths.size(); ++r) {
      const auto& path = scale.paths[r];
      const auto file = directory / ("paths_n" + formatDouble(scale.n) + "_" + std::to_string(r) + ".csv");
      auto out = openOutput(file);
      out << 't';
      for (Eigen::Index i = 0; i < path.dim(); ++i) out << ",X" << (i + 1);
      out << '\n';
      for (std::size_t k = 0; k < path.size(); ++k) {
        out << formatDouble(path.times[k]);
        for (Eigen::Index i = 0; i < path.dim(); ++i) out << ',' << formatDouble(path.values(static_cast<Eigen::Index>(k), i));
        out << '\n';
      }
      finish(out, file);
    }
  }
}

}  // namespace qnet
