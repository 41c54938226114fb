#include "qnet/config.hpp"
#include "qnet/harness.hpp"
#include "qnet/skorohod.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

using nlohmann::json;

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kRuntime = 2;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replications;
  std::optional<std::string> outDir;
  std::optional<std::size_t> threads;
  std::optional<std::size_t> gridPoints;
};

json readJson(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw qnet::ConfigError("cannot open configuration file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw qnet::ConfigError("'" + path + "': " + e.what());
  }
}

// Overrides are written into the document so the manifest echoes what ran.
qnet::ExperimentConfig loadWithOverrides(const std::string& path, const Overrides& o) {
  json doc = readJson(path);
  if (!doc.is_object()) throw qnet::ConfigError("configuration must be a JSON object");
  if (o.seed) doc["experiment"]["seed"] = *o.seed;
  if (o.replications) doc["experiment"]["replications"] = *o.replications;
  if (o.threads) doc["experiment"]["threads"] = *o.threads;
  if (o.outDir) doc["output"]["dir"] = *o.outDir;
  if (o.gridPoints) doc["output"]["grid_points"] = *o.gridPoints;
  return qnet::parseConfig(doc);
}

void printViolations(const std::vector<qnet::Violation>& violations) {
  for (const auto& v : violations) std::cerr << "error [" << v.condition << "] " << v.message << '\n';
}

int cmdValidate(const std::string& path, const Overrides& o) {
  const auto config = loadWithOverrides(path, o);
  const auto result = qnet::validateConfig(config);
  if (!result.ok()) {
    printViolations(result.violations);
    return kInvalid;
  }
  std::cout << "valid: " << config.stations << " stations, spectral radius "
            << qnet::formatDouble(result.spectralRadius) << '\n';
  return kOk;
}

int cmdRun(const std::string& path, const Overrides& o) {
  const auto experiment = qnet::prepareExperiment(loadWithOverrides(path, o));
  const auto report = qnet::runScalingSweep(experiment);
  qnet::emitReport(report, experiment.config.outDir);
  std::printf("%8s %6s %7s %12s %10s %10s\n", "n", "t", "station", "mean", "ks", "ks_crit");
  for (const auto& c : report.cells)
    for (Eigen::Index i = 0; i < c.stats.mean.size(); ++i)
      std::printf("%8g %6g %7ld %12.6g %10.5f %10.5f\n", c.n, c.t, static_cast<long>(i + 1), c.stats.mean(i),
                  c.ks(i), c.ksCritical);
  for (const auto& s : report.scales)
    if (s.explosions) std::printf("n=%g: %zu replications hit the explosion guard\n", s.n, s.explosions);
  std::cout << "wrote " << (experiment.config.outDir / "results.csv").string() << '\n';
  return kOk;
}

int cmdLimitSample(const std::string& path, const Overrides& o) {
  const auto experiment = qnet::prepareExperiment(loadWithOverrides(path, o));
  const auto& config = experiment.config;
  const std::size_t reps = config.limit.replications ? config.limit.replications : config.replications;
  const auto limit = qnet::sampleLimit(experiment, reps);
  std::filesystem::create_directories(config.outDir);
  const auto file = config.outDir / "limit_samples.csv";
  std::ofstream out(file, std::ios::binary);
  if (!out) throw qnet::Error("cannot write '" + file.string() + "'");
  out << "replication,t";
  for (std::size_t i = 0; i < config.stations; ++i) out << ",X" << (i + 1);
  out << '\n';
  for (std::size_t r = 0; r < reps; ++r) {
    for (std::size_t j = 0; j < config.evaluationTimes.size(); ++j) {
      out << r << ',' << qnet::formatDouble(config.evaluationTimes[j]);
      for (Eigen::Index i = 0; i < limit.samples[j].cols(); ++i)
        out << ',' << qnet::formatDouble(limit.samples[j](static_cast<Eigen::Index>(r), i));
      out << '\n';
    }
  }
  out.flush();
  if (!out) throw qnet::Error("write failed for '" + file.string() + "'");
  std::cout << "wrote " << file.string() << '\n';
  return kOk;
}

qnet::GridPath readPsi(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw qnet::Error("cannot open '" + path + "'");
  std::string line;
  std::vector<double> times;
  std::vector<std::vector<double>> rows;
  std::size_t lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (line.empty()) continue;
    std::vector<double> fields;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        fields.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (rows.empty() && lineNo == 1) continue;  // header
      throw qnet::Error(path + ":" + std::to_string(lineNo) + ": non-numeric field");
    }
    if (fields.size() < 2 || (!rows.empty() && fields.size() != rows.front().size() + 1))
      throw qnet::Error(path + ":" + std::to_string(lineNo) + ": expected t followed by one column per station");
    times.push_back(fields.front());
    rows.emplace_back(fields.begin() + 1, fields.end());
  }
  if (rows.empty()) throw qnet::Error(path + ": no data rows");
  Eigen::MatrixXd values(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t i = 0; i < rows[r].size(); ++i) values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)) = rows[r][i];
  qnet::GridPath psi(std::move(times), std::move(values));
  psi.validate();
  return psi;
}

int cmdSpSolve(const std::string& path, const std::string& routingJson, const std::string& outPath) {
  const auto psi = readPsi(path);
  const auto k = psi.dim();
  Eigen::MatrixXd routing = Eigen::MatrixXd::Zero(k, k);
  if (!routingJson.empty()) {
    json doc;
    try {
      doc = json::parse(routingJson);
    } catch (const json::exception& e) {
      throw qnet::ConfigError(std::string("--routing: ") + e.what());
    }
    if (!doc.is_array() || static_cast<Eigen::Index>(doc.size()) != k)
      throw qnet::ConfigError("--routing: expected a " + std::to_string(k) + " x " + std::to_string(k) + " array");
    for (Eigen::Index i = 0; i < k; ++i) {
      if (!doc[i].is_array() || static_cast<Eigen::Index>(doc[i].size()) != k)
        throw qnet::ConfigError("--routing: row " + std::to_string(i + 1) + " has wrong length");
      for (Eigen::Index j = 0; j < k; ++j) routing(i, j) = doc[i][j].get<double>();
    }
  }
  const auto violations = qnet::checkRouting(routing);
  if (!violations.empty()) {
    printViolations(violations);
    return kInvalid;
  }
  const auto sol = qnet::solveSP(psi, routing);

  std::ofstream file;
  if (!outPath.empty()) {
    file.open(outPath, std::ios::binary);
    if (!file) throw qnet::Error("cannot write '" + outPath + "'");
  }
  std::ostream& out = outPath.empty() ? std::cout : file;
  out << 't';
  for (const char* name : {"psi", "phi", "eta"})
    for (Eigen::Index i = 0; i < k; ++i) out << ',' << name << (i + 1);
  out << '\n';
  for (std::size_t r = 0; r < psi.size(); ++r) {
    const auto row = static_cast<Eigen::Index>(r);
    out << qnet::formatDouble(psi.times[r]);
    for (const auto* m : {&psi.values, &sol.phi.values, &sol.eta.values})
      for (Eigen::Index i = 0; i < k; ++i) out << ',' << qnet::formatDouble((*m)(row, i));
    out << '\n';
  }
  out.flush();
  if (!out) throw qnet::Error("write failed");
  std::cerr << "iterations " << sol.iterations << ", residual " << qnet::formatDouble(sol.residual) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Queueing network simulation and diffusion-limit comparison"};
  app.require_subcommand(1);

  Overrides o;
  auto addOverrides = [&o](CLI::App* sub) {
    sub->add_option_function<std::uint64_t>("--seed", [&o](const std::uint64_t& v) { o.seed = v; }, "Base seed");
    sub->add_option_function<std::size_t>("--replications", [&o](const std::size_t& v) { o.replications = v; },
                                          "Replications per n");
    sub->add_option_function<std::string>("--out-dir", [&o](const std::string& v) { o.outDir = v; },
                                          "Output directory");
    sub->add_option_function<std::size_t>("--threads", [&o](const std::size_t& v) { o.threads = v; },
                                          "Worker threads (0: all cores)");
    sub->add_option_function<std::size_t>("--grid-points", [&o](const std::size_t& v) { o.gridPoints = v; },
                                          "Path points per unit time");
  };

  std::string configPath, psiPath, routingJson, outPath;
  auto* validate = app.add_subcommand("validate", "Check a configuration against the model conditions");
  validate->add_option("config", configPath, "Experiment file (JSON)")->required();
  addOverrides(validate);
  auto* run = app.add_subcommand("run", "Run the scaling sweep and write the report");
  run->add_option("config", configPath, "Experiment file (JSON)")->required();
  addOverrides(run);
  auto* limit = app.add_subcommand("limit-sample", "Sample the limit process at the evaluation times");
  limit->add_option("config", configPath, "Experiment file (JSON)")->required();
  addOverrides(limit);
  auto* sp = app.add_subcommand("sp-solve", "Solve the Skorohod problem for a CSV path (t,psi1..psiK)");
  sp->add_option("psi", psiPath, "Input CSV")->required();
  sp->add_option("--routing", routingJson, "Routing matrix as a JSON array (default: zero)");
  sp->add_option("-o,--output", outPath, "Output CSV (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kRuntime;
  }

  try {
    if (validate->parsed()) return cmdValidate(configPath, o);
    if (run->parsed()) return cmdRun(configPath, o);
    if (limit->parsed()) return cmdLimitSample(configPath, o);
    if (sp->parsed()) return cmdSpSolve(psiPath, routingJson, outPath);
  } catch (const qnet::InvalidConfig& e) {
    printViolations(e.violations());
    return kInvalid;
  } catch (const qnet::ValidationError& e) {
    std::cerr << "error [" << e.condition() << "] " << e.what() << '\n';
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kRuntime;
}
