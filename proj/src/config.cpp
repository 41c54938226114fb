#include "qnet/config.hpp"

#include "qnet/error.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace qnet {

using nlohmann::json;

namespace {

constexpr std::uint64_t kLimitLabel = 0x4c494d4954ULL;  // "LIMIT"
constexpr std::uint64_t kInitialLabel = 0x494e4954ULL;  // "INIT"

const json& require(const json& node, const char* key, const std::string& where) {
  if (!node.is_object() || !node.contains(key)) throw ConfigError(where + ": missing field '" + key + "'");
  return node.at(key);
}

double number(const json& node, const std::string& where) {
  if (!node.is_number()) throw ConfigError(where + ": expected a number");
  return node.get<double>();
}

std::vector<double> numbers(const json& node, const std::string& where) {
  if (!node.is_array()) throw ConfigError(where + ": expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < node.size(); ++i) out.push_back(number(node[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

Eigen::VectorXd vector(const json& node, std::size_t size, const std::string& where) {
  const auto v = numbers(node, where);
  if (v.size() != size) throw ConfigError(where + ": expected " + std::to_string(size) + " entries");
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

RateFunction parseRate(const json& node, const std::string& where) {
  try {
    if (node.is_number()) return RateFunction::constant(node.get<double>());
    if (!node.is_object()) throw ConfigError(where + ": rate must be a number or an object");
    const std::string kind = node.value("kind", std::string("constant"));
    RateFunction rate;
    if (kind == "constant") {
      rate = RateFunction::constant(number(require(node, "value", where), where + ".value"));
    } else if (kind == "affine") {
      const double cap = node.contains("cap") ? number(node.at("cap"), where + ".cap") : std::numeric_limits<double>::infinity();
      rate = RateFunction::affine(number(require(node, "intercept", where), where + ".intercept"),
                                  numbers(require(node, "weights", where), where + ".weights"), cap);
    } else if (kind == "tabulated") {
      rate = RateFunction::tabulated(numbers(require(node, "weights", where), where + ".weights"),
                                     numbers(require(node, "knots", where), where + ".knots"),
                                     numbers(require(node, "values", where), where + ".values"),
                                     node.contains("tail_slope") ? number(node.at("tail_slope"), where + ".tail_slope") : 0.0);
    } else {
      throw ConfigError(where + ": unknown rate kind '" + kind + "'");
    }
    if (node.contains("growth_bound"))
      rate = rate.withDeclaredGrowthBound(number(node.at("growth_bound"), where + ".growth_bound"));
    return rate;
  } catch (const ContractViolation& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

RateVector parseRates(const json& rates, const char* key, std::size_t k, bool optional) {
  const std::string where = std::string("rates.") + key;
  if (!rates.contains(key)) {
    if (optional) return zeroRates(k);
    throw ConfigError("rates: missing field '" + std::string(key) + "'");
  }
  const json& node = rates.at(key);
  if (!node.is_array() || node.size() != k)
    throw ConfigError(where + ": expected an array with one rate per station");
  RateVector out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(parseRate(node[i], where + "[" + std::to_string(i + 1) + "]"));
  return out;
}

RenewalSpec parseRenewal(const json& node, const std::string& where) {
  if (!node.is_object()) throw ConfigError(where + ": expected an object");
  const std::string name = require(node, "distribution", where).get<std::string>();
  try {
    switch (distributionFromString(name)) {
      case Distribution::Exponential:
        return RenewalSpec::exponential(node.contains("mean") ? number(node.at("mean"), where) : 1.0);
      case Distribution::Erlang:
        return RenewalSpec::erlang(require(node, "phases", where).get<int>(),
                                   node.contains("mean") ? number(node.at("mean"), where) : 1.0);
      case Distribution::Uniform:
        return RenewalSpec::uniform(number(require(node, "lower", where), where + ".lower"),
                                    number(require(node, "upper", where), where + ".upper"));
      case Distribution::Lognormal:
        return RenewalSpec::lognormal(node.contains("mean") ? number(node.at("mean"), where) : 1.0,
                                      number(require(node, "sigma", where), where + ".sigma"));
      case Distribution::Deterministic:
        return RenewalSpec::deterministic(node.contains("mean") ? number(node.at("mean"), where) : 1.0);
    }
  } catch (const ContractViolation& e) {
    throw ConfigError(where + ": " + e.what());
  }
  throw ConfigError(where + ": unknown distribution");
}

std::vector<RenewalSpec> parseRenewals(const json& node, std::size_t k, const std::string& where,
                                       const std::vector<std::size_t>* only) {
  std::vector<RenewalSpec> out(k, RenewalSpec::exponential(1.0));
  if (node.is_object()) {
    const auto spec = parseRenewal(node, where);
    std::fill(out.begin(), out.end(), spec);
    return out;
  }
  if (!node.is_array() || node.size() != k) throw ConfigError(where + ": expected one spec per station or a single spec");
  for (std::size_t i = 0; i < k; ++i) {
    const bool needed = !only || std::find(only->begin(), only->end(), i) != only->end();
    if (node[i].is_null()) {
      if (needed) throw ConfigError(where + "[" + std::to_string(i + 1) + "]: missing spec");
      continue;
    }
    out[i] = parseRenewal(node[i], where + "[" + std::to_string(i + 1) + "]");
  }
  return out;
}

}  // namespace

Eigen::VectorXd InitialState::sample(Rng& rng) const {
  if (kind == Kind::Point) return value;
  Eigen::VectorXd x(value.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = value(i) + (upper(i) - value(i)) * uniformOpen(rng);
  return x;
}

ExperimentConfig parseConfig(const json& doc) {
  if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
  ExperimentConfig c;
  c.source = doc;

  const json& topology = require(doc, "topology", "root");
  const json& routing = require(topology, "routing", "topology");
  if (!routing.is_array() || routing.empty()) throw ConfigError("topology.routing: expected a K x K array");
  c.stations = topology.contains("stations") ? topology.at("stations").get<std::size_t>() : routing.size();
  const std::size_t k = c.stations;
  if (k == 0 || routing.size() != k) throw ConfigError("topology.routing: expected " + std::to_string(k) + " rows");
  c.routing.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < k; ++i) {
    const auto row = numbers(routing[i], "topology.routing[" + std::to_string(i + 1) + "]");
    if (row.size() != k) throw ConfigError("topology.routing: row " + std::to_string(i + 1) + " has wrong length");
    for (std::size_t j = 0; j < k; ++j) c.routing(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
  }
  for (const auto& s : require(topology, "arrival_set", "topology")) {
    const auto station = s.get<long long>();
    if (station < 1 || static_cast<std::size_t>(station) > k)
      throw ConfigError("topology.arrival_set: station " + std::to_string(station) + " outside 1..K");
    c.arrivalSet.push_back(static_cast<std::size_t>(station - 1));
  }

  const json& rates = require(doc, "rates", "root");
  c.family.lambda1 = parseRates(rates, "lambda1", k, false);
  c.family.mu1 = parseRates(rates, "mu1", k, false);
  c.family.lambda2 = parseRates(rates, "lambda2", k, true);
  c.family.mu2 = parseRates(rates, "mu2", k, true);

  const json& primitives = require(doc, "primitives", "root");
  c.arrivalSpecs = parseRenewals(require(primitives, "arrivals", "primitives"), k, "primitives.arrivals", &c.arrivalSet);
  c.serviceSpecs = parseRenewals(require(primitives, "services", "primitives"), k, "primitives.services", nullptr);

  const json& scaling = require(doc, "scaling", "root");
  c.nValues = numbers(require(scaling, "n_values", "scaling"), "scaling.n_values");
  try {
    c.convention = conventionFromString(scaling.value("convention", std::string("conventional")));
  } catch (const ContractViolation& e) {
    throw ConfigError(std::string("scaling.convention: ") + e.what());
  }
  c.initial.value = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));
  if (scaling.contains("x0")) {
    const json& x0 = scaling.at("x0");
    if (x0.is_array()) {
      c.initial.value = vector(x0, k, "scaling.x0");
    } else if (x0.is_object() && x0.contains("point")) {
      c.initial.value = vector(x0.at("point"), k, "scaling.x0.point");
    } else if (x0.is_object() && x0.contains("uniform")) {
      c.initial.kind = InitialState::Kind::Uniform;
      c.initial.value = vector(require(x0.at("uniform"), "lower", "scaling.x0.uniform"), k, "scaling.x0.uniform.lower");
      c.initial.upper = vector(require(x0.at("uniform"), "upper", "scaling.x0.uniform"), k, "scaling.x0.uniform.upper");
    } else {
      throw ConfigError("scaling.x0: expected an array, {\"point\": [...]} or {\"uniform\": {...}}");
    }
  }

  const json& experiment = require(doc, "experiment", "root");
  c.replications = require(experiment, "replications", "experiment").get<std::size_t>();
  c.horizon = number(require(experiment, "horizon", "experiment"), "experiment.horizon");
  if (experiment.contains("evaluation_times"))
    c.evaluationTimes = numbers(experiment.at("evaluation_times"), "experiment.evaluation_times");
  if (experiment.contains("statistics")) {
    c.reportMean = c.reportCovariance = c.reportKs = false;
    for (const auto& s : experiment.at("statistics")) {
      const auto name = s.get<std::string>();
      if (name == "mean") c.reportMean = true;
      else if (name == "covariance") c.reportCovariance = true;
      else if (name == "ks") c.reportKs = true;
      else throw ConfigError("experiment.statistics: unknown statistic '" + name + "'");
    }
  }
  if (experiment.contains("seed")) c.seed = experiment.at("seed").get<std::uint64_t>();
  if (experiment.contains("engine")) {
    const auto engine = experiment.at("engine").get<std::string>();
    if (engine == "direct") c.engine = Engine::Direct;
    else if (engine == "uniformized") c.engine = Engine::Uniformized;
    else throw ConfigError("experiment.engine: expected 'direct' or 'uniformized'");
  }
  if (experiment.contains("max_events")) c.maxEvents = static_cast<std::uint64_t>(number(experiment.at("max_events"), "experiment.max_events"));
  if (experiment.contains("threads")) c.threads = experiment.at("threads").get<std::size_t>();
  if (experiment.contains("limit")) {
    const json& limit = experiment.at("limit");
    if (limit.contains("dt")) c.limit.dt = number(limit.at("dt"), "experiment.limit.dt");
    if (limit.contains("replications")) c.limit.replications = limit.at("replications").get<std::size_t>();
    if (limit.contains("construction")) {
      const auto name = limit.at("construction").get<std::string>();
      if (name == "covariance") c.limit.construction = MartingaleConstruction::Covariance;
      else if (name == "componentwise") c.limit.construction = MartingaleConstruction::Componentwise;
      else throw ConfigError("experiment.limit.construction: expected 'covariance' or 'componentwise'");
    }
  }

  if (doc.contains("output")) {
    const json& output = doc.at("output");
    if (output.contains("dir")) c.outDir = output.at("dir").get<std::string>();
    if (output.contains("plot_paths")) c.plotPaths = output.at("plot_paths").get<std::size_t>();
    if (output.contains("grid_points")) c.gridPoints = output.at("grid_points").get<std::size_t>();
  }
  return c;
}

ExperimentConfig loadConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file '" + path.string() + "'");
  try {
    return parseConfig(json::parse(in));
  } catch (const json::exception& e) {
    throw ConfigError("'" + path.string() + "': " + e.what());
  }
}

ValidationResult validateConfig(const ExperimentConfig& c) {
  ValidationResult result;
  auto& out = result.violations;
  const std::size_t k = c.stations;

  const auto routing = checkRouting(c.routing);
  out.insert(out.end(), routing.begin(), routing.end());
  if (routing.empty()) {
    result.spectralRadius = spectralRadius(c.routing);
    const NetworkTopology topology(c.routing, c.arrivalSet);
    std::vector<double> arrivalFactor(k), serviceFactor(k);
    for (std::size_t i = 0; i < k; ++i) {
      arrivalFactor[i] = 1.0 / c.arrivalSpecs[i].mean;
      serviceFactor[i] = 1.0 / c.serviceSpecs[i].mean;
    }
    const auto model = checkScalingFamily(topology, c.family.scaled(arrivalFactor, serviceFactor));
    out.insert(out.end(), model.begin(), model.end());
  }

  for (std::size_t i = 0; i < k; ++i) {
    try {
      c.serviceSpecs[i].validate();
      if (std::find(c.arrivalSet.begin(), c.arrivalSet.end(), i) != c.arrivalSet.end()) c.arrivalSpecs[i].validate();
    } catch (const ContractViolation& e) {
      out.push_back({"moments", "station " + std::to_string(i + 1) + ": " + e.what()});
    }
  }

  auto experiment = [&](const std::string& message) { out.push_back({"experiment", message}); };
  if (c.replications < 100) experiment("replications must be >= 100");
  if (!(c.horizon > 0.0) || !std::isfinite(c.horizon)) experiment("horizon must be finite and > 0");
  for (std::size_t i = 0; i < c.nValues.size(); ++i) {
    if (!(c.nValues[i] >= 1.0) || c.nValues[i] != std::floor(c.nValues[i])) experiment("n_values must be integers >= 1");
    if (i > 0 && !(c.nValues[i] > c.nValues[i - 1])) experiment("n_values must be strictly increasing");
  }
  for (double t : c.evaluationTimes)
    if (!(t > 0.0) || t > c.horizon) experiment("evaluation times must lie in (0, horizon]");
  if (!(c.limit.dt > 0.0) || c.limit.dt > 1e-2) experiment("limit.dt must lie in (0, 1e-2]");
  if (c.limit.replications != 0 && c.limit.replications < 100) experiment("limit.replications must be >= 100");
  if ((c.initial.value.array() < 0.0).any() ||
      (c.initial.kind == InitialState::Kind::Uniform && !(c.initial.upper.array() >= c.initial.value.array()).all()))
    experiment("x0 must lie in the nonnegative orthant");
  if (c.gridPoints == 0) experiment("grid_points must be >= 1");
  return result;
}

InvalidConfig::InvalidConfig(std::vector<Violation> violations)
    : Error([&] {
        std::ostringstream msg;
        msg << "invalid configuration:";
        for (const auto& v : violations) msg << "\n  " << v.condition << ": " << v.message;
        return msg.str();
      }()),
      violations_(std::move(violations)) {}

PreparedExperiment prepareExperiment(const ExperimentConfig& c) {
  auto validation = validateConfig(c);
  if (!validation.ok()) throw InvalidConfig(std::move(validation.violations));
  const std::size_t k = c.stations;
  const auto ek = static_cast<Eigen::Index>(k);
  PreparedExperiment p{c, NetworkTopology(c.routing, c.arrivalSet), {}, {}, {}, {}, {}, {}};

  std::vector<double> arrivalFactor(k), serviceFactor(k);
  JacksonParams& jp = p.jackson;
  jp.routing = c.routing;
  jp.arrivalRate = Eigen::VectorXd::Ones(ek);
  jp.arrivalVariance = Eigen::VectorXd::Zero(ek);
  jp.arrivalSpeed = Eigen::VectorXd::Zero(ek);
  jp.serviceRate.resize(ek);
  jp.serviceVariance.resize(ek);
  jp.serviceSpeed.resize(ek);
  const std::vector<double> origin(k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    const auto ei = static_cast<Eigen::Index>(i);
    arrivalFactor[i] = 1.0 / c.arrivalSpecs[i].mean;
    serviceFactor[i] = 1.0 / c.serviceSpecs[i].mean;
    if (p.topology.hasArrivals(i)) {
      jp.arrivalRate(ei) = arrivalFactor[i];
      jp.arrivalVariance(ei) = c.arrivalSpecs[i].variance();
      jp.arrivalSpeed(ei) = c.family.lambda1[i](origin);
    }
    jp.serviceRate(ei) = serviceFactor[i];
    jp.serviceVariance(ei) = c.serviceSpecs[i].variance();
    jp.serviceSpeed(ei) = c.family.mu1[i](origin);
  }
  p.intensities = c.family.scaled(arrivalFactor, serviceFactor);
  p.drift = driftFunction(p.intensities, p.topology.reflection());
  p.driftAtOrigin = p.drift(Eigen::VectorXd::Zero(ek));
  p.covariance = buildCovariance(jp);

  p.limit.initial = [initial = c.initial](Rng& rng) { return initial.sample(rng); };
  p.limit.drift = p.drift;
  p.limit.noise = MartingaleIncrements(jp, p.covariance, c.limit.construction);
  p.limit.routing = c.routing;
  p.limit.driftLipschitz = p.drift.lipschitzBound();
  return p;
}

std::uint64_t PreparedExperiment::replicationSeed(double n, std::size_t replication) const {
  return deriveSeed(config.seed, {static_cast<std::uint64_t>(std::llround(n)), replication});
}

std::uint64_t PreparedExperiment::limitSeed(std::size_t replication) const {
  return deriveSeed(config.seed, {kLimitLabel, replication});
}

SimConfig PreparedExperiment::simConfig(double n, std::size_t replication) const {
  const bool conventional = config.convention == ScalingConvention::Conventional;
  SimConfig s{topology,
              EffectiveRates(config.family, n, conventional ? 1.0 / n : 1.0),
              config.arrivalSpecs,
              config.serviceSpecs,
              {},
              conventional ? n * config.horizon : config.horizon,
              replicationSeed(n, replication),
              config.engine,
              config.maxEvents};
  Rng rng(deriveSeed(s.seed, {kInitialLabel}));
  const Eigen::VectorXd x0 = config.initial.sample(rng);
  s.initialQueue.resize(config.stations);
  for (std::size_t i = 0; i < config.stations; ++i)
    s.initialQueue[i] = static_cast<std::int64_t>(std::llround(std::sqrt(n) * x0(static_cast<Eigen::Index>(i))));
  return s;
}

}  // namespace qnet
