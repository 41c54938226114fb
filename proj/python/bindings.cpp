#include "qnet/config.hpp"
#include "qnet/harness.hpp"
#include "qnet/limit_diffusion.hpp"
#include "qnet/network_model.hpp"
#include "qnet/simulator.hpp"
#include "qnet/skorohod.hpp"
#include "qnet/stats.hpp"
#include "qnet/version.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using nlohmann::json;

namespace {

qnet::GridPath toPath(std::vector<double> times, const Eigen::MatrixXd& values) {
  qnet::GridPath path(std::move(times), values);
  path.validate();
  return path;
}

py::dict solution(const qnet::SPSolution& s) {
  py::dict d;
  d["phi"] = s.phi.values;
  d["eta"] = s.eta.values;
  d["iterations"] = s.iterations;
  d["residual"] = s.residual;
  return d;
}

qnet::PreparedExperiment prepare(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw qnet::ConfigError(e.what());
  }
  return qnet::prepareExperiment(qnet::parseConfig(doc));
}

}  // namespace

PYBIND11_MODULE(_qnet, m) {
  m.doc() = "State-dependent queueing networks and their reflected diffusion limits";
  m.attr("__version__") = qnet::kVersion;

  static py::exception<qnet::Error> error(m, "QnetError", PyExc_RuntimeError);
  static py::exception<qnet::ValidationError> validation(m, "ValidationError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const qnet::ValidationError& e) {
      PyErr_SetString(validation.ptr(), (e.condition() + ": " + e.what()).c_str());
    } catch (const qnet::ContractViolation& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const qnet::Error& e) {
      PyErr_SetString(error.ptr(), e.what());
    }
  });

  m.def("reflection_matrix", &qnet::buildReflectionMatrix, py::arg("routing"), "R = I - P^T");
  m.def("spectral_radius", &qnet::spectralRadius, py::arg("matrix"));

  m.def(
      "solve_sp_1d",
      [](std::vector<double> times, const Eigen::MatrixXd& psi) { return solution(qnet::solveSP1D(toPath(times, psi))); },
      py::arg("times"), py::arg("psi"));
  m.def(
      "solve_sp",
      [](std::vector<double> times, const Eigen::MatrixXd& psi, const Eigen::MatrixXd& routing, double tol) {
        qnet::SPOptions opts;
        opts.tolerance = tol;
        return solution(qnet::solveSP(toPath(times, psi), routing, opts));
      },
      py::arg("times"), py::arg("psi"), py::arg("routing"), py::arg("tol") = 1e-10);

  m.def("ks_two_sample", [](std::vector<double> a, std::vector<double> b) { return qnet::ksTwoSample(a, b); });
  m.def("ks_critical_value", &qnet::ksCriticalValue, py::arg("n"), py::arg("m"), py::arg("alpha") = 0.01);

  m.def(
      "covariance",
      [](const Eigen::MatrixXd& routing, Eigen::VectorXd arrivalRate, Eigen::VectorXd arrivalVariance,
         Eigen::VectorXd serviceRate, Eigen::VectorXd serviceVariance, Eigen::VectorXd arrivalSpeed,
         Eigen::VectorXd serviceSpeed) {
        qnet::JacksonParams p{arrivalRate, arrivalVariance, serviceRate, serviceVariance,
                              arrivalSpeed, serviceSpeed,   routing};
        return qnet::buildCovariance(p).matrix;
      },
      py::arg("routing"), py::arg("arrival_rate"), py::arg("arrival_variance"), py::arg("service_rate"),
      py::arg("service_variance"), py::arg("arrival_speed"), py::arg("service_speed"));

  m.def(
      "validate_config",
      [](const std::string& text) {
        json doc;
        try {
          doc = json::parse(text);
        } catch (const json::exception& e) {
          throw qnet::ConfigError(e.what());
        }
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& v : qnet::validateConfig(qnet::parseConfig(doc)).violations)
          out.emplace_back(v.condition, v.message);
        return out;
      },
      py::arg("config_json"), "List of (condition, message) pairs; empty when valid.");

  m.def(
      "simulate",
      [](const std::string& text, double n, std::size_t replication) {
        const auto prepared = prepare(text);
        const auto traj = qnet::simulate(prepared.simConfig(n, replication));
        Eigen::MatrixXd queue(static_cast<Eigen::Index>(traj.snapshots()), static_cast<Eigen::Index>(traj.stations()));
        for (std::size_t s = 0; s < traj.snapshots(); ++s)
          for (std::size_t i = 0; i < traj.stations(); ++i)
            queue(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(i)) = static_cast<double>(traj.queue(s)[i]);
        py::dict d;
        d["times"] = std::vector<double>(traj.times().begin(), traj.times().end());
        d["queue"] = queue;
        return d;
      },
      py::arg("config_json"), py::arg("n"), py::arg("replication") = 0,
      "Physical event times and queue vectors of one replication at scale n.");

  m.def(
      "sample_limit",
      [](const std::string& text, std::size_t replications) {
        py::gil_scoped_release release;
        return qnet::sampleLimit(prepare(text), replications).samples;
      },
      py::arg("config_json"), py::arg("replications"), "Limit samples, one array per evaluation time.");

  m.def(
      "run_sweep",
      [](const std::string& text) {
        std::vector<std::tuple<double, double, int, double, double, double, double>> rows;
        std::string manifest;
        {
          py::gil_scoped_release release;
          const auto report = qnet::runScalingSweep(prepare(text));
          for (const auto& c : report.cells)
            for (Eigen::Index i = 0; i < c.stats.mean.size(); ++i)
              rows.emplace_back(c.n, c.t, static_cast<int>(i + 1), c.stats.mean(i), c.stats.variance(i), c.ks(i),
                                c.ksCritical);
          manifest = report.manifest.dump();
        }
        return py::make_tuple(rows, manifest);
      },
      py::arg("config_json"), "Rows (n, t, station, mean, var, ks, ks_critical_1pct) and the manifest as JSON text.");
}
