#include "qnet/skorohod.hpp"

#include "qnet/error.hpp"
#include "qnet/network_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qnet {
namespace {

void requireStartInOrthant(const GridPath& psi) {
  psi.validate();
  if (psi.size() == 0) throw ContractViolation("Skorohod problem: empty path");
  if ((psi.values.row(0).array() < 0.0).any())
    throw ContractViolation("Skorohod problem: psi(0) must lie in the nonnegative orthant");
}

int defaultIterationCap(const Eigen::MatrixXd& routing, double tolerance) {
  const double rho = spectralRadius(routing);
  if (rho <= 1e-12) return static_cast<int>(routing.rows()) + 50;
  return static_cast<int>(std::ceil(std::log(tolerance) / std::log(rho))) + 50;
}

double maxResidual(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& psi, const Eigen::MatrixXd& eta,
                   const Eigen::MatrixXd& reflection) {
  // Rows are times, so R eta(t) is eta.row(t) * R^T.
  return (phi - psi - eta * reflection.transpose()).cwiseAbs().maxCoeff();
}

}  // namespace

SPSolution solveSP1D(const GridPath& psi) {
  requireStartInOrthant(psi);
  if (psi.dim() != 1) throw ContractViolation("solveSP1D: path must be scalar valued");
  const auto n = static_cast<Eigen::Index>(psi.size());
  Eigen::MatrixXd eta(n, 1), phi(n, 1);
  double running = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    running = std::max(running, -psi.values(k, 0));
    eta(k, 0) = running;
    phi(k, 0) = psi.values(k, 0) + running;
  }
  SPSolution out{GridPath(psi.times, phi), GridPath(psi.times, eta), 1, 0.0};
  out.residual = maxResidual(out.phi.values, psi.values, out.eta.values, Eigen::MatrixXd::Identity(1, 1));
  return out;
}

SPSolution solveSP(const GridPath& psi, const Eigen::MatrixXd& routing, const SPOptions& options) {
  requireStartInOrthant(psi);
  const Eigen::Index k = psi.dim();
  if (routing.rows() != k || routing.cols() != k) throw ContractViolation("solveSP: routing matrix does not match path dimension");
  if (!(options.tolerance > 0.0)) throw ContractViolation("solveSP: tolerance must be > 0");
  const Eigen::MatrixXd reflection = buildReflectionMatrix(routing);
  const int cap = options.maxIterations > 0 ? options.maxIterations : defaultIterationCap(routing, options.tolerance);

  const Eigen::Index n = static_cast<Eigen::Index>(psi.size());
  Eigen::MatrixXd eta = Eigen::MatrixXd::Zero(n, k);
  Eigen::MatrixXd next(n, k);
  // Column i of (eta P) is (P^T eta)_i over time.
  int iterations = 0;
  double change = 0.0;
  for (;;) {
    ++iterations;
    const Eigen::MatrixXd pushed = eta * routing;
    for (Eigen::Index i = 0; i < k; ++i) {
      double running = 0.0;
      for (Eigen::Index t = 0; t < n; ++t) {
        running = std::max(running, pushed(t, i) - psi.values(t, i));
        next(t, i) = running;
      }
    }
    change = (next - eta).cwiseAbs().maxCoeff();
    eta.swap(next);
    if (change < options.tolerance) break;
    if (iterations >= cap) {
      std::ostringstream msg;
      msg << "solveSP: no convergence after " << iterations << " iterations (last change " << change
          << "); spectral radius of P too close to 1 or tolerance too tight";
      throw ConvergenceError(msg.str(), change);
    }
  }

  Eigen::MatrixXd phi = psi.values + eta * reflection.transpose();
  phi = phi.cwiseMax(0.0);
  SPSolution out{GridPath(psi.times, std::move(phi)), GridPath(psi.times, std::move(eta)), iterations, 0.0};
  out.residual = maxResidual(out.phi.values, psi.values, out.eta.values, reflection);
  return out;
}

double lipschitzProbe(const GridPath& psi1, const GridPath& psi2, const Eigen::MatrixXd& routing,
                      const SPOptions& options) {
  if (psi1.times != psi2.times || psi1.dim() != psi2.dim())
    throw ContractViolation("lipschitzProbe: paths must share grid and dimension");
  const double denominator = (psi1.values - psi2.values).rowwise().norm().maxCoeff();
  if (denominator == 0.0) return 0.0;
  const auto a = solveSP(psi1, routing, options);
  const auto b = solveSP(psi2, routing, options);
  return (a.phi.values - b.phi.values).rowwise().norm().maxCoeff() / denominator;
}

Eigen::VectorXd reflectStep(const Eigen::VectorXd& x, const Eigen::VectorXd& increment,
                            const Eigen::MatrixXd& routing, Eigen::VectorXd* regulatorIncrement,
                            double tolerance) {
  const Eigen::Index k = x.size();
  const Eigen::VectorXd target = x + increment;
  Eigen::VectorXd push = Eigen::VectorXd::Zero(k);
  if (k == 1) {
    push(0) = std::max(0.0, -target(0) / (1.0 - routing(0, 0)));
  } else if ((target.array() < 0.0).any()) {
    // Fixed point z_i = max(0, (P^T z)_i - target_i); the path before the
    // step is already in the orthant, so only the endpoint constrains z.
    const Eigen::MatrixXd routingT = routing.transpose();
    for (int it = 0; it < 10000; ++it) {
      const Eigen::VectorXd next = (routingT * push - target).cwiseMax(0.0);
      const double change = (next - push).cwiseAbs().maxCoeff();
      push = next;
      if (change <= tolerance * (1.0 + push.cwiseAbs().maxCoeff())) break;
    }
  }
  if (regulatorIncrement) *regulatorIncrement = push;
  Eigen::VectorXd out = target + push - routing.transpose() * push;
  return out.cwiseMax(0.0);
}

}  // namespace qnet
