#pragma once

#include "qnet/grid_path.hpp"

#include <Eigen/Dense>

namespace qnet {

/// Solution (phi, eta) of the Skorohod problem for a grid path psi on the
/// nonnegative orthant with reflection matrix R = I - P^T:
/// phi = psi + R eta >= 0, eta nondecreasing from 0, and eta_i increases only
/// while phi_i = 0.
struct SPSolution {
  GridPath phi;
  GridPath eta;
  int iterations = 0;
  double residual = 0.0;  ///< max over grid of |phi - psi - R eta|
};

struct SPOptions {
  double tolerance = 1e-10;
  /// 0 selects ceil(log(tol)/log(rho)) + 50 from the spectral radius rho of P.
  int maxIterations = 0;
};

/// One-dimensional closed form: eta(t) = max(0, max_{s<=t} -psi(s)),
/// phi = psi + eta. Requires psi(0) >= 0.
SPSolution solveSP1D(const GridPath& psi);

/// Fixed-point iteration on the regulator,
///   eta^{m+1}_i(t) = max(0, max_{s<=t} [(P^T eta^m)_i(s) - psi_i(s)]),
/// from eta^0 = 0 until the sup-norm change drops below the tolerance.
/// Throws ConvergenceError when the iteration cap is reached. phi is clamped
/// to the orthant on output.
SPSolution solveSP(const GridPath& psi, const Eigen::MatrixXd& routing, const SPOptions& options = {});

/// sup_t |Gamma(psi1) - Gamma(psi2)| / sup_t |psi1 - psi2| (Euclidean norm in
/// space, sup over the grid). Returns 0 for identical inputs.
double lipschitzProbe(const GridPath& psi1, const GridPath& psi2, const Eigen::MatrixXd& routing,
                      const SPOptions& options = {});

/// Skorohod map of the two-point path (x, x + increment) started at x in the
/// orthant: returns the reflected endpoint and writes the regulator increment.
/// This is one step of the reflected Euler scheme.
Eigen::VectorXd reflectStep(const Eigen::VectorXd& x, const Eigen::VectorXd& increment,
                            const Eigen::MatrixXd& routing, Eigen::VectorXd* regulatorIncrement = nullptr,
                            double tolerance = 1e-13);

}  // namespace qnet
