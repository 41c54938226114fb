#pragma once

#include "qnet/grid_path.hpp"
#include "qnet/rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <initializer_list>
#include <random>

namespace testing {

inline Eigen::MatrixXd mat(std::initializer_list<std::initializer_list<double>> rows) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

// Brownian path with drift on [0, T], started at x0 >= 0.
inline qnet::GridPath brownianPath(qnet::Rng& rng, const Eigen::VectorXd& x0, const Eigen::VectorXd& drift,
                                   double sigma, double horizon, std::size_t steps) {
  const auto k = x0.size();
  auto times = qnet::uniformGrid(horizon, steps);
  Eigen::MatrixXd v(static_cast<Eigen::Index>(steps + 1), k);
  std::normal_distribution<double> z;
  const double dt = horizon / static_cast<double>(steps);
  v.row(0) = x0.transpose();
  for (std::size_t s = 1; s <= steps; ++s)
    for (Eigen::Index i = 0; i < k; ++i)
      v(static_cast<Eigen::Index>(s), i) =
          v(static_cast<Eigen::Index>(s - 1), i) + drift(i) * dt + sigma * std::sqrt(dt) * z(rng);
  return qnet::GridPath(std::move(times), std::move(v));
}

}  // namespace testing

namespace testing {

// Transient law at time t of a birth-death chain on {0..cap} started at 0
// (rates at the cap are cut), by uniformization of the generator.
template <class Birth, class Death>
std::vector<double> birthDeathTransient(Birth birth, Death death, std::size_t cap, double t) {
  const std::size_t m = cap + 1;
  std::vector<double> up(m), down(m);
  double lambda = 0.0;
  for (std::size_t x = 0; x < m; ++x) {
    up[x] = x < cap ? birth(x) : 0.0;
    down[x] = x > 0 ? death(x) : 0.0;
    lambda = std::max(lambda, up[x] + down[x]);
  }
  lambda *= 1.05;
  std::vector<double> v(m, 0.0), next(m), out(m, 0.0);
  v[0] = 1.0;
  // Poisson weights computed in log space to stay stable for large lambda t
  const double mean = lambda * t;
  const std::size_t terms = static_cast<std::size_t>(mean + 12.0 * std::sqrt(mean) + 50.0);
  for (std::size_t k = 0; k <= terms; ++k) {
    const double w = std::exp(-mean + static_cast<double>(k) * std::log(mean) - std::lgamma(static_cast<double>(k) + 1.0));
    for (std::size_t x = 0; x < m; ++x) out[x] += w * v[x];
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t x = 0; x < m; ++x) {
      const double stay = 1.0 - (up[x] + down[x]) / lambda;
      next[x] += v[x] * stay;
      if (x < cap) next[x + 1] += v[x] * up[x] / lambda;
      if (x > 0) next[x - 1] += v[x] * down[x] / lambda;
    }
    v.swap(next);
  }
  return out;
}

}  // namespace testing
