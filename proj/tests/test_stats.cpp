#include "qnet/rng.hpp"
#include "qnet/stats.hpp"

#include <doctest.h>

#include <cmath>

using namespace qnet;

TEST_CASE("KS statistic examples") {
  const std::vector<double> a{0.1, 0.5, 0.5, 2.0};
  CHECK(ksTwoSample(a, a) == 0.0);
  const std::vector<double> zeros(50, 0.0), ones(70, 1.0);
  CHECK(ksTwoSample(zeros, ones) == 1.0);
  // hand computed: F_a - F_b is largest just after 1
  const std::vector<double> x{1, 2, 3}, y{1.5, 2.5, 3.5, 4.5};
  CHECK(ksTwoSample(x, y) == doctest::Approx(0.5));
  // ties across samples
  const std::vector<double> p{0, 0, 1}, q{0, 1, 1};
  CHECK(ksTwoSample(p, q) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("KS critical value") {
  CHECK(ksCriticalValue(10000, 10000) == doctest::Approx(1.6276 * std::sqrt(2.0 / 1e4)).epsilon(1e-3));
  CHECK(ksCriticalValue(10000, 10000) == doctest::Approx(0.0230).epsilon(0.01));
}

TEST_CASE("KS null calibration on uniforms") {
  Rng rng(1);
  int below = 0;
  const double crit = ksCriticalValue(10000, 10000);
  std::vector<double> a(10000), b(10000);
  for (int trial = 0; trial < 100; ++trial) {
    for (auto& x : a) x = uniformOpen(rng);
    for (auto& x : b) x = uniformOpen(rng);
    below += ksTwoSample(a, b) < crit;
  }
  CHECK(below >= 95);
}

TEST_CASE("sample moments and distances") {
  Eigen::MatrixXd s(4, 2);
  s << 1, 2, 3, 4, 5, 0, 7, 2;
  const auto m = sampleMean(s);
  CHECK(m(0) == doctest::Approx(4.0));
  CHECK(m(1) == doctest::Approx(2.0));
  const auto c = sampleCovariance(s);
  CHECK(c(0, 0) == doctest::Approx(20.0 / 3.0));
  CHECK(c(0, 1) == c(1, 0));
  CHECK(c(0, 1) == doctest::Approx(-4.0 / 3.0));
  CHECK(frobeniusRelativeError(c, c) == 0.0);
  const std::vector<double> p{0.5, 0.5}, q{0.25, 0.25, 0.5};
  CHECK(totalVariation(p, q) == doctest::Approx(0.5));
}
