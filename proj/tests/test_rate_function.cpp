#include "qnet/error.hpp"
#include "qnet/rate_function.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace qnet;

TEST_CASE("constant and affine rates") {
  const std::vector<double> x{2.0, 3.0};
  CHECK(RateFunction::constant(1.5)(x) == 1.5);
  CHECK(RateFunction::constant(0)(x) == 0.0);
  CHECK(RateFunction::constant(0).isIdenticallyZero());
  const auto a = RateFunction::affine(1.0, {0.5, -0.25});
  CHECK(a(x) == doctest::Approx(1.0 + 1.0 - 0.75));
  const auto capped = RateFunction::affine(0.5, {1.0}, 2.0);
  CHECK(capped(std::vector<double>{0.0}) == 0.5);
  CHECK(capped(std::vector<double>{10.0}) == 2.0);
  const auto floored = RateFunction::affine(1.0, {-1.0});
  CHECK(floored(std::vector<double>{5.0}) == 0.0);
  CHECK_THROWS_AS(RateFunction::constant(-1.0), ContractViolation);
}

TEST_CASE("tabulated rates interpolate with a linear tail") {
  const auto t = RateFunction::tabulated({1.0}, {0.0, 1.0, 2.0}, {1.0, 3.0, 2.0}, 0.5);
  CHECK(t(std::vector<double>{0.0}) == doctest::Approx(1.0));
  CHECK(t(std::vector<double>{0.5}) == doctest::Approx(2.0));
  CHECK(t(std::vector<double>{1.5}) == doctest::Approx(2.5));
  CHECK(t(std::vector<double>{4.0}) == doctest::Approx(3.0));
  CHECK(t.lipschitzBound() == doctest::Approx(2.0));
}

TEST_CASE("growth and Lipschitz bounds hold on random points") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 50.0);
  const std::vector<RateFunction> rates{
      RateFunction::constant(2.0), RateFunction::affine(1.0, {0.5, 2.0}), RateFunction::affine(3.0, {-1.0, 1.0}, 5.0),
      RateFunction::tabulated({1.0, 1.0}, {0.0, 2.0, 5.0}, {0.5, 4.0, 1.0}, 0.25)};
  for (const auto& r : rates) {
    for (int i = 0; i < 2000; ++i) {
      const std::vector<double> x{u(rng), u(rng)}, y{u(rng), u(rng)};
      const double nx = std::hypot(x[0], x[1]);
      const double v = r(x);
      CHECK(v >= 0.0);
      CHECK(v <= r.growthBound() * (1 + nx) + 1e-12);
      const double d = std::hypot(x[0] - y[0], x[1] - y[1]);
      CHECK(std::abs(v - r(y)) <= r.lipschitzBound() * d + 1e-9);
    }
  }
}

TEST_CASE("scaling multiplies values and bounds") {
  const auto r = RateFunction::affine(1.0, {2.0}).scaled(0.5);
  CHECK(r(std::vector<double>{1.0}) == doctest::Approx(1.5));
  CHECK(r.lipschitzBound() == doctest::Approx(1.0));
  CHECK(r.scale() == 0.5);
}
