#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace qnet {

enum class RateKind { Constant, AffineSaturated, Tabulated };

/// A nonnegative state-dependent rate x -> r(x) on the orthant, restricted to
/// three parametric families so that growth and Lipschitz properties can be
/// certified:
///
///   Constant         r(x) = c
///   AffineSaturated  r(x) = min(cap, max(0, c + w.x))
///   Tabulated        r(x) = g(w.x), g piecewise linear through (knots, values),
///                    held at values.front() left of the first knot and
///                    continued with `tailSlope` right of the last; clamped at 0.
///
/// Every rate also carries a multiplicative `scale`, which lets callers turn
/// clock speeds into intensities without changing the family.
class RateFunction {
 public:
  RateFunction() = default;

  static RateFunction constant(double value);
  static RateFunction affine(double intercept, std::vector<double> weights,
                             double cap = std::numeric_limits<double>::infinity());
  static RateFunction tabulated(std::vector<double> weights, std::vector<double> knots,
                                std::vector<double> values, double tailSlope);

  double operator()(std::span<const double> x) const;

  RateKind kind() const noexcept { return kind_; }
  bool isConstant() const noexcept { return kind_ == RateKind::Constant; }
  bool isIdenticallyZero() const noexcept;

  /// H with r(x) <= H (1 + |x|) for all x in the orthant. Either the value
  /// declared with `withDeclaredGrowthBound` or one computed from the
  /// parameters (which always holds).
  double growthBound() const noexcept;
  bool hasDeclaredGrowthBound() const noexcept { return declaredBound_.has_value(); }
  RateFunction withDeclaredGrowthBound(double bound) const;

  /// Lipschitz constant of r with respect to the Euclidean norm.
  double lipschitzBound() const noexcept;

  RateFunction scaled(double factor) const;
  double scale() const noexcept { return scale_; }

  /// Number of state coordinates the function reads (0 for constants).
  std::size_t arity() const noexcept { return weights_.size(); }

 private:
  double unscaled(std::span<const double> x) const;
  double projection(std::span<const double> x) const;

  RateKind kind_ = RateKind::Constant;
  double scale_ = 1.0;
  double intercept_ = 0.0;
  double cap_ = std::numeric_limits<double>::infinity();
  double tailSlope_ = 0.0;
  std::vector<double> weights_;
  std::vector<double> knots_;
  std::vector<double> values_;
  std::optional<double> declaredBound_;
};

/// One rate per station.
using RateVector = std::vector<RateFunction>;

/// Evaluates every component at x into out.
void evaluate(const RateVector& rates, std::span<const double> x, std::span<double> out);

RateVector constantRates(std::vector<double> values);
RateVector zeroRates(std::size_t stations);

}  // namespace qnet
