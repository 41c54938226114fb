#include "qnet/rate_function.hpp"

#include "qnet/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qnet {
namespace {

double positivePartNorm(const std::vector<double>& w) {
  double s = 0.0;
  for (double v : w) s += std::max(v, 0.0) * std::max(v, 0.0);
  return std::sqrt(s);
}

double norm(const std::vector<double>& w) {
  double s = 0.0;
  for (double v : w) s += v * v;
  return std::sqrt(s);
}

void requireFinite(const std::vector<double>& v, const char* what) {
  for (double x : v)
    if (!std::isfinite(x)) throw ContractViolation(std::string("RateFunction: non-finite ") + what);
}

}  // namespace

RateFunction RateFunction::constant(double value) {
  if (!std::isfinite(value) || value < 0.0) throw ContractViolation("RateFunction: constant rate must be finite and >= 0");
  RateFunction r;
  r.kind_ = RateKind::Constant;
  r.intercept_ = value;
  return r;
}

RateFunction RateFunction::affine(double intercept, std::vector<double> weights, double cap) {
  if (!std::isfinite(intercept)) throw ContractViolation("RateFunction: non-finite intercept");
  requireFinite(weights, "weight");
  if (std::isnan(cap) || cap < 0.0) throw ContractViolation("RateFunction: cap must be >= 0");
  RateFunction r;
  r.kind_ = RateKind::AffineSaturated;
  r.intercept_ = intercept;
  r.weights_ = std::move(weights);
  r.cap_ = cap;
  return r;
}

RateFunction RateFunction::tabulated(std::vector<double> weights, std::vector<double> knots,
                                     std::vector<double> values, double tailSlope) {
  if (knots.empty() || knots.size() != values.size())
    throw ContractViolation("RateFunction: tabulated rate needs matching, nonempty knots and values");
  requireFinite(weights, "weight");
  requireFinite(knots, "knot");
  requireFinite(values, "value");
  if (!std::isfinite(tailSlope)) throw ContractViolation("RateFunction: non-finite tail slope");
  for (std::size_t k = 1; k < knots.size(); ++k)
    if (!(knots[k] > knots[k - 1])) throw ContractViolation("RateFunction: knots must be strictly increasing");
  for (double v : values)
    if (v < 0.0) throw ContractViolation("RateFunction: tabulated values must be >= 0");
  RateFunction r;
  r.kind_ = RateKind::Tabulated;
  r.weights_ = std::move(weights);
  r.knots_ = std::move(knots);
  r.values_ = std::move(values);
  r.tailSlope_ = tailSlope;
  return r;
}

double RateFunction::projection(std::span<const double> x) const {
  double s = 0.0;
  const std::size_t m = std::min(weights_.size(), x.size());
  for (std::size_t j = 0; j < m; ++j) s += weights_[j] * x[j];
  return s;
}

double RateFunction::unscaled(std::span<const double> x) const {
  switch (kind_) {
    case RateKind::Constant:
      return intercept_;
    case RateKind::AffineSaturated:
      return std::min(cap_, std::max(0.0, intercept_ + projection(x)));
    case RateKind::Tabulated: {
      const double s = projection(x);
      if (s <= knots_.front()) return values_.front();
      if (s >= knots_.back()) return std::max(0.0, values_.back() + tailSlope_ * (s - knots_.back()));
      const auto hi = static_cast<std::size_t>(std::upper_bound(knots_.begin(), knots_.end(), s) - knots_.begin());
      const std::size_t lo = hi - 1;
      const double w = (s - knots_[lo]) / (knots_[hi] - knots_[lo]);
      return (1.0 - w) * values_[lo] + w * values_[hi];
    }
  }
  return 0.0;
}

double RateFunction::operator()(std::span<const double> x) const { return scale_ * unscaled(x); }

bool RateFunction::isIdenticallyZero() const noexcept {
  if (scale_ == 0.0) return true;
  switch (kind_) {
    case RateKind::Constant:
      return intercept_ == 0.0;
    case RateKind::AffineSaturated:
      return cap_ == 0.0 || (intercept_ <= 0.0 && std::all_of(weights_.begin(), weights_.end(), [](double w) { return w <= 0.0; }));
    case RateKind::Tabulated:
      return tailSlope_ <= 0.0 && std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
  }
  return false;
}

double RateFunction::growthBound() const noexcept {
  if (declaredBound_) return *declaredBound_;
  double h = 0.0;
  switch (kind_) {
    case RateKind::Constant:
      h = intercept_;
      break;
    case RateKind::AffineSaturated:
      h = std::min(cap_, std::max(std::max(intercept_, 0.0), positivePartNorm(weights_)));
      break;
    case RateKind::Tabulated: {
      const double top = *std::max_element(values_.begin(), values_.end());
      const double slope = std::max(tailSlope_, 0.0);
      h = std::max(top + slope * std::abs(knots_.back()), slope * norm(weights_));
      break;
    }
  }
  return scale_ * h;
}

RateFunction RateFunction::withDeclaredGrowthBound(double bound) const {
  if (!std::isfinite(bound) || bound < 0.0) throw ContractViolation("RateFunction: growth bound must be finite and >= 0");
  RateFunction r = *this;
  r.declaredBound_ = bound;
  return r;
}

double RateFunction::lipschitzBound() const noexcept {
  double slope = 0.0;
  switch (kind_) {
    case RateKind::Constant:
      return 0.0;
    case RateKind::AffineSaturated:
      slope = 1.0;
      break;
    case RateKind::Tabulated:
      slope = std::abs(tailSlope_);
      for (std::size_t k = 1; k < knots_.size(); ++k)
        slope = std::max(slope, std::abs(values_[k] - values_[k - 1]) / (knots_[k] - knots_[k - 1]));
      break;
  }
  return std::abs(scale_) * slope * norm(weights_);
}

RateFunction RateFunction::scaled(double factor) const {
  if (!std::isfinite(factor) || factor < 0.0) throw ContractViolation("RateFunction: scale factor must be finite and >= 0");
  RateFunction r = *this;
  r.scale_ *= factor;
  if (r.declaredBound_) *r.declaredBound_ *= factor;
  return r;
}

void evaluate(const RateVector& rates, std::span<const double> x, std::span<double> out) {
  for (std::size_t i = 0; i < rates.size(); ++i) out[i] = rates[i](x);
}

RateVector constantRates(std::vector<double> values) {
  RateVector r;
  r.reserve(values.size());
  for (double v : values) r.push_back(RateFunction::constant(v));
  return r;
}

RateVector zeroRates(std::size_t stations) { return RateVector(stations, RateFunction::constant(0.0)); }

}  // namespace qnet
