#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <utility>

#include "panelseg/errors.hpp"
#include "panelseg/panel.hpp"

namespace panelseg {

namespace detail {

// (i/n)(1-i/n) evaluated as (i/n)*((n-i)/n) so that the i <-> n-i symmetry
// holds bit-exactly.
inline double pq(int i, int n) {
  return (static_cast<double>(i) / n) * (static_cast<double>(n - i) / n);
}

inline void check_index(int i, int n, const char* who) {
  if (n < 3) throw InvalidArgument(std::string(who) + ": n must be >= 3");
  if (i < 1 || i > n - 1)
    throw InvalidArgument(std::string(who) + ": index must lie in {1..n-1}");
}

}  // namespace detail

// Closed-form V^2(i) = Var(S_{i,k}(eps)) / sigma^2 for the supported noise
// models. Uncorrelated noise gives (i/n)(1-i/n); the MA(1) model gives
//   V^2(i) = C*alpha(phi)*(i/n)(1-i/n) - 2*C*phi/n,
//   alpha(phi) = 1 + phi^2 + 2phi + 2phi/n,
// where C = (sigma_tilde/sigma)^2 (1+theta^2) simplifies to 1/(1+phi^2),
// so V^2 never depends on theta.
inline double v_squared(const NoiseModel& model, int i, int n) {
  detail::check_index(i, n, "v_squared");
  const double pq = detail::pq(i, n);
  if (model.kind() == NoiseKind::IID) return pq;
  const double phi = model.phi();
  const double c = 1.0 / (1.0 + phi * phi);
  const double alpha = 1.0 + phi * phi + 2.0 * phi + 2.0 * phi / n;
  return c * alpha * pq - 2.0 * c * phi / n;
}

// V^2(1..n-1) as a vector. Positivity is not enforced here; operations that
// need a strictly positive V check it themselves.
class VarianceFunction {
 public:
  explicit VarianceFunction(Vector v_squared) : v2_(std::move(v_squared)) {
    if (v2_.size() < 2)
      throw InvalidArgument("VarianceFunction: need at least 2 values (n >= 3)");
    if (!v2_.allFinite())
      throw InvalidArgument("VarianceFunction: values must be finite");
  }

  static VarianceFunction from_model(const NoiseModel& model, int n) {
    if (n < 3) throw InvalidArgument("VarianceFunction: n must be >= 3");
    Vector v2(n - 1);
    for (int i = 1; i <= n - 1; ++i) v2[i - 1] = v_squared(model, i, n);
    return VarianceFunction(std::move(v2));
  }

  int n() const { return static_cast<int>(v2_.size()) + 1; }
  double v2(int i) const { return v2_[i - 1]; }
  double v(int i) const { return std::sqrt(v2_[i - 1]); }
  const Vector& values() const { return v2_; }
  bool strictly_positive() const { return (v2_.array() > 0.0).all(); }

 private:
  Vector v2_;
};

// w^exact(i) = 1/V(i), normalized with alpha = 1. Downstream estimators are
// invariant to a positive rescaling of the weights.
inline Vector exact_weights_from_v(const VarianceFunction& vf) {
  Vector w(vf.values().size());
  for (int i = 1; i <= static_cast<int>(w.size()); ++i) {
    if (!(vf.v2(i) > 0.0))
      throw NonPositiveVariance("exact_weights_from_v: V^2(i) must be strictly positive");
    w[i - 1] = 1.0 / std::sqrt(vf.v2(i));
  }
  return w;
}

enum class WeightTag { Simple, Standard, Weighted, Exact };

// Position-dependent weights on i = 1..n-1:
//   simple      w = 1
//   standard    w = ((i/n)(1-i/n))^{-1/2}
//   weighted    w = ((i/n)(1-i/n))^{-gamma},  0 <= gamma <= 1/2
//   exact       w = 1/V(i)
class WeightScheme {
 public:
  static WeightScheme simple() { return WeightScheme(WeightTag::Simple, 0.0, {}); }
  static WeightScheme standard() { return WeightScheme(WeightTag::Standard, 0.5, {}); }
  static WeightScheme weighted(double gamma) {
    if (!(gamma >= 0.0 && gamma <= 0.5))
      throw InvalidArgument("WeightScheme: gamma must lie in [0, 1/2]");
    return WeightScheme(WeightTag::Weighted, gamma, {});
  }
  static WeightScheme exact(Vector v) {
    if (v.size() < 2 || !v.allFinite() || !(v.array() > 0.0).all())
      throw InvalidArgument("WeightScheme: exact V must be strictly positive, length n-1");
    return WeightScheme(WeightTag::Exact, 0.0, std::move(v));
  }
  static WeightScheme exact_from(const VarianceFunction& vf) {
    Vector v(vf.values().size());
    for (int i = 1; i <= static_cast<int>(v.size()); ++i) {
      if (!(vf.v2(i) > 0.0))
        throw NonPositiveVariance("WeightScheme: V^2 must be strictly positive");
      v[i - 1] = vf.v(i);
    }
    return exact(std::move(v));
  }

  WeightTag tag() const { return tag_; }
  double gamma() const { return gamma_; }
  const Vector& exact_v() const { return exact_v_; }

  double weight(int i, int n) const {
    detail::check_index(i, n, "weight");
    switch (tag_) {
      case WeightTag::Simple:
        return 1.0;
      case WeightTag::Standard:
      case WeightTag::Weighted:
        return power_weight(detail::pq(i, n), gamma_);
      case WeightTag::Exact:
        if (exact_v_.size() != n - 1)
          throw InvalidArgument("weight: exact V has the wrong length for this n");
        return 1.0 / exact_v_[i - 1];
    }
    return 1.0;
  }

  Vector vector(int n) const {
    Vector w(n - 1);
    for (int i = 1; i <= n - 1; ++i) w[i - 1] = weight(i, n);
    return w;
  }

  std::string name() const {
    switch (tag_) {
      case WeightTag::Simple: return "simple";
      case WeightTag::Standard: return "standard";
      case WeightTag::Weighted: return "weighted(" + std::to_string(gamma_) + ")";
      case WeightTag::Exact: return "exact";
    }
    return "?";
  }

 private:
  WeightScheme(WeightTag tag, double gamma, Vector v)
      : tag_(tag), gamma_(gamma), exact_v_(std::move(v)) {}

  // standard() and weighted(1/2) share this path, so they agree bit-exactly.
  static double power_weight(double pq, double gamma) {
    if (gamma == 0.0) return 1.0;
    if (gamma == 0.5) return 1.0 / std::sqrt(pq);
    return std::pow(pq, -gamma);
  }

  WeightTag tag_;
  double gamma_;
  Vector exact_v_;
};

}  // namespace panelseg
