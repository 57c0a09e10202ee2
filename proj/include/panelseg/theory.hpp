#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "panelseg/argmax.hpp"
#include "panelseg/errors.hpp"
#include "panelseg/weights.hpp"

namespace panelseg {

// Deterministic limit objects of the rescaled CUSUM profile: the critical
// function C(i;u,n,r) = w^2(i,n) [V^2(i) r + H^2(i,u)], its argmax set, and
// the consistency machinery built on top of it. Everything here is exact
// closed forms plus integer enumeration; n is assumed small enough that
// enumeration is the oracle.

// Piecewise bilinear tent:
//   H(i,u) = (i/n)(1-u/n) for i <= u,  (u/n)(1-i/n) for i >= u.
inline double h_function(int i, int u, int n) {
  detail::check_index(i, n, "h_function");
  detail::check_index(u, n, "h_function");
  if (i <= u) return (static_cast<double>(i) / n) * (static_cast<double>(n - u) / n);
  return (static_cast<double>(u) / n) * (static_cast<double>(n - i) / n);
}

inline double critical_function(int i, int u, int n, double r, const WeightScheme& scheme,
                                const VarianceFunction& vf) {
  detail::check_index(i, n, "critical_function");
  detail::check_index(u, n, "critical_function");
  if (!(r >= 0.0)) throw InvalidArgument("critical_function: r must be >= 0");
  if (vf.n() != n) throw InvalidArgument("critical_function: V has the wrong length");
  const double w = scheme.weight(i, n);
  const double h = h_function(i, u, n);
  return w * w * (vf.v2(i) * r + h * h);
}

// All maximizers of C(.;u,n,r) within relative tie tolerance 1e-12.
inline std::vector<int> critical_argmax(int u, int n, double r, const WeightScheme& scheme,
                                        const VarianceFunction& vf) {
  detail::check_index(u, n, "critical_argmax");
  if (!(r >= 0.0)) throw InvalidArgument("critical_argmax: r must be >= 0");
  if (vf.n() != n) throw InvalidArgument("critical_argmax: V has the wrong length");
  Vector c(n - 1);
  for (int i = 1; i <= n - 1; ++i) {
    const double w = scheme.weight(i, n);
    const double h = h_function(i, u, n);
    c[i - 1] = w * w * (vf.v2(i) * r + h * h);
  }
  return argmax_with_ties(c);
}

// Normalized noise to change ratio r = (1/n) sigma^2 / Delta_inf^2.
inline double noise_change_ratio(double sigma2, double delta2_inf, int n) {
  if (n < 3) throw InvalidArgument("noise_change_ratio: n must be >= 3");
  if (!(sigma2 > 0.0)) throw InvalidArgument("noise_change_ratio: sigma^2 must be > 0");
  if (!(delta2_inf > 0.0))
    throw VanishingChange("noise_change_ratio: Delta_inf^2 must be > 0");
  return sigma2 / (static_cast<double>(n) * delta2_inf);
}

struct PerfectEstimationResult {
  bool perfect = false;
  // violating pair (i, u) with V(i)/i <= V(u)/u (or broken symmetry at i, n-i)
  int witness_i = 0;
  int witness_u = 0;
  std::string reason;
};

// Exact weights give perfect estimation iff V is symmetric (V(i) = V(n-i))
// and V(i)/i is strictly decreasing; V(1) > V(u)/u is the concave shortcut
// covered by the same sweep.
inline PerfectEstimationResult check_perfect_estimation(const VarianceFunction& vf, int n) {
  if (vf.n() != n) throw InvalidArgument("check_perfect_estimation: V has the wrong length");
  if (!vf.strictly_positive())
    throw NonPositiveVariance("check_perfect_estimation: V must be strictly positive");

  double vmax = 0.0;
  for (int i = 1; i <= n - 1; ++i) vmax = std::max(vmax, vf.v(i));
  for (int i = 1; i <= n - 1; ++i) {
    if (std::abs(vf.v(i) - vf.v(n - i)) > 1e-10 * vmax)
      return {false, i, n - i, "V(i) != V(n-i)"};
  }
  for (int i = 1; i <= n - 2; ++i) {
    if (!(vf.v(i) / i > vf.v(i + 1) / (i + 1)))
      return {false, i, i + 1, "V(i)/i not strictly decreasing"};
  }
  return {true, 0, 0, ""};
}

namespace detail {

// F(x) = w^2(x,n) V^2(x) and G(x) = w^2(x,n) ((x/n)(1-u/n))^2 for the
// weighted scheme with the uncorrelated-noise V.
inline double weighted_f(int x, int n, double gamma) {
  const double pq = detail::pq(x, n);
  return std::pow(pq, 1.0 - 2.0 * gamma);
}

inline double weighted_g(int x, int u, int n, double gamma) {
  const double pq = detail::pq(x, n);
  const double hx = (static_cast<double>(x) / n) * (static_cast<double>(n - u) / n);
  return std::pow(pq, -2.0 * gamma) * hx * hx;
}

}  // namespace detail

// Ratio at which the critical values at y and x cross:
//   R(y,x) = -(G(y) - G(x)) / (F(y) - F(x)),
// for the weighted scheme with uncorrelated-noise V and change point u.
inline double crossing_ratio(int y, int x, int u, int n, double gamma) {
  detail::check_index(y, n, "crossing_ratio");
  detail::check_index(x, n, "crossing_ratio");
  detail::check_index(u, n, "crossing_ratio");
  if (!(gamma >= 0.0 && gamma < 0.5))
    throw UnsupportedGamma("crossing_ratio: gamma must lie in [0, 1/2)");
  const double num = detail::weighted_g(y, u, n, gamma) - detail::weighted_g(x, u, n, gamma);
  const double den = detail::weighted_f(y, n, gamma) - detail::weighted_f(x, n, gamma);
  return -num / den;
}

struct ConsistencyRegion {
  int u = 0;
  int n = 0;
  double gamma = 0.0;
  double bound = 0.0;             // R; +infinity when the competitor set is empty
  int u_star = 0;                 // reflected change point in {ceil(n/2)..n-1}
  double location_fraction = 0.0; // s = u_star / n (the paper reuses zeta for this)
};

// R = min_{n/2 <= i < u*} R(u*, i), with u* the reflection of u past n/2 and
// min over the empty set = infinity. The weighted-scheme estimate with
// uncorrelated noise is consistent at u for 0 <= r < R and inconsistent for
// r > R.
inline ConsistencyRegion consistency_bound(int u, int n, double gamma) {
  detail::check_index(u, n, "consistency_bound");
  if (gamma == 0.5)
    throw UnsupportedGamma("consistency_bound: gamma = 1/2 is excluded");
  if (!(gamma >= 0.0 && gamma < 0.5))
    throw UnsupportedGamma("consistency_bound: gamma must lie in [0, 1/2)");

  const int u_star = (u <= n / 2) ? n - u : u;
  const int i_first = (n + 1) / 2;  // smallest integer >= n/2
  double bound = std::numeric_limits<double>::infinity();
  for (int i = i_first; i < u_star; ++i)
    bound = std::min(bound, crossing_ratio(u_star, i, u_star, n, gamma));

  ConsistencyRegion out;
  out.u = u;
  out.n = n;
  out.gamma = gamma;
  out.bound = bound;
  out.u_star = u_star;
  out.location_fraction = static_cast<double>(u_star) / n;
  return out;
}

// Boundary function
//   B(gamma) = (4g^2 + 6g^{3/2} - 3g^{1/2} - 1) / (8g^2 + 8g^{3/2} - 4g^{1/2} - 2g - 1)
// on [0, 1/2), and 2^{-1/2} at gamma = 1/2; monotone decreasing, continuous,
// always >= 2^{-1/2}. Below B(gamma) the bound R is attained at the adjacent
// competitor u*-1.
inline double boundary(double gamma) {
  if (!(gamma >= 0.0 && gamma <= 0.5))
    throw InvalidArgument("boundary: gamma must lie in [0, 1/2]");
  if (gamma == 0.5) return std::sqrt(0.5);
  const double g12 = std::sqrt(gamma);
  const double g32 = gamma * g12;
  const double g2 = gamma * gamma;
  const double num = 4.0 * g2 + 6.0 * g32 - 3.0 * g12 - 1.0;
  const double den = 8.0 * g2 + 8.0 * g32 - 4.0 * g12 - 2.0 * gamma - 1.0;
  return num / den;
}

// Large-n limit of R(s, gamma) at location fraction zeta:
//   zeta (1 - zeta) (b - zeta) / (zeta - 1/2),  b = (gamma-1)/(2 gamma - 1),
// valid for zeta <= B(gamma). gamma = 1/4 admits the full two-branch formula
// on (1/2, 1), with the branches meeting at zeta = 3/4 (value 9/16).
inline double bound_limit(double zeta, double gamma) {
  if (!(zeta > 0.5 && zeta < 1.0))
    throw InvalidArgument("bound_limit: zeta must lie in (1/2, 1)");
  if (!(gamma >= 0.0 && gamma < 0.5))
    throw UnsupportedGamma("bound_limit: gamma must lie in [0, 1/2)");

  if (gamma == 0.25) {
    if (zeta <= 0.75)
      return zeta * (1.0 - zeta) * (1.5 - zeta) / (zeta - 0.5);
    const double root = std::sqrt(1.0 - zeta);
    const double num =
        (zeta - 1.0) * (zeta - 1.0) * (zeta * (zeta + 1.0) + (zeta / 2.0 - 1.0) * root - 1.0);
    const double den = zeta * (zeta - 1.0) + (zeta / 2.0) * root;
    return num / den;
  }

  if (zeta > boundary(gamma))
    throw OutsideValidity("bound_limit: zeta exceeds B(gamma) for gamma != 1/4");
  const double b = (gamma - 1.0) / (2.0 * gamma - 1.0);
  return zeta * (1.0 - zeta) * (b - zeta) / (zeta - 0.5);
}

// Argmax of w^2(i,n) V^2(i): the spurious change locations identified when
// the average change vanishes (Delta_inf = 0).
inline std::vector<int> spurious_argmax(const WeightScheme& scheme, const VarianceFunction& vf,
                                        int n) {
  if (vf.n() != n) throw InvalidArgument("spurious_argmax: V has the wrong length");
  Vector c(n - 1);
  for (int i = 1; i <= n - 1; ++i) {
    const double w = scheme.weight(i, n);
    c[i - 1] = w * w * vf.v2(i);
  }
  return argmax_with_ties(c);
}

// Text summary: perfect-estimation verdict for the given V plus the
// consistency bound table over all change points (weighted scheme,
// uncorrelated-noise V).
inline std::string theory_report(int n, double gamma, const VarianceFunction& vf) {
  std::ostringstream os;
  os << "theory report (n = " << n << ", gamma = " << gamma << ")\n";
  const auto perfect = check_perfect_estimation(vf, n);
  os << "exact-weight perfect estimation: " << (perfect.perfect ? "yes" : "no");
  if (!perfect.perfect)
    os << "  [" << perfect.reason << " at (" << perfect.witness_i << ", " << perfect.witness_u
       << ")]";
  os << "\n";
  os << "consistency bounds R(u) for weighted(gamma), uncorrelated noise:\n";
  os << "u,u_star,s,R\n";
  for (int u = 1; u <= n - 1; ++u) {
    const auto region = consistency_bound(u, n, gamma);
    os << u << "," << region.u_star << "," << region.location_fraction << ",";
    if (std::isinf(region.bound))
      os << "inf";
    else
      os << region.bound;
    os << "\n";
  }
  return os.str();
}

}  // namespace panelseg
