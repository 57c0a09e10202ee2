#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "panelseg/covariance.hpp"
#include "panelseg/errors.hpp"
#include "panelseg/weights.hpp"

namespace panelseg {

enum class RegressionOrientation { Convex, Concave };

struct ConvexRegressionDiagnostics {
  long sweeps = 0;
  double max_violation = 0.0;      // most negative second difference, flipped sign
  double complementarity = 0.0;    // max |mu_j * (C x)_j|
};

// Least-squares convex regression: the Euclidean projection of w_hat onto
// the sequences admitting supporting lines w(j) >= w(i) + g_i (j - i) for
// all i, j. Eliminating the free slopes g_i, that set is exactly
// { x : x_{j} - 2 x_{j+1} + x_{j+2} >= 0 }, so we solve the projection's
// dual nonnegative QP by coordinate descent:
//   x = w_hat + C^T mu,   mu_j <- max(0, mu_j - (C x)_j / 6),
// where C stacks the second-difference rows (1, -2, 1) and 6 = ||c_j||^2.
// Each update is O(1); a feasible mu >= 0 is maintained throughout and the
// returned x is primal feasible to tol with vanishing complementarity.
inline Vector convex_regression_fit(const Vector& w_hat, RegressionOrientation orientation,
                                    ConvexRegressionDiagnostics* diag = nullptr) {
  const int m = static_cast<int>(w_hat.size());
  if (m < 2) throw InvalidArgument("convex_regression: need at least 2 points (n-1 >= 2)");
  if (!w_hat.allFinite()) throw InvalidArgument("convex_regression: input must be finite");

  const double sign = (orientation == RegressionOrientation::Concave) ? -1.0 : 1.0;
  Vector x = sign * w_hat;
  const int nc = m - 2;  // number of second-difference constraints
  if (nc <= 0) {
    if (diag) *diag = {};
    return w_hat;  // two points are always convex
  }

  const double scale = std::max(1.0, w_hat.cwiseAbs().maxCoeff());
  // feasibility is an absolute 1e-8 contract; aim below it so that
  // re-projection of a returned fit moves by well under the tolerance
  const double feas_tol = 5e-9;
  const double comp_tol = 1e-8 * scale;
  const long max_sweeps = 10L * static_cast<long>(m) * static_cast<long>(m);

  Vector mu = Vector::Zero(nc);
  long sweep = 0;
  double worst = 0.0, comp = 0.0;
  for (sweep = 1; sweep <= max_sweeps; ++sweep) {
    for (int j = 0; j < nc; ++j) {
      const double viol = x[j] - 2.0 * x[j + 1] + x[j + 2];  // (C x)_j
      const double step = std::max(-mu[j], -viol / 6.0);
      if (step != 0.0) {
        mu[j] += step;
        x[j] += step;
        x[j + 1] -= 2.0 * step;
        x[j + 2] += step;
      }
    }
    // KKT: primal feasibility and complementary slackness
    worst = 0.0;
    comp = 0.0;
    for (int j = 0; j < nc; ++j) {
      const double viol = x[j] - 2.0 * x[j + 1] + x[j + 2];
      worst = std::max(worst, -viol);
      comp = std::max(comp, std::abs(mu[j] * viol));
    }
    if (worst <= feas_tol && comp <= comp_tol) break;
  }
  if (diag) *diag = {sweep, worst, comp};
  if (worst > feas_tol || comp > comp_tol) {
    throw SolverFailure("convex_regression: no convergence after " +
                        std::to_string(max_sweeps) + " sweeps; max violation " +
                        std::to_string(worst) + ", complementarity " + std::to_string(comp));
  }
  return sign * x;
}

// Post-processing of estimated exact weights (the smoothing step applied to
// w_hat(i) = w(i) + noise). Falls back to w^standard if the fit leaves the
// positive cone, mirroring the rule used for the covariance-based weights.
inline EstimatedWeights convex_regression(const Vector& w_hat,
                                          RegressionOrientation orientation) {
  Vector fit = convex_regression_fit(w_hat, orientation);
  if ((fit.array() > 0.0).all())
    return EstimatedWeights{std::move(fit), false, WeightSource::ExactReg};
  const int n = static_cast<int>(w_hat.size()) + 1;
  return EstimatedWeights{WeightScheme::standard().vector(n), true, WeightSource::ExactReg};
}

}  // namespace panelseg
