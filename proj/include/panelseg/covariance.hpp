#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "panelseg/errors.hpp"
#include "panelseg/panel.hpp"
#include "panelseg/weights.hpp"

namespace panelseg {

enum class CovMethod { Natural, BandedTraining, BandedCentered };

struct CovarianceEstimate {
  Matrix sigma;  // n x n, exactly symmetric
  CovMethod method = CovMethod::Natural;
  int band = -1;       // h, banded methods only
  int n1 = 0, n2 = 0;  // training window, banded methods only
};

// Cross-panel sample covariance with divisor d-1:
//   Sigma_{j,k} = 1/(d-1) * sum_p (Y_{j,p} - Ybar_j)(Y_{k,p} - Ybar_k),
// where Ybar_j is the mean over panels at time j. Consistent when the means
// at each time point are common across panels (M_{i,k} = c_i); detecting
// violations of that assumption is up to the caller.
inline CovarianceEstimate natural_covariance(const Matrix& y) {
  const int n = static_cast<int>(y.rows());
  const int d = static_cast<int>(y.cols());
  if (d <= 1) throw InsufficientPanels("natural_covariance: needs d > 1 panels");
  Matrix centered = y.colwise() - y.rowwise().mean();
  Matrix sigma = Matrix::Zero(n, n);
  sigma.selfadjointView<Eigen::Lower>().rankUpdate(centered, 1.0 / (d - 1));
  sigma = sigma.selfadjointView<Eigen::Lower>();  // exact symmetry
  return CovarianceEstimate{std::move(sigma), CovMethod::Natural, -1, 0, 0};
}

inline CovarianceEstimate natural_covariance(const PanelMatrix& y) {
  return natural_covariance(y.values());
}

// f_i(Sigma) = a_{i,.} Sigma a_{i,.}^T with the partial-sum contrast
//   a_{i,j} = n^{-1/2} * (1 - i/n) for j <= i,  -n^{-1/2} * (i/n) for j > i,
// so that V^2(i) = f_i(Cov(Y_{.,1})) / sigma^2.
inline double quadratic_form_f(const Matrix& sigma, int i) {
  const int n = static_cast<int>(sigma.rows());
  if (sigma.cols() != n || n < 2)
    throw InvalidArgument("quadratic_form_f: Sigma must be square, n >= 2");
  if (i < 1 || i > n - 1)
    throw InvalidArgument("quadratic_form_f: i must lie in {1..n-1}");
  const double c1 = (1.0 - static_cast<double>(i) / n) / std::sqrt(static_cast<double>(n));
  const double c2 = -(static_cast<double>(i) / n) / std::sqrt(static_cast<double>(n));
  const double s11 = sigma.topLeftCorner(i, i).sum();
  const double s12 = sigma.topRightCorner(i, n - i).sum();
  const double s21 = sigma.bottomLeftCorner(n - i, i).sum();
  const double s22 = sigma.bottomRightCorner(n - i, n - i).sum();
  return c1 * c1 * s11 + c1 * c2 * (s12 + s21) + c2 * c2 * s22;
}

// All f_i at once in O(n^2) via 2D prefix sums of Sigma.
inline Vector quadratic_form_all(const Matrix& sigma) {
  const int n = static_cast<int>(sigma.rows());
  if (sigma.cols() != n || n < 2)
    throw InvalidArgument("quadratic_form_all: Sigma must be square, n >= 2");
  Matrix prefix = Matrix::Zero(n + 1, n + 1);
  for (int a = 1; a <= n; ++a)
    for (int b = 1; b <= n; ++b)
      prefix(a, b) =
          sigma(a - 1, b - 1) + prefix(a - 1, b) + prefix(a, b - 1) - prefix(a - 1, b - 1);
  const double total = prefix(n, n);
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
  Vector f(n - 1);
  for (int i = 1; i <= n - 1; ++i) {
    const double c1 = (1.0 - static_cast<double>(i) / n) * inv_sqrt_n;
    const double c2 = -(static_cast<double>(i) / n) * inv_sqrt_n;
    const double s11 = prefix(i, i);
    const double s12 = prefix(i, n) - s11;
    const double s21 = prefix(n, i) - s11;
    const double s22 = total - s11 - s12 - s21;
    f[i - 1] = c1 * c1 * s11 + c1 * c2 * (s12 + s21) + c2 * c2 * s22;
  }
  return f;
}

// Toeplitz-banded estimate from a training window [n1, n2] assumed free of
// mean changes. The within-window covariances are averaged along diagonals,
//   xi_r = 1/(n2-n1-r+1) * sum_{j=n1}^{n2-r} Sigma'_{j,j+r},
// and the banded n x n matrix has Sigma_{j,j+r} = xi_r for r <= min(h, n-j)
// and 0 beyond. With centered = true each panel is first demeaned by its own
// training-window average (a heuristic for panels whose levels differ).
inline CovarianceEstimate banded_covariance(const Matrix& y, int n1, int n2, int h,
                                            bool centered) {
  const int n = static_cast<int>(y.rows());
  const int d = static_cast<int>(y.cols());
  if (d <= 1) throw InsufficientPanels("banded_covariance: needs d > 1 panels");
  if (!(1 <= n1 && n1 < n2 && n2 <= n))
    throw InvalidTrainingWindow("banded_covariance: need 1 <= n1 < n2 <= n");
  if (h < 0 || h > n2 - n1)
    throw InvalidTrainingWindow("banded_covariance: need 0 <= h <= n2-n1");

  const int w = n2 - n1 + 1;
  Matrix block = y.middleRows(n1 - 1, w);
  if (centered) block.rowwise() -= y.middleRows(n1 - 1, w).colwise().mean();
  const Matrix sigma_train = natural_covariance(block).sigma;

  Vector xi(n2 - n1 + 1);
  for (int r = 0; r <= n2 - n1; ++r) {
    double acc = 0.0;
    for (int j = 0; j + r < w; ++j) acc += sigma_train(j, j + r);
    xi[r] = acc / static_cast<double>(w - r);
  }

  Matrix sigma = Matrix::Zero(n, n);
  for (int j = 1; j <= n; ++j) {
    const int rmax = std::min(h, n - j);
    for (int r = 0; r <= rmax; ++r) {
      sigma(j - 1, j - 1 + r) = xi[r];
      sigma(j - 1 + r, j - 1) = xi[r];
    }
  }
  return CovarianceEstimate{std::move(sigma),
                            centered ? CovMethod::BandedCentered : CovMethod::BandedTraining,
                            h, n1, n2};
}

inline CovarianceEstimate banded_covariance(const PanelMatrix& y, int n1, int n2, int h,
                                            bool centered) {
  return banded_covariance(y.values(), n1, n2, h, centered);
}

// Time covariance of the noise model in closed form (used as the oracle for
// the V^2 cross-checks). MA(1): diagonal (1+phi^2)(1+theta^2)*s2, first
// off-diagonal phi(1+theta^2)*s2, zero beyond.
inline Matrix analytic_covariance(const NoiseModel& model, int n) {
  if (n < 2) throw InvalidArgument("analytic_covariance: n must be >= 2");
  Matrix sigma = Matrix::Zero(n, n);
  if (model.kind() == NoiseKind::IID) {
    sigma.diagonal().setConstant(model.sigma2_tilde());
    return sigma;
  }
  const double s2 = model.sigma2_tilde();
  const double phi = model.phi(), theta = model.theta();
  const double diag = (1.0 + phi * phi) * (1.0 + theta * theta) * s2;
  const double off = phi * (1.0 + theta * theta) * s2;
  sigma.diagonal().setConstant(diag);
  for (int j = 0; j + 1 < n; ++j) {
    sigma(j, j + 1) = off;
    sigma(j + 1, j) = off;
  }
  return sigma;
}

enum class WeightSource { ExactEst, ExactBanded, ExactBandedCentered, ExactReg };

struct EstimatedWeights {
  Vector weights;      // length n-1, strictly positive
  bool fallback_used;  // true => weights equal w^standard
  WeightSource source;
};

inline const char* to_string(WeightSource s) {
  switch (s) {
    case WeightSource::ExactEst: return "exact-est";
    case WeightSource::ExactBanded: return "exact-banded";
    case WeightSource::ExactBandedCentered: return "exact-banded-centered";
    case WeightSource::ExactReg: return "exact-reg";
  }
  return "?";
}

// w(i) = f_i(Sigma_hat)^{-1/2} when every f_i(Sigma_hat) is strictly
// positive; otherwise the whole vector is replaced by w^standard and the
// fallback flag is set. sigma^2 is not estimated: the weights are scale-free
// for the argmax.
inline EstimatedWeights estimated_exact_weights(const CovarianceEstimate& est) {
  const int n = static_cast<int>(est.sigma.rows());
  WeightSource source = WeightSource::ExactEst;
  if (est.method == CovMethod::BandedTraining) source = WeightSource::ExactBanded;
  if (est.method == CovMethod::BandedCentered) source = WeightSource::ExactBandedCentered;

  Vector f = quadratic_form_all(est.sigma);
  if ((f.array() > 0.0).all()) {
    Vector w = f.array().rsqrt();
    return EstimatedWeights{std::move(w), false, source};
  }
  return EstimatedWeights{WeightScheme::standard().vector(n), true, source};
}

}  // namespace panelseg
