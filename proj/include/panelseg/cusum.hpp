#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "panelseg/argmax.hpp"
#include "panelseg/errors.hpp"
#include "panelseg/panel.hpp"

namespace panelseg {

// Cumulated centered observations per panel,
//   S_{i,k} = n^{-1/2} sum_{j<=i} (X_{j,k} - Xbar_{n,k}),  i = 1..n-1.
// The implied i = n row is identically zero and omitted.
inline Matrix partial_sums(const Matrix& x) {
  const int n = static_cast<int>(x.rows());
  const int d = static_cast<int>(x.cols());
  if (n < 3) throw InvalidPanelLength("partial_sums: n must be >= 3");
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  Matrix s(n - 1, d);
  for (int k = 0; k < d; ++k) {
    const double mean = x.col(k).mean();
    double run = 0.0;
    for (int i = 0; i < n - 1; ++i) {
      run += x(i, k) - mean;
      s(i, k) = scale * run;
    }
  }
  return s;
}

struct CusumProfile {
  Vector t;                    // t(i), i = 1..n-1 (stored at index i-1)
  std::vector<int> argmax_set; // all maximizers within relative tolerance 1e-12
  int estimate = 0;            // smallest maximizer
};

// Weighted CUSUM statistic
//   t(i) = w^2(i,n) * sum_k | sum_{j<=i} (Y_{j,k} - Ybar_{n,k}) |^2.
// Inner sums run over ascending j, the k-sum over ascending k; the k-sum
// uses compensated summation once d >= 10^4 so results are reproducible.
inline CusumProfile cusum_statistic(const PanelMatrix& y, const Vector& w) {
  const int n = y.n();
  const int d = y.d();
  if (w.size() != n - 1)
    throw InvalidArgument("cusum_statistic: weight vector must have length n-1");
  if (!(w.array() > 0.0).all())
    throw InvalidWeights("cusum_statistic: weights must be strictly positive");

  const Matrix& vals = y.values();
  Vector acc = Vector::Zero(n - 1);
  const bool compensated = d >= 10000;
  Vector comp = compensated ? Vector::Zero(n - 1) : Vector();
  for (int k = 0; k < d; ++k) {
    const double mean = vals.col(k).mean();
    double run = 0.0;
    for (int i = 0; i < n - 1; ++i) {
      run += vals(i, k) - mean;
      const double term = run * run;
      if (compensated) {
        const double t = term - comp[i];
        const double sum = acc[i] + t;
        comp[i] = (sum - acc[i]) - t;
        acc[i] = sum;
      } else {
        acc[i] += term;
      }
    }
  }

  CusumProfile out;
  out.t = w.array().square() * acc.array();
  out.argmax_set = argmax_with_ties(out.t);
  out.estimate = out.argmax_set.front();
  return out;
}

// Smallest maximizer of t(i).
inline int estimate_change(const PanelMatrix& y, const Vector& w) {
  return cusum_statistic(y, w).estimate;
}

}  // namespace panelseg
