#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

namespace panelseg {

// All indices attaining the maximum within a relative tie tolerance,
// returned 1-based and ascending. Shared by the CUSUM statistic and the
// critical-function calculators so both report ties identically.
inline std::vector<int> argmax_with_ties(const Eigen::VectorXd& values,
                                         double rel_tol = 1e-12) {
  const double m = values.maxCoeff();
  const double thr = m - rel_tol * std::abs(m);
  std::vector<int> out;
  for (int i = 0; i < values.size(); ++i) {
    if (values[i] >= thr) out.push_back(i + 1);
  }
  return out;
}

}  // namespace panelseg
