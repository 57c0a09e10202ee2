#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "panelseg/errors.hpp"
#include "panelseg/panel.hpp"

namespace panelseg {

// Design matrix of the group fused LASSO reformulation of total variation
// denoising: D in R^{n x (n-1)} with D_{i,j} = w(j,n) for i > j and 0
// otherwise, and Dbar its column-centered version. Substituting
// beta_{i,.} = (U_{i+1,.} - U_{i,.}) / w(i,n) turns the denoising problem
//   min 1/2 ||Y - U||_F^2 + lambda * sum_i ||U_{i+1,.} - U_{i,.}|| / w(i,n)
// into
//   min 1/2 ||Ybar - Dbar beta||_F^2 + lambda * sum_i ||beta_{i,.}||.
// The Gram matrix Dbar^T Dbar has the closed form
//   K_{j,k} = w(j) w(k) j (n - k) / n   for j <= k.
class DesignMatrix {
 public:
  DesignMatrix(Vector w, int n) : n_(n), w_(std::move(w)) {
    if (n_ < 3) throw InvalidArgument("DesignMatrix: n must be >= 3");
    if (w_.size() != n_ - 1)
      throw InvalidArgument("DesignMatrix: weight vector must have length n-1");
    if (!(w_.array() > 0.0).all())
      throw InvalidArgument("DesignMatrix: weights must be strictly positive");

    d_ = Matrix::Zero(n_, n_ - 1);
    for (int j = 1; j <= n_ - 1; ++j) d_.col(j - 1).tail(n_ - j).setConstant(w_[j - 1]);
    dbar_ = d_.rowwise() - d_.colwise().mean();

    gram_.resize(n_ - 1, n_ - 1);
    for (int j = 1; j <= n_ - 1; ++j) {
      for (int k = j; k <= n_ - 1; ++k) {
        const double v = w_[j - 1] * w_[k - 1] * static_cast<double>(j) *
                         (static_cast<double>(n_ - k) / n_);
        gram_(j - 1, k - 1) = v;
        gram_(k - 1, j - 1) = v;
      }
    }
  }

  int n() const { return n_; }
  const Vector& weights() const { return w_; }
  const Matrix& d() const { return d_; }
  const Matrix& dbar() const { return dbar_; }
  const Matrix& gram() const { return gram_; }

 private:
  int n_;
  Vector w_;
  Matrix d_, dbar_, gram_;
};

// Correlations c_hat = Dbar^T Ybar and their row norms t_i. By the
// reformulation, t_i^2 coincides with the weighted CUSUM statistic t(i)
// computed from the same weights.
struct CorrelationProfile {
  Matrix c_hat;            // (n-1) x d
  Vector t;                // t_i = ||c_hat_{i,.}||, stored at index i-1
  std::vector<int> order;  // 1-based indices, ascending in t
  int largest_index = 0;   // M
  double t_largest = 0.0;  // t_M
  int second_index = 0;    // m
  double t_second = 0.0;   // t_m
};

namespace detail {

inline Matrix column_centered(const Matrix& y) {
  return y.rowwise() - y.colwise().mean();
}

inline CorrelationProfile profile_from_correlations(Matrix c_hat) {
  CorrelationProfile p;
  p.c_hat = std::move(c_hat);
  const int m = static_cast<int>(p.c_hat.rows());
  p.t = p.c_hat.rowwise().norm();
  p.order.resize(m);
  for (int i = 0; i < m; ++i) p.order[i] = i + 1;
  std::sort(p.order.begin(), p.order.end(), [&](int a, int b) {
    if (p.t[a - 1] != p.t[b - 1]) return p.t[a - 1] < p.t[b - 1];
    return a < b;
  });
  p.largest_index = p.order[m - 1];
  p.t_largest = p.t[p.largest_index - 1];
  p.second_index = p.order[m - 2];
  p.t_second = p.t[p.second_index - 1];
  return p;
}

}  // namespace detail

inline CorrelationProfile correlations(const PanelMatrix& y, const DesignMatrix& dm) {
  if (dm.n() != y.n())
    throw InvalidArgument("correlations: design matrix and panel disagree on n");
  Matrix ybar = detail::column_centered(y.values());
  return detail::profile_from_correlations(dm.dbar().transpose() * ybar);
}

struct LassoSolution {
  Matrix beta;                  // (n-1) x d
  double lambda = 0.0;
  Matrix fitted;                // U_hat = 1 gamma_hat + D beta, n x d
  std::vector<int> change_set;  // indices of nonzero beta rows, ascending
  double kkt_residual = 0.0;
  long sweeps = 0;
  std::vector<double> objective_trace;  // per sweep, when requested
};

struct SolveOptions {
  double tol = 1e-8;
  long max_sweeps = 100000;
  bool track_objective = false;
  const Matrix* warm_start = nullptr;  // (n-1) x d, copied
};

namespace detail {

// Row operations dominate the solver, so beta, S and K*beta live in
// row-major storage internally; the public LassoSolution keeps the default
// layout.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// KKT violation of the group fused LASSO at (beta, lambda), given the
// gradient G = S - K beta (rows G_i = Dbar_{.,i}^T (Ybar - Dbar beta)):
//   beta_i != 0:  || G_i - lambda beta_i/||beta_i|| ||
//   beta_i == 0:  max(0, ||G_i|| - lambda)
// Violations are normalized by (1 + lambda) so one tolerance is meaningful
// across lambda scales.
template <typename MatA, typename MatB>
inline double kkt_violation(const MatA& grad, const MatB& beta, double lambda) {
  double worst = 0.0;
  for (int i = 0; i < beta.rows(); ++i) {
    const double nb = beta.row(i).norm();
    double v;
    if (nb == 0.0) {
      v = std::max(0.0, grad.row(i).norm() - lambda);
    } else {
      v = (grad.row(i) - (lambda / nb) * beta.row(i)).norm();
    }
    worst = std::max(worst, v);
  }
  return worst / (1.0 + lambda);
}

// Shared state for repeated solves on one (Y, D) pair; segment() reuses it
// along the lambda path with warm starts.
class GflWorkspace {
 public:
  GflWorkspace(const PanelMatrix& y, const DesignMatrix& dm)
      : y_(&y),
        dm_(&dm),
        ybar_(column_centered(y.values())),
        s_(dm.dbar().transpose() * ybar_),
        half_ybar_sq_(0.5 * ybar_.squaredNorm()) {
    if (dm.n() != y.n())
      throw InvalidArgument("solve: design matrix and panel disagree on n");
  }

  const RowMatrix& s() const { return s_; }

  struct RunResult {
    double kkt = 0.0;
    long sweeps = 0;
    std::vector<double> objective_trace;
  };

  // Block coordinate descent over the rows of beta with exact group
  // soft-threshold updates; terminates once the KKT residual certifies the
  // solution. beta is updated in place (pass zeros for a cold start).
  RunResult run(double lambda, const SolveOptions& opts, RowMatrix& beta) const {
    const Matrix& k = dm_->gram();
    const int m = static_cast<int>(beta.rows());
    RowMatrix p = beta.isZero(0.0) ? RowMatrix::Zero(m, beta.cols()) : RowMatrix(k * beta);

    RunResult res;
    // rows whose gradient norm exceeds lambda by only a few ulps stay at
    // zero, so lambda >= t_M yields beta = 0 bit-exactly however the norms
    // were rounded
    const double zero_slack = 1.0 + 4.0 * std::numeric_limits<double>::epsilon();
    Eigen::RowVectorXd gi(beta.cols()), delta(beta.cols());
    for (long sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
      for (int i = 0; i < m; ++i) {
        const double kii = k(i, i);
        gi = s_.row(i) - p.row(i) + kii * beta.row(i);
        const double ng = gi.norm();
        const bool was_zero = beta.row(i).isZero(0.0);
        if (ng <= lambda * zero_slack) {
          if (!was_zero) {
            delta = -beta.row(i);
            p.noalias() += k.col(i) * delta;
            beta.row(i).setZero();
          }
        } else {
          delta = ((ng - lambda) / (ng * kii)) * gi - beta.row(i);
          if (!delta.isZero(0.0)) {
            p.noalias() += k.col(i) * delta;
            beta.row(i) += delta;
          }
        }
      }
      res.sweeps = sweep;
      if (opts.track_objective) {
        double norms = 0.0;
        for (int i = 0; i < m; ++i) norms += beta.row(i).norm();
        const double obj = half_ybar_sq_ - (s_.array() * beta.array()).sum() +
                           0.5 * (beta.array() * p.array()).sum() + lambda * norms;
        res.objective_trace.push_back(obj);
      }
      const double approx = kkt_violation(RowMatrix(s_ - p), beta, lambda);
      if (approx <= opts.tol) {
        p.noalias() = k * beta;  // discard accumulated drift before certifying
        res.kkt = kkt_violation(RowMatrix(s_ - p), beta, lambda);
        if (res.kkt <= opts.tol) return res;
      }
    }
    res.kkt = kkt_violation(RowMatrix(s_ - k * beta), beta, lambda);
    throw SolverFailure("gflasso solve: no convergence after " +
                        std::to_string(opts.max_sweeps) + " sweeps (kkt_residual " +
                        std::to_string(res.kkt) + ")");
  }

  // U_hat = 1 gamma_hat + D beta with gamma_hat = 1^T (Y - D beta) / n.
  template <typename MatB>
  Matrix fitted(const MatB& beta) const {
    const int n = y_->n();
    const int d = y_->d();
    Matrix dbeta(n, d);
    dbeta.row(0).setZero();
    for (int i = 1; i < n; ++i)
      dbeta.row(i) = dbeta.row(i - 1) + dm_->weights()[i - 1] * beta.row(i - 1);
    Eigen::RowVectorXd gamma = (y_->values() - dbeta).colwise().mean();
    return dbeta.rowwise() + gamma;
  }

 private:
  const PanelMatrix* y_;
  const DesignMatrix* dm_;
  Matrix ybar_;
  RowMatrix s_;
  double half_ybar_sq_;
};

template <typename MatB>
inline std::vector<int> nonzero_rows(const MatB& beta) {
  std::vector<int> out;
  for (int i = 0; i < beta.rows(); ++i)
    if (!beta.row(i).isZero(0.0)) out.push_back(i + 1);
  return out;
}

}  // namespace detail

// KKT residual of a candidate beta at the given lambda (normalized by
// 1 + lambda; see detail::kkt_violation).
inline double kkt_residual(const PanelMatrix& y, const DesignMatrix& dm, const Matrix& beta,
                           double lambda) {
  if (dm.n() != y.n() || beta.rows() != y.n() - 1 || beta.cols() != y.d())
    throw InvalidArgument("kkt_residual: dimension mismatch");
  if (lambda < 0.0) throw InvalidArgument("kkt_residual: lambda must be >= 0");
  Matrix ybar = detail::column_centered(y.values());
  Matrix grad = dm.dbar().transpose() * (ybar - dm.dbar() * beta);
  return detail::kkt_violation(grad, beta, lambda);
}

// Solves the group fused LASSO at one lambda, KKT-certified to opts.tol.
// lambda = 0 is the exact interpolation U_hat(0) = Y, recovered in closed
// form from the consecutive row differences.
inline LassoSolution solve(const PanelMatrix& y, const DesignMatrix& dm, double lambda,
                           const SolveOptions& opts = {}) {
  if (lambda < 0.0) throw InvalidArgument("solve: lambda must be >= 0");
  detail::GflWorkspace ws(y, dm);

  LassoSolution sol;
  sol.lambda = lambda;
  const int m = y.n() - 1;

  if (lambda == 0.0) {
    sol.beta.resize(m, y.d());
    for (int i = 0; i < m; ++i)
      sol.beta.row(i) = (y.values().row(i + 1) - y.values().row(i)) / dm.weights()[i];
    sol.fitted = y.values();
    sol.change_set = detail::nonzero_rows(sol.beta);
    sol.kkt_residual = kkt_residual(y, dm, sol.beta, 0.0);
    return sol;
  }

  detail::RowMatrix beta = detail::RowMatrix::Zero(m, y.d());
  if (opts.warm_start) {
    if (opts.warm_start->rows() != m || opts.warm_start->cols() != y.d())
      throw InvalidArgument("solve: warm start has the wrong shape");
    beta = *opts.warm_start;
  }
  auto run = ws.run(lambda, opts, beta);
  sol.kkt_residual = run.kkt;
  sol.sweeps = run.sweeps;
  sol.objective_trace = std::move(run.objective_trace);
  sol.fitted = ws.fitted(beta);
  sol.change_set = detail::nonzero_rows(beta);
  sol.beta = beta;
  return sol;
}

inline LassoSolution solve(const PanelMatrix& y, const Vector& w, double lambda,
                           const SolveOptions& opts = {}) {
  return solve(y, DesignMatrix(w, y.n()), lambda, opts);
}

struct SingleChangeSolution {
  int estimate = 0;          // M = argmax t_i
  double lambda_low = 0.0;   // t_m
  double lambda_high = 0.0;  // t_M; any lambda in (t_m, t_M) close enough to
                             // t_M yields E(lambda) = {estimate}
};

// Single change point via the correlation profile: u_hat = argmax t_i, with
// the admissible regularization interval (t_m, t_M). Requires a unique
// maximum; equals the weighted CUSUM estimate whenever both are defined.
inline SingleChangeSolution single_change_solution(const PanelMatrix& y, const Vector& w) {
  CorrelationProfile prof = correlations(y, DesignMatrix(w, y.n()));
  if (prof.t_largest - prof.t_second <= 1e-12 * prof.t_largest)
    throw AmbiguousMaximum("single_change_solution: maximum of t_i is not unique");
  return SingleChangeSolution{prof.largest_index, prof.t_second, prof.t_largest};
}

struct SegmentPathEntry {
  double lambda = 0.0;
  int count = 0;
  double kkt_residual = 0.0;
};

struct SegmentResult {
  std::vector<int> change_set;
  double lambda = 0.0;  // the lambda whose change set is returned
  std::vector<SegmentPathEntry> path;
};

// Searches lambda in (0, t_M] for |E(lambda)| = k_target by dichotomy,
// refined to relative width 1e-6 within at most 60 bisections, and returns
// the change set of the largest lambda that achieved the target. |E(lambda)|
// is not guaranteed monotone in lambda; if the bisection misses the target a
// grid of 200 log-spaced lambdas is scanned before giving up.
inline SegmentResult segment(const PanelMatrix& y, const Vector& w, int k_target,
                             const SolveOptions& base_opts = {}) {
  const int n = y.n();
  if (k_target < 1 || k_target > n - 1)
    throw InvalidArgument("segment: k_target must lie in {1..n-1}");

  DesignMatrix dm(w, n);
  detail::GflWorkspace ws(y, dm);
  const double t_max = ws.s().rowwise().norm().maxCoeff();

  SegmentResult result;
  if (t_max <= 0.0) {
    throw TargetCountUnreachable(
        "segment: all panels are constant, E(lambda) is empty for every lambda > 0");
  }

  detail::RowMatrix beta = detail::RowMatrix::Zero(n - 1, y.d());  // rolling warm start
  SolveOptions opts = base_opts;
  opts.warm_start = nullptr;
  opts.track_objective = false;

  double best_lambda = std::numeric_limits<double>::quiet_NaN();
  std::vector<int> best_set;
  auto evaluate = [&](double lambda) {
    auto run = ws.run(lambda, opts, beta);
    auto set = detail::nonzero_rows(beta);
    result.path.push_back({lambda, static_cast<int>(set.size()), run.kkt});
    if (static_cast<int>(set.size()) == k_target &&
        (!(best_lambda == best_lambda) || lambda > best_lambda)) {
      best_lambda = lambda;
      best_set = std::move(set);
      return k_target;
    }
    return static_cast<int>(set.size());
  };

  double lo = 0.0, hi = t_max;
  evaluate(t_max);  // |E(t_M)| = 0 unless k was reached exactly at the top
  for (int iter = 0; iter < 60 && (hi - lo) > 1e-6 * t_max; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const int c = evaluate(mid);
    if (c >= k_target) {
      lo = mid;  // target (or more changes) at mid: the k -> k-1 boundary is above
    } else {
      hi = mid;
    }
  }

  if (!(best_lambda == best_lambda)) {
    // non-monotone path: scan 200 log-spaced lambdas from t_M downward
    for (int j = 0; j < 200; ++j) {
      const double lambda = t_max * std::pow(1e-8, static_cast<double>(j) / 199.0);
      if (evaluate(lambda) == k_target) break;
    }
  }

  if (!(best_lambda == best_lambda)) {
    std::string msg = "segment: no lambda with |E(lambda)| = " + std::to_string(k_target) +
                      "; achieved counts along the path:";
    const std::size_t show = std::min<std::size_t>(result.path.size(), 25);
    for (std::size_t j = 0; j < show; ++j) {
      msg += " (" + std::to_string(result.path[j].lambda) + " -> " +
             std::to_string(result.path[j].count) + ")";
    }
    throw TargetCountUnreachable(msg);
  }

  result.change_set = std::move(best_set);
  result.lambda = best_lambda;
  return result;
}

}  // namespace panelseg
