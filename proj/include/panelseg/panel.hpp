#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "panelseg/errors.hpp"
#include "panelseg/rng.hpp"

namespace panelseg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Observation matrix Y: rows are time points 1..n, columns are panels 1..d.
// Time indices in the public API are 1-based throughout the library; a
// change at u separates rows {1..u} from {u+1..n}, so u ranges over
// {1,...,n-1}. n >= 3 is required (with n = 1 there can be no change and
// with n = 2 the change location is trivially 1).
class PanelMatrix {
 public:
  explicit PanelMatrix(Matrix values) : values_(std::move(values)) {
    if (values_.rows() < 3)
      throw InvalidPanelLength("PanelMatrix: time length n must be >= 3");
    if (values_.cols() < 1)
      throw InvalidSpec("PanelMatrix: panel count d must be >= 1");
    if (!values_.allFinite())
      throw InvalidSpec("PanelMatrix: entries must be finite");
  }

  int n() const { return static_cast<int>(values_.rows()); }
  int d() const { return static_cast<int>(values_.cols()); }
  const Matrix& values() const { return values_; }

 private:
  Matrix values_;
};

// Piecewise constant mean structure: level row j applies to the time
// segment (u_{j-1}, u_j], with u_0 = 0 and u_{P+1} = n. levels is
// (P+1) x d.
class SignalSpec {
 public:
  SignalSpec(int n, std::vector<int> change_points, Matrix levels)
      : n_(n), change_points_(std::move(change_points)), levels_(std::move(levels)) {
    if (n_ < 3) throw InvalidSpec("SignalSpec: n must be >= 3");
    int prev = 0;
    for (int u : change_points_) {
      if (u < 1 || u > n_ - 1)
        throw InvalidSpec("SignalSpec: change points must lie in {1..n-1}");
      if (u <= prev)
        throw InvalidSpec("SignalSpec: change points must be strictly increasing");
      prev = u;
    }
    if (levels_.rows() != static_cast<Eigen::Index>(change_points_.size()) + 1)
      throw InvalidSpec("SignalSpec: levels must have P+1 rows");
    if (levels_.cols() < 1) throw InvalidSpec("SignalSpec: levels need >= 1 column");
    if (!levels_.allFinite()) throw InvalidSpec("SignalSpec: levels must be finite");
  }

  // Same scalar level per segment in every panel.
  static SignalSpec constant_levels(int n, std::vector<int> change_points,
                                    const std::vector<double>& segment_levels, int d) {
    if (d < 1) throw InvalidSpec("SignalSpec: d must be >= 1");
    Matrix levels(static_cast<Eigen::Index>(segment_levels.size()), d);
    for (std::size_t j = 0; j < segment_levels.size(); ++j)
      levels.row(static_cast<Eigen::Index>(j)).setConstant(segment_levels[j]);
    return SignalSpec(n, std::move(change_points), std::move(levels));
  }

  int n() const { return n_; }
  int d() const { return static_cast<int>(levels_.cols()); }
  int segments() const { return static_cast<int>(levels_.rows()); }
  const std::vector<int>& change_points() const { return change_points_; }
  const Matrix& levels() const { return levels_; }

 private:
  int n_;
  std::vector<int> change_points_;
  Matrix levels_;
};

enum class NoiseKind { IID, MA1 };

// Noise within/across panels. IID: eps_{i,k} = eta_{i,k}. MA1:
//   eps_{i,k} = (eta_{i,k} + phi*eta_{i-1,k}) + theta*(eta_{i,k-1} + phi*eta_{i-1,k-1})
// with i.i.d. innovations eta of variance sigma2_tilde, i.e. MA(1) both in
// time and across panels.
class NoiseModel {
 public:
  static NoiseModel iid(double sigma2_tilde) { return NoiseModel(NoiseKind::IID, 0.0, 0.0, sigma2_tilde); }
  static NoiseModel ma1(double phi, double theta, double sigma2_tilde) {
    return NoiseModel(NoiseKind::MA1, phi, theta, sigma2_tilde);
  }

  NoiseKind kind() const { return kind_; }
  double phi() const { return phi_; }
  double theta() const { return theta_; }
  double sigma2_tilde() const { return sigma2_tilde_; }

  // Marginal noise variance sigma^2 = Var(eps_{i,k}).
  double sigma2() const {
    if (kind_ == NoiseKind::IID) return sigma2_tilde_;
    return sigma2_tilde_ * (1.0 + phi_ * phi_) * (1.0 + theta_ * theta_);
  }

 private:
  NoiseModel(NoiseKind kind, double phi, double theta, double s2)
      : kind_(kind), phi_(phi), theta_(theta), sigma2_tilde_(s2) {
    if (!(s2 > 0.0) || !std::isfinite(s2))
      throw InvalidSpec("NoiseModel: sigma2_tilde must be positive and finite");
    if (!std::isfinite(phi) || !std::isfinite(theta))
      throw InvalidSpec("NoiseModel: phi/theta must be finite");
  }

  NoiseKind kind_;
  double phi_, theta_, sigma2_tilde_;
};

// Common factors zeta_i shared by all panels, entering panel k with loading
// gamma_k. Disabled means gamma_k = 0 for all k.
class CommonFactorSpec {
 public:
  static CommonFactorSpec none() { return CommonFactorSpec(Rule::None, {}); }
  // gamma_k = k^{-1/2}, the usual simulation default.
  static CommonFactorSpec inverse_sqrt() { return CommonFactorSpec(Rule::InverseSqrt, {}); }
  static CommonFactorSpec explicit_loadings(Vector gammas) {
    if (!gammas.allFinite())
      throw InvalidSpec("CommonFactorSpec: loadings must be finite");
    return CommonFactorSpec(Rule::Explicit, std::move(gammas));
  }

  bool enabled() const { return rule_ != Rule::None; }

  // 1-based panel index k.
  double loading(int k, int d) const {
    switch (rule_) {
      case Rule::None:
        return 0.0;
      case Rule::InverseSqrt:
        return 1.0 / std::sqrt(static_cast<double>(k));
      case Rule::Explicit:
        if (k < 1 || k > gammas_.size() || d > gammas_.size())
          throw InvalidSpec("CommonFactorSpec: not enough explicit loadings");
        return gammas_[k - 1];
    }
    return 0.0;
  }

 private:
  enum class Rule { None, InverseSqrt, Explicit };
  CommonFactorSpec(Rule rule, Vector gammas) : rule_(rule), gammas_(std::move(gammas)) {}
  Rule rule_;
  Vector gammas_;
};

// Per-panel random shift of the change locations: panel k changes at
// u_j + U_k with U_k drawn from a finite support. The same drawn offset is
// applied to every change point of a panel.
class ChangeLocationNoise {
 public:
  static ChangeLocationNoise none() { return ChangeLocationNoise({}); }
  // P(U = -2) = P(U = +2) = 1/2.
  static ChangeLocationNoise plus_minus_two() {
    return with_support({{-2, 0.5}, {2, 0.5}});
  }
  static ChangeLocationNoise with_support(std::vector<std::pair<int, double>> offsets) {
    if (offsets.empty())
      throw InvalidSpec("ChangeLocationNoise: support must be nonempty");
    double total = 0.0;
    for (const auto& [off, p] : offsets) {
      (void)off;
      if (p < 0.0 || !std::isfinite(p))
        throw InvalidSpec("ChangeLocationNoise: probabilities must be nonnegative");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-12)
      throw InvalidSpec("ChangeLocationNoise: probabilities must sum to 1");
    return ChangeLocationNoise(std::move(offsets));
  }

  bool enabled() const { return !support_.empty(); }
  const std::vector<std::pair<int, double>>& support() const { return support_; }

  // Offsets that occur with positive probability.
  std::vector<int> positive_support() const {
    std::vector<int> out;
    for (const auto& [off, p] : support_)
      if (p > 0.0) out.push_back(off);
    return out;
  }

  int draw(const rng::Substream& stream, std::uint64_t counter) const {
    const double x = stream.uniform01(counter);
    double cum = 0.0;
    for (const auto& [off, p] : support_) {
      cum += p;
      if (x < cum) return off;
    }
    return support_.back().first;
  }

 private:
  explicit ChangeLocationNoise(std::vector<std::pair<int, double>> s) : support_(std::move(s)) {}
  std::vector<std::pair<int, double>> support_;
};

// The n x d mean matrix implied by the spec: row i, column k equals the
// level of the segment containing i.
inline Matrix mean_matrix(const SignalSpec& spec, int d) {
  if (d != spec.d())
    throw InvalidSpec("mean_matrix: d does not match the level columns");
  const int n = spec.n();
  Matrix m(n, d);
  int row = 0;
  int seg = 0;
  const auto& cps = spec.change_points();
  for (int i = 1; i <= n; ++i, ++row) {
    while (seg < static_cast<int>(cps.size()) && i > cps[seg]) ++seg;
    m.row(row) = spec.levels().row(seg);
  }
  return m;
}

// Average squared change across panels at u: (1/d) sum_k (M_{u+1,k} - M_{u,k})^2.
inline double delta_average(const Matrix& mean, int u) {
  const int n = static_cast<int>(mean.rows());
  if (u < 1 || u > n - 1)
    throw InvalidArgument("delta_average: u must lie in {1..n-1}");
  const auto diff = mean.row(u) - mean.row(u - 1);
  return diff.squaredNorm() / static_cast<double>(mean.cols());
}

// Simulates Y = M + eps + gamma_k * zeta_i. Innovations are Gaussian with
// variance sigma2_tilde; common factors are uniform on
// [-sqrt(3*sigma2_tilde), +sqrt(3*sigma2_tilde)] so their variance matches
// the innovations. Fully deterministic in (specs, d, seed); column k only
// reads the substreams (seed, k-1) and (seed, k), so panels can be produced
// independently.
inline PanelMatrix generate_panel(const SignalSpec& signal, const NoiseModel& noise,
                                  const CommonFactorSpec& factors,
                                  const ChangeLocationNoise& loc_noise, int d,
                                  std::uint64_t seed) {
  if (d < 1) throw InvalidSpec("generate_panel: d must be >= 1");
  if (signal.d() != d)
    throw InvalidSpec("generate_panel: d does not match the signal's level columns");
  const int n = signal.n();
  const auto& cps = signal.change_points();

  if (loc_noise.enabled()) {
    for (int u : signal.change_points()) {
      for (const auto& [off, p] : loc_noise.support()) {
        if (p > 0.0 && (u + off < 1 || u + off > n - 1))
          throw InvalidSpec("generate_panel: u + offset leaves {1..n-1}");
      }
    }
  }

  Matrix y(n, d);
  const double sd = std::sqrt(noise.sigma2_tilde());
  const rng::Substream loc_stream(seed, rng::Purpose::LocationOffsets, 0);

  // eta column for the MA recursion: indices 0..n (row 0 is the burn-in
  // innovation eta_{0,k}).
  Vector eta_prev, eta_cur(n + 1);
  if (noise.kind() == NoiseKind::MA1) {
    eta_prev.resize(n + 1);
    const rng::Substream s0(seed, rng::Purpose::Innovations, 0);
    for (int i = 0; i <= n; ++i) eta_prev[i] = sd * s0.normal(static_cast<std::uint64_t>(i));
  }

  for (int k = 1; k <= d; ++k) {
    const rng::Substream sk(seed, rng::Purpose::Innovations, static_cast<std::uint64_t>(k));
    auto col = y.col(k - 1);

    // mean, with the panel's own change locations when location noise is on
    int offset = 0;
    if (loc_noise.enabled())
      offset = loc_noise.draw(loc_stream, static_cast<std::uint64_t>(k));
    {
      int seg = 0;
      for (int i = 1; i <= n; ++i) {
        while (seg < static_cast<int>(cps.size()) && i > cps[seg] + offset) ++seg;
        col[i - 1] = signal.levels()(seg, k - 1);
      }
    }

    // noise
    if (noise.kind() == NoiseKind::IID) {
      for (int i = 1; i <= n; ++i) col[i - 1] += sd * sk.normal(static_cast<std::uint64_t>(i));
    } else {
      const double phi = noise.phi(), theta = noise.theta();
      for (int i = 0; i <= n; ++i) eta_cur[i] = sd * sk.normal(static_cast<std::uint64_t>(i));
      for (int i = 1; i <= n; ++i) {
        col[i - 1] += (eta_cur[i] + phi * eta_cur[i - 1]) +
                      theta * (eta_prev[i] + phi * eta_prev[i - 1]);
      }
      std::swap(eta_prev, eta_cur);
    }
  }

  if (factors.enabled()) {
    const rng::Substream fz(seed, rng::Purpose::CommonFactors, 0);
    const double half = std::sqrt(3.0 * noise.sigma2_tilde());
    Vector zeta(n);
    for (int i = 1; i <= n; ++i) zeta[i - 1] = fz.uniform_sym(static_cast<std::uint64_t>(i), half);
    for (int k = 1; k <= d; ++k) y.col(k - 1) += factors.loading(k, d) * zeta;
  }

  return PanelMatrix(std::move(y));
}

}  // namespace panelseg
